#include "qsteer/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qsteer {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ValidationError("config field '" + field + "': " + why);
}

double require_number(const json& j, const std::string& field) {
  if (!j.contains(field)) fail(field, "missing");
  if (!j.at(field).is_number()) fail(field, "must be a number");
  return j.at(field).get<double>();
}

double optional_number(const json& j, const std::string& field, double dflt) {
  if (!j.contains(field)) return dflt;
  if (!j.at(field).is_number()) fail(field, "must be a number");
  return j.at(field).get<double>();
}

std::string require_string(const json& j, const std::string& field) {
  if (!j.contains(field)) fail(field, "missing");
  if (!j.at(field).is_string()) fail(field, "must be a string");
  return j.at(field).get<std::string>();
}

Matrix2 parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
      !j[1].is_array() || j[1].size() != 2) {
    fail(field, "must be a 2x2 array of [re, im] pairs or numbers");
  }
  auto entry = [&](int r, int c) -> Complex {
    const json& e = j[r][c];
    if (e.is_number()) return Complex(e.get<double>(), 0.0);
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      return Complex(e[0].get<double>(), e[1].get<double>());
    }
    fail(field, "entries must be numbers or [re, im] pairs");
  };
  return {entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1)};
}

ErrorModel parse_model(const json& j, double dt) {
  if (!j.contains("error_model")) fail("error_model", "missing");
  const json& m = j.at("error_model");
  if (!m.is_object()) fail("error_model", "must be an object");
  const std::string type = require_string(m, "type");
  try {
    if (type == "ideal") return IdealModel{};
    if (type == "detector_init") {
      DetectorInitModel out;
      out.kappa = require_number(m, "kappa");
      out.a = require_number(m, "a");
      out.phi = optional_number(m, "phi", 0.0);
      return out;
    }
    if (type == "directions") {
      DirectionsModel out;
      const std::string h =
          m.contains("hierarchy") ? require_string(m, "hierarchy") : "full";
      if (h == "full") {
        out.hierarchy = DirectionHierarchy::Full;
      } else if (h == "dir_avg") {
        out.hierarchy = DirectionHierarchy::DirAvg;
      } else if (h == "click_avg") {
        out.hierarchy = DirectionHierarchy::ClickAvg;
      } else if (h == "lindblad") {
        out.hierarchy = DirectionHierarchy::Lindblad;
      } else {
        fail("error_model.hierarchy",
             "must be one of full, dir_avg, click_avg, lindblad");
      }
      if (m.contains("set")) {
        if (!m.at("set").is_array()) {
          fail("error_model.set", "must be an array of direction objects");
        }
        std::vector<SteeringDirection> entries;
        for (const auto& e : m.at("set")) {
          entries.push_back({require_number(e, "theta"),
                             optional_number(e, "phi", 0.0),
                             require_number(e, "p")});
        }
        out.directions = SteeringSet(std::move(entries));
      } else if (m.contains("uniform_arc")) {
        out.directions =
            UniformArc{require_number(m.at("uniform_arc"), "theta_tilde")};
      } else if (m.contains("von_mises")) {
        out.directions = VonMises{require_number(m.at("von_mises"), "sigma")};
      } else {
        fail("error_model", "needs one of set, uniform_arc, von_mises");
      }
      return out;
    }
    if (type == "coupling") {
      CouplingModel out;
      if (!m.contains("dist") || !m.at("dist").is_object()) {
        fail("error_model.dist", "missing distribution object");
      }
      const json& d = m.at("dist");
      const std::string dtype = require_string(d, "type");
      if (dtype == "discrete") {
        DiscreteCouplingSet set;
        if (!d.contains("entries") || !d.at("entries").is_array()) {
          fail("error_model.dist.entries", "must be an array");
        }
        for (const auto& e : d.at("entries")) {
          set.entries.push_back(
              {require_number(e, "coupling"), require_number(e, "p")});
        }
        out.dist = CouplingDistribution{set};
      } else if (dtype == "gaussian") {
        out.dist = CouplingDistribution{
            GaussianCoupling{require_number(d, "sigma")}};
      } else if (dtype == "white_noise") {
        out.dist = CouplingDistribution{
            WhiteNoiseCoupling{require_number(d, "upsilon")}};
      } else {
        fail("error_model.dist.type",
             "must be one of discrete, gaussian, white_noise");
      }
      validate_coupling(out.dist, dt);
      return out;
    }
    if (type == "hamiltonian_noise") {
      HamiltonianNoiseModel out;
      out.gamma_tilde = require_number(m, "gamma_tilde");
      if (!(out.gamma_tilde >= 0.0)) {
        fail("error_model.gamma_tilde", "must be >= 0");
      }
      if (m.contains("G")) {
        const std::string g = require_string(m, "G");
        if (g == "sigma_z") {
          out.blocks = PerturbationBlocks::from_system_operator(sigma_z());
        } else if (g == "sigma_x") {
          out.blocks = PerturbationBlocks::from_system_operator(sigma_x());
        } else {
          fail("error_model.G", "must be sigma_z or sigma_x");
        }
        out.label = g;
      } else if (m.contains("A")) {
        const Matrix2 a = parse_matrix(m.at("A"), "error_model.A");
        const Matrix2 b = m.contains("B")
                              ? parse_matrix(m.at("B"), "error_model.B")
                              : Matrix2{};
        const Matrix2 c = m.contains("C")
                              ? parse_matrix(m.at("C"), "error_model.C")
                              : Matrix2{};
        out.blocks = PerturbationBlocks(a, b, c);
        out.label = "custom";
      } else {
        fail("error_model", "needs G or explicit blocks A (and optional B, C)");
      }
      return out;
    }
    if (type == "measurement_basis") {
      MeasurementBasisModel out;
      out.p1 = optional_number(m, "p1", 0.5);
      if (!(out.p1 >= 0.0 && out.p1 <= 1.0)) {
        fail("error_model.p1", "must lie in [0, 1]");
      }
      return out;
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    fail("error_model", e.what());
  }
  fail("error_model.type",
       "unknown type '" + type +
           "' (expected ideal, detector_init, directions, coupling, "
           "hamiltonian_noise, measurement_basis)");
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  if (!j.contains("schema_version")) fail("schema_version", "missing");
  if (!j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != kSchemaVersion) {
    fail("schema_version",
         "must be the integer " + std::to_string(kSchemaVersion));
  }

  Scenario s;
  s.gamma = require_number(j, "gamma");
  if (!(s.gamma > 0.0)) fail("gamma", "must be > 0");

  if (!j.contains("initial_bloch")) fail("initial_bloch", "missing");
  const json& r0 = j.at("initial_bloch");
  if (!r0.is_array() || r0.size() != 3 || !r0[0].is_number() ||
      !r0[1].is_number() || !r0[2].is_number()) {
    fail("initial_bloch", "must be [x, y, z]");
  }
  s.initial_bloch = {r0[0].get<double>(), r0[1].get<double>(),
                     r0[2].get<double>()};
  if (s.initial_bloch.norm() > 1.0 + kPositivityTol) {
    fail("initial_bloch", "lies outside the Bloch ball");
  }

  if (!j.contains("time_grid")) fail("time_grid", "missing");
  const json& grid = j.at("time_grid");
  s.dt = require_number(grid, "dt");
  if (!(s.dt > 0.0)) fail("time_grid.dt", "must be > 0");
  if (!grid.contains("n_steps") || !grid.at("n_steps").is_number_integer() ||
      grid.at("n_steps").get<long long>() < 0) {
    fail("time_grid.n_steps", "must be an integer >= 0");
  }
  s.n_steps = grid.at("n_steps").get<std::size_t>();

  const std::string mode =
      j.contains("mode") ? require_string(j, "mode") : "lindblad";
  if (mode == "lindblad") {
    s.mode = RunMode::Lindblad;
  } else if (mode == "ensemble") {
    s.mode = RunMode::Ensemble;
  } else if (mode == "single") {
    s.mode = RunMode::Single;
  } else {
    fail("mode", "must be one of lindblad, ensemble, single");
  }

  if (s.mode == RunMode::Ensemble) {
    if (!j.contains("n_trajectories") ||
        !j.at("n_trajectories").is_number_integer() ||
        j.at("n_trajectories").get<long long>() < 1) {
      fail("n_trajectories", "must be an integer >= 1 in ensemble mode");
    }
    s.n_trajectories = j.at("n_trajectories").get<std::size_t>();
  } else if (s.mode == RunMode::Single) {
    s.n_trajectories = 1;
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) fail("seed", "must be an integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }

  if (j.contains("target")) {
    const json& t = j.at("target");
    try {
      s.quantifier_target =
          RotationAngles(require_number(t, "theta"), require_number(t, "phi"));
    } catch (const ValidationError& e) {
      fail("target", e.what());
    }
  }

  s.model = parse_model(j, s.dt);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

json matrix_to_json(const Matrix2& m) {
  auto pair = [](Complex c) { return json::array({c.real(), c.imag()}); };
  return json::array({json::array({pair(m.m00), pair(m.m01)}),
                      json::array({pair(m.m10), pair(m.m11)})});
}

json model_to_json(const ErrorModel& model) {
  json m;
  if (std::holds_alternative<IdealModel>(model)) {
    m["type"] = "ideal";
  } else if (const auto* d = std::get_if<DetectorInitModel>(&model)) {
    m["type"] = "detector_init";
    m["kappa"] = d->kappa;
    m["a"] = d->a;
    m["phi"] = d->phi;
  } else if (const auto* d = std::get_if<DirectionsModel>(&model)) {
    m["type"] = "directions";
    switch (d->hierarchy) {
      case DirectionHierarchy::Full: m["hierarchy"] = "full"; break;
      case DirectionHierarchy::DirAvg: m["hierarchy"] = "dir_avg"; break;
      case DirectionHierarchy::ClickAvg: m["hierarchy"] = "click_avg"; break;
      case DirectionHierarchy::Lindblad: m["hierarchy"] = "lindblad"; break;
    }
    if (const auto* set = std::get_if<SteeringSet>(&d->directions)) {
      json arr = json::array();
      for (const auto& e : set->entries()) {
        arr.push_back({{"theta", e.theta},
                       {"phi", e.phi},
                       {"p", e.probability}});
      }
      m["set"] = arr;
    } else if (const auto* arc = std::get_if<UniformArc>(&d->directions)) {
      m["uniform_arc"] = {{"theta_tilde", arc->theta_tilde}};
    } else if (const auto* vm = std::get_if<VonMises>(&d->directions)) {
      m["von_mises"] = {{"sigma", vm->sigma}};
    }
  } else if (const auto* c = std::get_if<CouplingModel>(&model)) {
    m["type"] = "coupling";
    json dist;
    if (const auto* set = std::get_if<DiscreteCouplingSet>(&c->dist.dist)) {
      dist["type"] = "discrete";
      json arr = json::array();
      for (const auto& e : set->entries) {
        arr.push_back({{"coupling", e.coupling}, {"p", e.probability}});
      }
      dist["entries"] = arr;
    } else if (const auto* g = std::get_if<GaussianCoupling>(&c->dist.dist)) {
      dist["type"] = "gaussian";
      dist["sigma"] = g->sigma;
    } else if (const auto* w = std::get_if<WhiteNoiseCoupling>(&c->dist.dist)) {
      dist["type"] = "white_noise";
      dist["upsilon"] = w->upsilon;
    }
    m["dist"] = dist;
  } else if (const auto* h = std::get_if<HamiltonianNoiseModel>(&model)) {
    m["type"] = "hamiltonian_noise";
    m["gamma_tilde"] = h->gamma_tilde;
    if (h->label == "sigma_z" || h->label == "sigma_x") {
      m["G"] = h->label;
    } else {
      m["A"] = matrix_to_json(h->blocks.a());
      m["B"] = matrix_to_json(h->blocks.b());
      m["C"] = matrix_to_json(h->blocks.c());
    }
  } else if (const auto* b = std::get_if<MeasurementBasisModel>(&model)) {
    m["type"] = "measurement_basis";
    m["p1"] = b->p1;
  }
  return m;
}

}  // namespace

std::string canonical_scenario_json(const Scenario& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["gamma"] = s.gamma;
  j["initial_bloch"] =
      json::array({s.initial_bloch.x, s.initial_bloch.y, s.initial_bloch.z});
  j["time_grid"] = {{"dt", s.dt}, {"n_steps", s.n_steps}};
  switch (s.mode) {
    case RunMode::Lindblad: j["mode"] = "lindblad"; break;
    case RunMode::Ensemble: j["mode"] = "ensemble"; break;
    case RunMode::Single: j["mode"] = "single"; break;
  }
  if (s.mode == RunMode::Ensemble) j["n_trajectories"] = s.n_trajectories;
  j["seed"] = s.seed;
  if (s.quantifier_target) {
    j["target"] = {{"theta", s.quantifier_target->theta()},
                   {"phi", s.quantifier_target->phi()}};
  }
  j["error_model"] = model_to_json(s.model);
  // nlohmann objects are key sorted, so dump() is canonical
  return j.dump();
}

std::string scenario_digest(const Scenario& s) {
  const std::string text = canonical_scenario_json(s);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace qsteer
