#include "qsteer/runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace qsteer {

namespace {

using nlohmann::json;

// --- CSV ---------------------------------------------------------------------

constexpr const char* kCsvHeader =
    "t,x,y,z,re_coh,im_coh,pop11,F,D1,L,se_x,se_y,se_z\n";

std::string format17(double v) {
  char buf[40];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw NumericalError("number formatting failed");
  return std::string(buf, ptr);
}

struct CsvRow {
  double t{};
  BlochVector r;
  QuantifierTriple q;
  BlochVector se;
};

void append_row(std::string& out, const CsvRow& row) {
  out += format17(row.t);
  out += ',';
  out += format17(row.r.x);
  out += ',';
  out += format17(row.r.y);
  out += ',';
  out += format17(row.r.z);
  out += ',';
  out += format17(0.5 * row.r.x);
  out += ',';
  out += format17(-0.5 * row.r.y);
  out += ',';
  out += format17(0.5 * (1.0 + row.r.z));
  out += ',';
  out += format17(row.q.fidelity);
  out += ',';
  out += format17(row.q.trace_distance);
  out += ',';
  out += format17(row.q.linear_entropy);
  out += ',';
  out += format17(row.se.x);
  out += ',';
  out += format17(row.se.y);
  out += ',';
  out += format17(row.se.z);
  out += '\n';
}

Matrix2 quantifier_frame_matrix(const Scenario& s) {
  return s.quantifier_target ? rotation(*s.quantifier_target) : identity2();
}

QuantifierTriple framed_metrics(const DensityMatrix& state, const Matrix2& r) {
  return target_metrics(
      DensityMatrix::normalized_from_matrix(r.adjoint() * state.matrix() * r));
}

}  // namespace

// --- model plumbing -----------------------------------------------------------

BlochRhs make_lindblad_rhs(const Scenario& scenario) {
  const double gamma = scenario.gamma;
  if (std::holds_alternative<IdealModel>(scenario.model) ||
      std::holds_alternative<MeasurementBasisModel>(scenario.model)) {
    // blind measurement-direction averaging reproduces the ideal flow
    return [gamma](const BlochVector& r) {
      return BlochVector{-0.5 * gamma * r.x, -0.5 * gamma * r.y,
                         gamma * (1.0 - r.z)};
    };
  }
  if (const auto* d = std::get_if<DetectorInitModel>(&scenario.model)) {
    const ErroneousChannelParams p(gamma, d->kappa, d->a, d->phi);
    return [p](const BlochVector& r) { return erroneous_rhs_bloch(r, p); };
  }
  if (const auto* d = std::get_if<DirectionsModel>(&scenario.model)) {
    if (const auto* set = std::get_if<SteeringSet>(&d->directions)) {
      auto prepared = std::make_shared<PreparedSteeringSet>(*set);
      return [prepared, gamma](const BlochVector& r) {
        return bloch_derivative(
            avg_lindblad_rhs(density_from_bloch(r), *prepared, gamma));
      };
    }
    const auto* arc = std::get_if<UniformArc>(&d->directions);
    const DirectionDistribution dist =
        arc ? DirectionDistribution{*arc}
            : DirectionDistribution{std::get<VonMises>(d->directions)};
    return [dist, gamma](const BlochVector& r) {
      return bloch_derivative(
          continuous_lindblad_rhs(density_from_bloch(r), dist, gamma));
    };
  }
  if (const auto* c = std::get_if<CouplingModel>(&scenario.model)) {
    const double rate = effective_rate(c->dist, scenario.dt);
    return [rate](const BlochVector& r) {
      return BlochVector{-0.5 * rate * r.x, -0.5 * rate * r.y,
                         rate * (1.0 - r.z)};
    };
  }
  const auto& h = std::get<HamiltonianNoiseModel>(scenario.model);
  const PerturbationBlocks blocks = h.blocks;
  const double gt = h.gamma_tilde;
  return [gamma, blocks, gt](const BlochVector& r) {
    return bloch_derivative(
        perturbed_lindblad_rhs(density_from_bloch(r), gamma, blocks, gt));
  };
}

TrajectoryFactory make_scenario_trajectory_factory(const Scenario& scenario) {
  const double gamma = scenario.gamma;
  const double dt = scenario.dt;
  if (std::holds_alternative<IdealModel>(scenario.model)) {
    return make_trajectory_factory(
        [gamma, dt](const DensityMatrix& w, RngStream& stream) {
          return wm_jump_step(w, gamma, dt, stream);
        });
  }
  if (std::holds_alternative<DetectorInitModel>(scenario.model)) {
    throw ValidationError(
        "detector_init defines averaged dynamics only; use mode lindblad");
  }
  if (const auto* d = std::get_if<DirectionsModel>(&scenario.model)) {
    const auto* set = std::get_if<SteeringSet>(&d->directions);
    if (set == nullptr) {
      throw ValidationError(
          "continuous direction distributions run in mode lindblad only");
    }
    auto prepared = std::make_shared<PreparedSteeringSet>(*set);
    switch (d->hierarchy) {
      case DirectionHierarchy::Full:
        return make_trajectory_factory(
            [prepared, gamma, dt](const DensityMatrix& w, RngStream& s) {
              return full_step(w, *prepared, gamma, dt, s);
            });
      case DirectionHierarchy::DirAvg:
        return make_trajectory_factory(
            [prepared, gamma, dt](const DensityMatrix& w, RngStream& s) {
              return dir_avg_step(w, *prepared, gamma, dt, s);
            });
      case DirectionHierarchy::ClickAvg:
        return make_trajectory_factory(
            [prepared, gamma, dt](const DensityMatrix& w, RngStream& s) {
              return click_avg_step(w, *prepared, gamma, dt, s);
            });
      case DirectionHierarchy::Lindblad:
        throw ValidationError(
            "hierarchy lindblad is deterministic; use mode lindblad");
    }
  }
  if (const auto* c = std::get_if<CouplingModel>(&scenario.model)) {
    if (const auto* w = std::get_if<WhiteNoiseCoupling>(&c->dist.dist)) {
      const double upsilon = w->upsilon;
      return make_trajectory_factory(
          [upsilon, dt](const DensityMatrix& rho, RngStream& s) {
            return whitenoise_coupling_step(rho, upsilon, dt, &s);
          });
    }
    const CouplingDistribution dist = c->dist;
    return make_trajectory_factory(
        [dist, dt](const DensityMatrix& rho, RngStream& s) {
          return quenched_coupling_step(rho, dist, dt, s).posterior;
        });
  }
  if (const auto* h = std::get_if<HamiltonianNoiseModel>(&scenario.model)) {
    const PerturbationBlocks blocks = h->blocks;
    const double gt = h->gamma_tilde;
    return make_trajectory_factory(
        [gamma, blocks, gt, dt](const DensityMatrix& w, RngStream& s) {
          return jump_diffusive_step(w, gamma, blocks, gt, dt, s);
        });
  }
  const auto& b = std::get<MeasurementBasisModel>(scenario.model);
  return make_hybrid_trajectory_factory(b.p1, gamma, dt);
}

// --- simulate --------------------------------------------------------------

namespace {

std::vector<CsvRow> run_rows(const Scenario& scenario, int threads,
                             std::uint64_t* coarse_events) {
  const Matrix2 frame = quantifier_frame_matrix(scenario);
  const DensityMatrix initial = density_from_bloch(scenario.initial_bloch);
  std::vector<CsvRow> rows;

  if (scenario.n_steps == 0) {
    rows.push_back({0.0, scenario.initial_bloch,
                    framed_metrics(initial, frame), BlochVector{}});
    return rows;
  }

  const bool deterministic =
      scenario.mode == RunMode::Lindblad ||
      (std::holds_alternative<DirectionsModel>(scenario.model) &&
       std::get<DirectionsModel>(scenario.model).hierarchy ==
           DirectionHierarchy::Lindblad);

  if (deterministic) {
    const BlochRhs rhs = make_lindblad_rhs(scenario);
    BlochVector r = scenario.initial_bloch;
    rows.reserve(scenario.n_steps + 1);
    for (std::size_t k = 0; k <= scenario.n_steps; ++k) {
      if (k > 0) r = rk4_step(rhs, r, scenario.dt);
      rows.push_back({scenario.dt * static_cast<double>(k), r,
                      framed_metrics(density_from_bloch(r), frame),
                      BlochVector{}});
    }
    return rows;
  }

  const TimeGrid grid(scenario.dt, scenario.n_steps);
  const TrajectoryFactory factory = make_scenario_trajectory_factory(scenario);
  const bool use_frame = scenario.quantifier_target.has_value();
  const EnsembleStats stats =
      run_ensemble(factory, initial, grid, scenario.n_trajectories,
                   scenario.seed, threads, use_frame ? &frame : nullptr);
  if (coarse_events != nullptr) *coarse_events = stats.coarse_rate_events;
  rows.reserve(stats.n_points());
  for (std::size_t k = 0; k < stats.n_points(); ++k) {
    rows.push_back({stats.t[k], stats.mean_bloch[k], stats.mean_quantifiers[k],
                    stats.stderr_bloch[k]});
  }
  return rows;
}

}  // namespace

std::string simulate_to_csv(const Scenario& scenario, int threads) {
  std::uint64_t coarse = 0;
  const std::vector<CsvRow> rows = run_rows(scenario, threads, &coarse);
  std::string out = kCsvHeader;
  for (const auto& row : rows) append_row(out, row);
  return out;
}

SimulateResult simulate_to_files(const Scenario& scenario,
                                 const std::string& csv_path, int threads,
                                 bool write_sidecar) {
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t coarse = 0;
  const std::vector<CsvRow> rows = run_rows(scenario, threads, &coarse);
  std::string csv = kCsvHeader;
  for (const auto& row : rows) append_row(csv, row);

  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw Error("cannot write CSV file: " + csv_path);
    out << csv;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  SimulateResult result;
  result.n_rows = rows.size();
  result.digest = scenario_digest(scenario);
  result.wall_clock_seconds = wall;

  if (write_sidecar) {
    json record;
    record["schema_version"] = kSchemaVersion;
    record["tool_version"] = kToolVersion;
    record["scenario"] = json::parse(canonical_scenario_json(scenario));
    record["scenario_digest"] = result.digest;
    record["seed"] = scenario.seed;
    record["csv_path"] = csv_path;
    record["n_rows"] = result.n_rows;
    record["wall_clock_seconds"] = wall;
    record["coarse_rate_events"] = coarse;
    std::ofstream side(csv_path + ".run.json", std::ios::binary);
    if (!side) throw Error("cannot write run record: " + csv_path + ".run.json");
    side << record.dump(2) << '\n';
  }
  return result;
}

// --- verify -----------------------------------------------------------------

namespace {

VerifyItem item(std::string name, double dev, double tol) {
  return {std::move(name), dev, tol, dev <= tol};
}

VerifyReport verify_ideal(const Scenario& s) {
  const BlochRhs rhs = make_lindblad_rhs(s);
  BlochVector r = s.initial_bloch;
  double worst = 0.0;
  const std::size_t steps = s.n_steps > 0 ? s.n_steps : 1;
  for (std::size_t k = 1; k <= steps; ++k) {
    r = rk4_step(rhs, r, s.dt);
    const BlochVector exact = ideal_lindblad_solution(
        s.initial_bloch, s.gamma, s.dt * static_cast<double>(k));
    worst = std::max({worst, std::abs(r.x - exact.x), std::abs(r.y - exact.y),
                      std::abs(r.z - exact.z)});
  }
  VerifyReport report;
  report.items.push_back(item("ideal: rk4 vs closed form", worst, 1e-8));
  return report;
}

VerifyReport verify_detector_init(const Scenario& s,
                                  const DetectorInitModel& m) {
  const ErroneousChannelParams p(s.gamma, m.kappa, m.a, m.phi);
  const BlochRhs rhs = make_lindblad_rhs(s);
  VerifyReport report;

  // closed-form solution against RK4 on the scenario grid
  {
    BlochVector r = s.initial_bloch;
    double worst = 0.0;
    const std::size_t steps = s.n_steps > 0 ? s.n_steps : 1;
    for (std::size_t k = 1; k <= steps; ++k) {
      r = rk4_step(rhs, r, s.dt);
      const BlochVector exact = analytic_solution(
          s.initial_bloch, p, s.dt * static_cast<double>(k));
      worst = std::max({worst, std::abs(r.x - exact.x),
                        std::abs(r.y - exact.y), std::abs(r.z - exact.z)});
    }
    report.items.push_back(
        item("detector_init: analytic vs rk4 on grid", worst, 1e-6));
  }

  // long-time limit (gamma t = 100) against the stationary formula
  const StationaryState st = stationary_state(p);
  {
    const double t_long = 100.0 / s.gamma;
    const std::size_t steps = 20000;
    const BlochVector r =
        rk4_integrate(rhs, s.initial_bloch, t_long / steps, steps);
    const double dev =
        std::max({std::abs(r.x - st.bloch.x), std::abs(r.y - st.bloch.y),
                  std::abs(r.z - st.bloch.z)});
    report.items.push_back(
        item("detector_init: long-time vs stationary", dev, 1e-6));
  }
  {
    const BlochVector d = erroneous_rhs_bloch(st.bloch, p);
    report.items.push_back(item("detector_init: rhs at stationary",
                                std::max({std::abs(d.x), std::abs(d.y),
                                          std::abs(d.z)}),
                                1e-12));
  }
  if (p.kappa() > 0.0 && m.a != 0.5) {
    report.items.push_back(
        item("detector_init: ellipsoid residual",
             std::abs(ellipsoid_residual(st.bloch, m.a)), 1e-9));
  }
  return report;
}

bool is_symmetric_pair(const SteeringSet& set, double* p, double* theta) {
  if (set.size() != 2) return false;
  const auto& e = set.entries();
  if (std::abs(e[0].theta - e[1].theta) > 1e-12) return false;
  if (std::abs(e[0].phi) > 1e-12 || std::abs(e[1].phi - M_PI) > 1e-12) {
    return false;
  }
  *p = e[0].probability;
  *theta = e[0].theta;
  return true;
}

VerifyReport verify_directions(const Scenario& s, const DirectionsModel& m) {
  VerifyReport report;
  if (const auto* set = std::get_if<SteeringSet>(&m.directions)) {
    double p = 0.0, theta = 0.0;
    if (!is_symmetric_pair(*set, &p, &theta)) {
      throw NoOracleError(
          "directions: closed forms exist for the symmetric two-direction "
          "set {(theta,0;p),(theta,pi;1-p)} and for continuous uniform_arc / "
          "von_mises distributions");
    }
    const TwoDirStationary closed = two_dir_stationary(p, theta);
    const BlochRhs rhs = make_lindblad_rhs(s);
    const double t_long = 120.0 / s.gamma;
    const std::size_t steps = 24000;
    const BlochVector r =
        rk4_integrate(rhs, s.initial_bloch, t_long / steps, steps);
    const BlochVector cb = bloch_from_density(closed.state);
    report.items.push_back(item(
        "two_direction: long-time vs stationary formula",
        std::max({std::abs(r.x - cb.x), std::abs(r.y - cb.y),
                  std::abs(r.z - cb.z)}),
        1e-8));
    const Matrix2 resid = avg_lindblad_rhs(closed.state, *set, s.gamma);
    report.items.push_back(item("two_direction: rhs at stationary",
                                resid.max_abs(), 1e-12));
    if (p == 0.5) {
      const double d1 = 4.0 * std::sin(theta / 2.0) * std::sin(theta / 2.0) /
                        (3.0 + std::cos(2.0 * theta));
      report.items.push_back(item("two_direction: D1 closed form at p=1/2",
                                  std::abs(closed.exact.trace_distance - d1),
                                  1e-12));
    }
    return report;
  }
  // continuous: quadrature stationary fidelity against the closed form
  const auto* arc = std::get_if<UniformArc>(&m.directions);
  const DirectionDistribution dist =
      arc ? DirectionDistribution{*arc}
          : DirectionDistribution{std::get<VonMises>(m.directions)};
  const double closed_f = continuous_fidelity(dist);
  const BlochRhs rhs = make_lindblad_rhs(s);
  const double t_long = 120.0 / s.gamma;
  const std::size_t steps = 24000;
  const BlochVector r =
      rk4_integrate(rhs, s.initial_bloch, t_long / steps, steps);
  const double f_quad = 0.5 * (1.0 + r.z);
  report.items.push_back(item("continuous directions: quadrature vs closed F",
                              std::abs(f_quad - closed_f), 1e-8));
  return report;
}

VerifyReport verify_coupling(const Scenario& s, const CouplingModel& m) {
  // averaged flow is the ideal one at the effective rate
  const double rate = effective_rate(m.dist, s.dt);
  const BlochRhs rhs = make_lindblad_rhs(s);
  BlochVector r = s.initial_bloch;
  double worst = 0.0;
  const std::size_t steps = s.n_steps > 0 ? s.n_steps : 1;
  for (std::size_t k = 1; k <= steps; ++k) {
    r = rk4_step(rhs, r, s.dt);
    const BlochVector exact = ideal_lindblad_solution(
        s.initial_bloch, rate, s.dt * static_cast<double>(k));
    worst = std::max({worst, std::abs(r.x - exact.x), std::abs(r.y - exact.y),
                      std::abs(r.z - exact.z)});
  }
  VerifyReport report;
  report.items.push_back(
      item("coupling: flow vs rescaled ideal closed form", worst, 1e-8));
  return report;
}

VerifyReport verify_hamiltonian_noise(const Scenario& s,
                                      const HamiltonianNoiseModel& m) {
  VerifyReport report;
  const double g = s.gamma;
  const double gt = m.gamma_tilde;
  if (m.label == "sigma_z") {
    // coherences decay at (gamma + 4 gamma~)/2, populations at gamma
    const BlochRhs rhs = make_lindblad_rhs(s);
    BlochVector r = s.initial_bloch;
    double worst = 0.0;
    const std::size_t steps = s.n_steps > 0 ? s.n_steps : 1;
    for (std::size_t k = 1; k <= steps; ++k) {
      r = rk4_step(rhs, r, s.dt);
      const double t = s.dt * static_cast<double>(k);
      const double eh = std::exp(-0.5 * (g + 4.0 * gt) * t);
      const BlochVector exact{s.initial_bloch.x * eh, s.initial_bloch.y * eh,
                              1.0 - (1.0 - s.initial_bloch.z) *
                                        std::exp(-g * t)};
      worst = std::max({worst, std::abs(r.x - exact.x),
                        std::abs(r.y - exact.y), std::abs(r.z - exact.z)});
    }
    report.items.push_back(
        item("sigma_z noise: flow vs closed form", worst, 1e-8));
    return report;
  }
  if (m.label == "sigma_x") {
    const BlochRhs rhs = make_lindblad_rhs(s);
    const double t_long = 120.0 / g;
    const std::size_t steps = 24000;
    const BlochVector r =
        rk4_integrate(rhs, s.initial_bloch, t_long / steps, steps);
    const double z_exact = g / (g + 2.0 * gt);
    report.items.push_back(item("sigma_x noise: stationary z",
                                std::max({std::abs(r.x), std::abs(r.y),
                                          std::abs(r.z - z_exact)}),
                                1e-8));
    const auto [exact, leading] = stationary_quantifiers_sigma_x(g, gt);
    const DensityMatrix st(0.5 * (1.0 + z_exact), 0.0);
    const QuantifierTriple direct = target_metrics(st);
    const double dev = std::max(
        {std::abs(exact.fidelity - direct.fidelity),
         std::abs(exact.trace_distance - direct.trace_distance),
         std::abs(exact.linear_entropy - direct.linear_entropy)});
    report.items.push_back(
        item("sigma_x noise: quantifier formulas", dev, 1e-12));
    return report;
  }
  throw NoOracleError(
      "hamiltonian_noise: closed forms exist for G = sigma_z and G = sigma_x");
}

VerifyReport verify_measurement_basis(const Scenario& s,
                                      const MeasurementBasisModel& m) {
  VerifyReport report;
  const double coupling = std::sqrt(s.gamma / s.dt);
  const double dev = blind_equivalence_check(
      MeasurementBasisFamily::canonical_plus_hadamard(m.p1), coupling, s.dt,
      density_from_bloch(s.initial_bloch), 100);
  report.items.push_back(item("measurement_basis: blind equivalence", dev, 1e-12));
  // the averaged flow is the ideal one
  const BlochRhs rhs = make_lindblad_rhs(s);
  BlochVector r = s.initial_bloch;
  double worst = 0.0;
  const std::size_t steps = s.n_steps > 0 ? s.n_steps : 1;
  for (std::size_t k = 1; k <= steps; ++k) {
    r = rk4_step(rhs, r, s.dt);
    const BlochVector exact = ideal_lindblad_solution(
        s.initial_bloch, s.gamma, s.dt * static_cast<double>(k));
    worst = std::max({worst, std::abs(r.x - exact.x), std::abs(r.y - exact.y),
                      std::abs(r.z - exact.z)});
  }
  report.items.push_back(
      item("measurement_basis: averaged flow vs ideal", worst, 1e-8));
  return report;
}

}  // namespace

VerifyReport verify_scenario(const Scenario& scenario) {
  if (std::holds_alternative<IdealModel>(scenario.model)) {
    return verify_ideal(scenario);
  }
  if (const auto* m = std::get_if<DetectorInitModel>(&scenario.model)) {
    return verify_detector_init(scenario, *m);
  }
  if (const auto* m = std::get_if<DirectionsModel>(&scenario.model)) {
    return verify_directions(scenario, *m);
  }
  if (const auto* m = std::get_if<CouplingModel>(&scenario.model)) {
    return verify_coupling(scenario, *m);
  }
  if (const auto* m = std::get_if<HamiltonianNoiseModel>(&scenario.model)) {
    return verify_hamiltonian_noise(scenario, *m);
  }
  return verify_measurement_basis(
      scenario, std::get<MeasurementBasisModel>(scenario.model));
}

// --- sweep -------------------------------------------------------------------

namespace {

double range_value(const SweepRange& r, std::size_t i) {
  if (r.count == 1) return r.min;
  return r.min + (r.max - r.min) * static_cast<double>(i) /
                     static_cast<double>(r.count - 1);
}

QuantifierTriple eval_family(const SweepConfig& c, double v0, double v1) {
  auto get = [&](const std::string& name, double dflt) {
    for (std::size_t i = 0; i < c.ranges.size(); ++i) {
      if (c.ranges[i].parameter == name) return i == 0 ? v0 : v1;
    }
    const auto it = c.fixed.find(name);
    return it != c.fixed.end() ? it->second : dflt;
  };
  if (c.family == "two_direction") {
    return two_dir_stationary(get("p", 0.5), get("theta", 0.0)).exact;
  }
  if (c.family == "detector_init") {
    const ErroneousChannelParams p(c.gamma, get("kappa", 0.0), get("a", 1.0),
                                   get("phi", 0.0));
    return stationary_quantifiers(p, QuantifierMode::Exact);
  }
  if (c.family == "sigma_x_noise") {
    return stationary_quantifiers_sigma_x(c.gamma, get("gamma_tilde", 0.0))
        .first;
  }
  if (c.family == "uniform_arc") {
    DirectionDistribution d{UniformArc{get("theta_tilde", 0.1)}};
    const double f = continuous_fidelity(d);
    // stationary state lies on the z axis, so D1 and L follow from F
    const DensityMatrix st(f, 0.0);
    return target_metrics(st);
  }
  if (c.family == "von_mises") {
    DirectionDistribution d{VonMises{get("sigma", 0.1)}};
    const DensityMatrix st(continuous_fidelity(d), 0.0);
    return target_metrics(st);
  }
  throw ValidationError("unknown sweep family: " + c.family);
}

}  // namespace

SweepConfig parse_sweep(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("sweep config is not valid JSON: ") +
                          e.what());
  }
  if (!j.is_object() || !j.contains("sweep") || !j.at("sweep").is_object()) {
    throw ValidationError("sweep config must contain a 'sweep' object");
  }
  if (!j.contains("schema_version") ||
      j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ValidationError("sweep config field 'schema_version' must be " +
                          std::to_string(kSchemaVersion));
  }
  const json& sw = j.at("sweep");
  SweepConfig c;
  if (!sw.contains("family") || !sw.at("family").is_string()) {
    throw ValidationError("sweep config field 'family' is missing");
  }
  c.family = sw.at("family").get<std::string>();
  if (sw.contains("gamma")) c.gamma = sw.at("gamma").get<double>();
  if (sw.contains("fixed")) {
    if (!sw.at("fixed").is_object()) {
      throw ValidationError("sweep config field 'fixed' must be an object");
    }
    for (const auto& [name, value] : sw.at("fixed").items()) {
      if (!value.is_number()) {
        throw ValidationError("sweep fixed parameter '" + name +
                              "' must be a number");
      }
      c.fixed[name] = value.get<double>();
    }
  }
  if (!sw.contains("ranges") || !sw.at("ranges").is_object()) {
    throw ValidationError("sweep config field 'ranges' is missing");
  }
  for (const auto& [name, spec] : sw.at("ranges").items()) {
    SweepRange r;
    r.parameter = name;
    r.min = spec.at("min").get<double>();
    r.max = spec.at("max").get<double>();
    r.count = spec.at("count").get<std::size_t>();
    if (r.count < 1) throw ValidationError("range count must be >= 1");
    c.ranges.push_back(r);
  }
  if (c.ranges.empty()) {
    throw ValidationError("sweep needs at least one ranged parameter");
  }
  if (c.ranges.size() > 2) {
    throw ValidationError("sweep supports at most 2 ranged parameters, got " +
                          std::to_string(c.ranges.size()));
  }
  return c;
}

SweepConfig load_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open sweep config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sweep(buf.str());
}

std::string sweep_to_csv(const SweepConfig& config) {
  std::string out;
  out += config.ranges[0].parameter;
  if (config.ranges.size() == 2) {
    out += ',';
    out += config.ranges[1].parameter;
  }
  out += ",F,D1,L\n";
  const std::size_t n0 = config.ranges[0].count;
  const std::size_t n1 =
      config.ranges.size() == 2 ? config.ranges[1].count : 1;
  for (std::size_t i = 0; i < n0; ++i) {
    const double v0 = range_value(config.ranges[0], i);
    for (std::size_t k = 0; k < n1; ++k) {
      const double v1 = config.ranges.size() == 2
                            ? range_value(config.ranges[1], k)
                            : 0.0;
      const QuantifierTriple q = eval_family(config, v0, v1);
      out += format17(v0);
      if (config.ranges.size() == 2) {
        out += ',';
        out += format17(v1);
      }
      out += ',';
      out += format17(q.fidelity);
      out += ',';
      out += format17(q.trace_distance);
      out += ',';
      out += format17(q.linear_entropy);
      out += '\n';
    }
  }
  return out;
}

std::size_t sweep_to_file(const SweepConfig& config,
                          const std::string& csv_path) {
  const std::string csv = sweep_to_csv(config);
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error("cannot write CSV file: " + csv_path);
  out << csv;
  std::size_t rows = 0;
  for (char ch : csv) {
    if (ch == '\n') ++rows;
  }
  return rows - 1;
}

}  // namespace qsteer
