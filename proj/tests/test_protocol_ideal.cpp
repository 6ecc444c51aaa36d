#include <doctest.h>

#include <cmath>

#include "qsteer/protocol_ideal.hpp"
#include "qsteer/quantifiers.hpp"
#include "support/oracles.hpp"

using namespace qsteer;

TEST_CASE("kraus pair reference points") {
  SUBCASE("zero coupling gives (I, 0)") {
    const KrausPair k = kraus_pair(0.0, 0.1);
    CHECK(frobenius_distance(k.m0, identity2()) == 0.0);
    CHECK(k.m1.max_abs() == 0.0);
  }
  SUBCASE("J dt = pi/2 gives projector and raising operator") {
    const KrausPair k = kraus_pair(M_PI / 2.0, 1.0);
    CHECK(frobenius_distance(k.m0, ket_up().projector()) <= 1e-15);
    CHECK(frobenius_distance(k.m1, sigma_plus()) <= 1e-15);
  }
  SUBCASE("J dt = pi gives the sigma_z gate") {
    const KrausPair k = kraus_pair(M_PI, 1.0);
    CHECK(frobenius_distance(k.m0, sigma_z()) <= 1e-15);
    CHECK(k.m1.max_abs() <= 1e-15);
  }
}

TEST_CASE("kraus completeness for random couplings") {
  RngStream stream(21, 0);
  for (int i = 0; i < 100; ++i) {
    const double j = 10.0 * stream.next_uniform();
    const double dt = stream.next_uniform_open();
    const KrausPair k = kraus_pair(j, dt);
    const Matrix2 sum = k.m0.adjoint() * k.m0 + k.m1.adjoint() * k.m1;
    CHECK(frobenius_distance(sum, identity2()) <= 1e-12);
  }
}

TEST_CASE("coupling classification") {
  CHECK(classify_coupling(2.0 * M_PI, 1.0) == CouplingClass::PiMultiple);
  CHECK(classify_coupling(1.5 * M_PI, 1.0) == CouplingClass::HalfPiOddMultiple);
  CHECK(classify_coupling(0.1, 1.0) == CouplingClass::Valid);
  CHECK(classify_coupling(0.0, 1.0) == CouplingClass::PiMultiple);
  // tolerance window 1e-9 on J dt
  CHECK(classify_coupling(M_PI + 0.5e-9, 1.0) == CouplingClass::PiMultiple);
  CHECK(classify_coupling(M_PI + 1e-7, 1.0) == CouplingClass::Valid);
}

TEST_CASE("protocol params fix J^2 dt = gamma") {
  const ProtocolParams p(0.1, 0.01);
  CHECK(p.coupling() * p.coupling() * p.dt() ==
        doctest::Approx(0.1).epsilon(1e-14));
  CHECK_THROWS_AS(ProtocolParams(0.0, 0.1), ValidationError);
  CHECK_THROWS_AS(ProtocolParams(0.1, 0.0), ValidationError);
}

TEST_CASE("blind discrete step") {
  const ProtocolParams p(0.1, 0.01);

  SUBCASE("target state is dark") {
    const DiscreteStepResult r = discrete_step(target_state(), p, nullptr);
    CHECK(r.outcome == MeasurementOutcome::Blind);
    CHECK(std::abs(r.posterior.zeta() - 1.0) <= 1e-15);
    CHECK(std::abs(r.posterior.chi()) <= 1e-15);
  }

  SUBCASE("Bloch update matches the closed-form map") {
    RngStream stream(31, 0);
    for (int i = 0; i < 50; ++i) {
      const DensityMatrix rho = oracle::random_state(stream);
      const BlochVector r = bloch_from_density(rho);
      const double c = std::cos(p.coupling() * p.dt());
      const BlochVector expect{c * r.x, c * r.y,
                               1.0 - c * c * (1.0 - r.z)};
      const BlochVector got =
          bloch_from_density(discrete_step(rho, p, nullptr).posterior);
      CHECK(std::abs(got.x - expect.x) <= 1e-14);
      CHECK(std::abs(got.y - expect.y) <= 1e-14);
      CHECK(std::abs(got.z - expect.z) <= 1e-14);
    }
  }

  SUBCASE("iterated blind map is monotone in fidelity") {
    DensityMatrix rho = density_from_bloch({0.8, -0.2, -0.5});
    double f = fidelity(target_state(), rho);
    for (int k = 0; k < 400; ++k) {
      rho = discrete_step(rho, p, nullptr).posterior;
      const double f2 = fidelity(target_state(), rho);
      CHECK(f2 >= f - 1e-14);
      f = f2;
    }
    CHECK(f > 0.9);
  }
}

TEST_CASE("stochastic discrete step") {
  const ProtocolParams p(0.5, 0.01);
  RngStream stream(32, 0);
  int clicks = 0;
  for (int i = 0; i < 4000; ++i) {
    const DensityMatrix rho = density_from_bloch({0.0, 0.0, -0.8});
    const DiscreteStepResult r = discrete_step(rho, p, &stream);
    if (r.outcome == MeasurementOutcome::Click) {
      ++clicks;
      // a click projects straight onto the target
      CHECK(r.posterior.zeta() == 1.0);
      CHECK(std::abs(r.posterior.chi()) == 0.0);
    }
  }
  // P(click) = sin^2(J dt)(1 - zeta) = sin^2(sqrt(gamma dt)) * 0.9
  const double s = std::sin(std::sqrt(0.5 * 0.01));
  const double expect = s * s * 0.9;
  const double sigma = std::sqrt(expect * (1.0 - expect) / 4000.0);
  CHECK(std::abs(clicks / 4000.0 - expect) <= 3.5 * sigma);
}

TEST_CASE("wm jump step branches") {
  RngStream stream(33, 0);

  SUBCASE("dark target never clicks and never moves") {
    DensityMatrix w = target_state();
    for (int k = 0; k < 1000; ++k) {
      w = wm_jump_step(w, 0.1, 0.01, stream);
    }
    CHECK(std::abs(w.zeta() - 1.0) <= 1e-12);
  }

  SUBCASE("click from the south pole lands on the target") {
    // from |down><down| the click rate is gamma dt; force one by scanning
    const DensityMatrix south = density_from_bloch({0.0, 0.0, -1.0});
    bool clicked = false;
    for (int k = 0; k < 20000 && !clicked; ++k) {
      const DensityMatrix next = wm_jump_step(south, 0.1, 0.01, stream);
      if (next.zeta() > 0.5) {
        clicked = true;
        CHECK(std::abs(next.zeta() - 1.0) <= 1e-14);
      }
    }
    CHECK(clicked);
  }

  SUBCASE("pure states stay pure") {
    DensityMatrix w =
        density_from_bloch({1.0 / std::sqrt(2.0), 0.0, -1.0 / std::sqrt(2.0)});
    for (int k = 0; k < 5000; ++k) {
      w = wm_jump_step(w, 0.1, 0.01, stream);
      CHECK(linear_entropy(w) <= 1e-10);
    }
  }
}

TEST_CASE("ideal lindblad solution") {
  SUBCASE("stationary limit is the target") {
    const BlochVector r = ideal_lindblad_solution({0.3, 0.3, -0.5}, 0.1, 1e4);
    CHECK(std::abs(r.x) <= 1e-12);
    CHECK(std::abs(r.z - 1.0) <= 1e-12);
  }
  SUBCASE("target is a fixed point") {
    const BlochVector r = ideal_lindblad_solution({0.0, 0.0, 1.0}, 0.1, 7.7);
    CHECK(r.x == 0.0);
    CHECK(r.z == 1.0);
  }
  SUBCASE("explicit point from direct substitution") {
    const double s = 1.0 / std::sqrt(3.0);
    const BlochVector r = ideal_lindblad_solution({s, s, -s}, 0.1, 10.0);
    const double eh = std::exp(-0.5);
    CHECK(r.x == doctest::Approx(s * eh).epsilon(1e-14));
    CHECK(r.y == doctest::Approx(s * eh).epsilon(1e-14));
    CHECK(r.z ==
          doctest::Approx(1.0 - (1.0 + s) * std::exp(-1.0)).epsilon(1e-14));
  }
  SUBCASE("rhs generates the solution (independent RK4)") {
    const oracle::Vec3 r0{0.4, -0.3, 0.2};
    const auto rhs = [](const oracle::Vec3& r) -> oracle::Vec3 {
      const Matrix2 d = ideal_lindblad_rhs(
          density_from_bloch({r[0], r[1], r[2]}), 0.1);
      return {2.0 * d.m01.real(), -2.0 * d.m01.imag(), 2.0 * d.m00.real()};
    };
    const oracle::Vec3 num = oracle::rk4(rhs, r0, 1e-3, 5000);
    const BlochVector exact =
        ideal_lindblad_solution({r0[0], r0[1], r0[2]}, 0.1, 5.0);
    CHECK(std::abs(num[0] - exact.x) <= 1e-10);
    CHECK(std::abs(num[1] - exact.y) <= 1e-10);
    CHECK(std::abs(num[2] - exact.z) <= 1e-10);
  }
}

TEST_CASE("ensemble mean of wm jumps matches the ideal flow") {
  const double gamma = 0.1, dt = 0.01;
  const TimeGrid grid(dt, 800);
  const DensityMatrix init =
      density_from_bloch({1.0 / std::sqrt(2.0), 0.0, -1.0 / std::sqrt(2.0)});
  const EnsembleStats stats = run_ensemble(
      [gamma, dt](const DensityMatrix& w, RngStream& s) {
        return wm_jump_step(w, gamma, dt, s);
      },
      init, grid, 3000, 7);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < stats.n_points(); ++k) {
    const BlochVector exact =
        ideal_lindblad_solution(bloch_from_density(init), gamma, stats.t[k]);
    if (std::abs(stats.mean_bloch[k].z - exact.z) >
        3.0 * stats.stderr_bloch[k].z + 2e-9) {
      ++bad;
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("discrete blind map converges to the Lindblad flow at O(dt)") {
  // fixed t, shrinking dt: error should drop linearly
  const double gamma = 0.2, t = 6.0;
  const BlochVector r0{0.5, -0.4, -0.2};
  std::vector<double> errs;
  for (const double dt : {0.1, 0.05, 0.025}) {
    DensityMatrix rho = density_from_bloch(r0);
    const ProtocolParams p(gamma, dt);
    const std::size_t steps = static_cast<std::size_t>(std::round(t / dt));
    for (std::size_t k = 0; k < steps; ++k) {
      rho = discrete_step(rho, p, nullptr).posterior;
    }
    const BlochVector exact = ideal_lindblad_solution(r0, gamma, t);
    const BlochVector got = bloch_from_density(rho);
    errs.push_back(std::max({std::abs(got.x - exact.x),
                             std::abs(got.y - exact.y),
                             std::abs(got.z - exact.z)}));
  }
  CHECK(errs[0] / errs[1] == doctest::Approx(2.0).epsilon(0.2));
  CHECK(errs[1] / errs[2] == doctest::Approx(2.0).epsilon(0.2));
}
