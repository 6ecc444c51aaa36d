#include <doctest.h>

#include <cmath>
#include <vector>

#include "qsteer/direction_errors.hpp"
#include "qsteer/quantifiers.hpp"
#include "support/oracles.hpp"

using namespace qsteer;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const BlochVector kR0{1.0 / kSqrt2, 0.0, -1.0 / kSqrt2};

SteeringSet erre_set() { return SteeringSet::symmetric_pair(M_PI / 3.0, 0.5); }

oracle::Rhs3 avg_rhs(const SteeringSet& set, double gamma) {
  auto prep = std::make_shared<PreparedSteeringSet>(set);
  return [prep, gamma](const oracle::Vec3& r) -> oracle::Vec3 {
    const Matrix2 d = avg_lindblad_rhs(
        density_from_bloch({r[0], r[1], r[2]}), *prep, gamma);
    return {2.0 * d.m01.real(), -2.0 * d.m01.imag(), 2.0 * d.m00.real()};
  };
}

}  // namespace

TEST_CASE("steering set validation") {
  CHECK_THROWS_AS(SteeringSet({{0.1, 0.0, 0.5}, {0.2, 0.0, 0.6}}),
                  ValidationError);
  CHECK_THROWS_AS(SteeringSet({{0.1, 0.0, -0.5}, {0.2, 0.0, 1.5}}),
                  ValidationError);
  CHECK_THROWS_AS(SteeringSet({{4.0, 0.0, 1.0}}), ValidationError);
  CHECK_NOTHROW(erre_set());
}

TEST_CASE("single ideal direction reduces every stepper to the ideal one") {
  const SteeringSet ideal({{0.0, 0.0, 1.0}});
  const PreparedSteeringSet prep(ideal);
  const double gamma = 0.1, dt = 0.01;
  RngStream s1(70, 0), s2(70, 0);
  DensityMatrix a = density_from_bloch(kR0);
  DensityMatrix b = a;
  for (int k = 0; k < 2000; ++k) {
    a = full_step(a, prep, gamma, dt, s1);
    // full_step consumes one direction draw + one jump draw; replay by hand
    (void)s2.next_uniform();
    b = wm_jump_step(b, gamma, dt, s2);
    CHECK(std::abs(a.zeta() - b.zeta()) <= 1e-14);
    CHECK(std::abs(a.chi() - b.chi()) <= 1e-14);
  }
}

TEST_CASE("full_step preserves purity and jumps onto rotated targets") {
  const PreparedSteeringSet prep(erre_set());
  RngStream stream(71, 0);
  DensityMatrix w = density_from_bloch(kR0);
  const Ket2 t0 = rotation(RotationAngles(M_PI / 3.0, 0.0)) * ket_up();
  const Ket2 t1 = rotation(RotationAngles(M_PI / 3.0, M_PI)) * ket_up();
  int jumps = 0;
  for (int k = 0; k < 40000; ++k) {
    const DensityMatrix prev = w;
    w = full_step(w, prep, 0.1, 0.01, stream);
    CHECK(linear_entropy(w) <= 1e-10);
    const double move =
        (bloch_from_density(w) - bloch_from_density(prev)).norm();
    if (move > 0.3) {
      // jump: posterior is one of the two rotated targets
      const double f0 = fidelity(w, pure_state(t0));
      const double f1 = fidelity(w, pure_state(t1));
      CHECK(std::max(f0, f1) >= 1.0 - 1e-10);
      ++jumps;
    }
  }
  CHECK(jumps > 0);
}

TEST_CASE("fully averaged Lindbladian: closed forms for the running example") {
  const double gamma = 0.1;

  SUBCASE("t = 0 value is consistent with the initial state") {
    // 9/10 - (8 + 5 sqrt2)/20 = (1 - 1/sqrt2)/2
    const DensityMatrix at0 = two_dir_solution(gamma, 0.0);
    CHECK(at0.zeta() ==
          doctest::Approx((1.0 - 1.0 / kSqrt2) / 2.0).epsilon(1e-14));
    CHECK(at0.chi().real() ==
          doctest::Approx(1.0 / (2.0 * kSqrt2)).epsilon(1e-14));
  }
  SUBCASE("long-time population is 0.9") {
    CHECK(two_dir_solution(gamma, 1e5).zeta() ==
          doctest::Approx(0.9).epsilon(1e-12));
  }
  SUBCASE("independent RK4 of the averaged generator tracks the closed form") {
    const auto rhs = avg_rhs(erre_set(), gamma);
    oracle::Vec3 r{kR0.x, kR0.y, kR0.z};
    const double dt = 1e-3;
    double t = 0.0;
    for (int leg = 0; leg < 60; ++leg) {
      r = oracle::rk4(rhs, r, dt, 500);
      t += 0.5;
      const DensityMatrix closed = two_dir_solution(gamma, t);
      CHECK(std::abs(0.5 * (1.0 + r[2]) - closed.zeta()) <= 1e-9);
      CHECK(std::abs(0.5 * r[0] - closed.chi().real()) <= 1e-9);
      CHECK(std::abs(r[1]) <= 1e-12);
    }
  }
}

TEST_CASE("deterministic fixed point") {
  SUBCASE("single ideal direction gives the north pole") {
    const BlochVector r = det_fixed_point(SteeringSet({{0.0, 0.0, 1.0}}));
    CHECK(r.x == doctest::Approx(0.0));
    CHECK(r.z == doctest::Approx(1.0));
  }
  SUBCASE("symmetric pair cancels azimuthally") {
    const BlochVector r = det_fixed_point(erre_set());
    CHECK(std::abs(r.x) <= 1e-14);
    CHECK(std::abs(r.y) <= 1e-14);
    CHECK(r.z == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("x-axis target direction") {
    const BlochVector r = det_fixed_point(SteeringSet({{M_PI / 2.0, 0.0, 1.0}}));
    CHECK(r.x == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(r.z) <= 1e-14);
  }
  SUBCASE("drift of the no-click flow vanishes there") {
    RngStream stream(72, 0);
    for (int i = 0; i < 20; ++i) {
      const double th = stream.next_uniform() * M_PI * 0.9;
      const double p = stream.next_uniform();
      SteeringSet set({{th, 0.0, p}, {th * 0.7, 2.0, 1.0 - p}});
      const PreparedSteeringSet prep(set);
      const BlochVector rinf = det_fixed_point(prep);
      // deterministic drift: -(gamma/2){P - <P>, w} at w = fixed point
      const DensityMatrix w = density_from_bloch(rinf);
      const Matrix2 pbar = prep.mean_udag_u();
      const double expect = (pbar * w.matrix()).trace().real();
      const Matrix2 drift =
          -0.5 * (anticommutator(pbar, w.matrix()) -
                  2.0 * expect * w.matrix());
      CHECK(drift.max_abs() <= 1e-12);
    }
  }
  SUBCASE("isotropic set has no unique fixed point") {
    // three symmetric directions at the magic angle wipe out the traceless part
    const double th = std::acos(-1.0 / 3.0);
    CHECK_THROWS_AS(
        det_fixed_point(SteeringSet({{0.0, 0.0, 0.25},
                                     {th, 0.0, 0.25},
                                     {th, 2.0 * M_PI / 3.0, 0.25},
                                     {th, 4.0 * M_PI / 3.0, 0.25}})),
        ValidationError);
  }
}

TEST_CASE("dir_avg_step: clicks mix, no-click flow approaches the fixed point") {
  const PreparedSteeringSet prep(erre_set());
  RngStream stream(73, 0);

  SUBCASE("a click from a pure state on the arc is mixed") {
    const DensityMatrix pure = density_from_bloch(kR0);
    bool saw_click = false;
    for (int k = 0; k < 200000 && !saw_click; ++k) {
      const DensityMatrix next = dir_avg_step(pure, prep, 0.1, 0.01, stream);
      if (std::abs(next.zeta() - pure.zeta()) > 0.05) {
        saw_click = true;
        CHECK(linear_entropy(next) > 0.05);
      }
    }
    CHECK(saw_click);
  }

  SUBCASE("no-click evolution converges monotonically to the fixed point") {
    RngStream gen(74, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const double th = 0.2 + 2.4 * gen.next_uniform();
      const double ph = 6.0 * gen.next_uniform();
      const double p = gen.next_uniform();
      SteeringSet set({{th, 0.0, p}, {th * 0.5, ph, 1.0 - p}});
      const PreparedSteeringSet ps(set);
      const BlochVector rinf = det_fixed_point(ps);
      // forcing dN = 0: apply the no-click Kraus directly
      DensityMatrix w = density_from_bloch(
          bloch_from_density(oracle::random_state(gen, true)));
      double dist = (bloch_from_density(w) - rinf).norm();
      for (int k = 0; k < 40000; ++k) {
        const Matrix2 kk =
            identity2() - (0.5 * 0.5 * 0.01) * ps.mean_udag_u();
        w = DensityMatrix::normalized_from_matrix(kk * w.matrix() *
                                                  kk.adjoint());
        if (k % 400 == 0) {
          const double d2 = (bloch_from_density(w) - rinf).norm();
          CHECK(d2 <= dist + 1e-9);
          dist = d2;
        }
      }
      CHECK(dist <= 1e-3);
    }
  }
}

TEST_CASE("click_avg_step mixes pure states immediately") {
  const PreparedSteeringSet prep(erre_set());
  RngStream stream(75, 0);
  const DensityMatrix pure = density_from_bloch(kR0);
  const DensityMatrix next = click_avg_step(pure, prep, 0.1, 0.01, stream);
  CHECK(linear_entropy(next) > 0.0);

  SUBCASE("single ideal direction is the deterministic Euler step") {
    const PreparedSteeringSet ideal(SteeringSet({{0.0, 0.0, 1.0}}));
    const DensityMatrix got = click_avg_step(pure, ideal, 0.1, 0.01, stream);
    const Matrix2 expect =
        pure.matrix() + 0.01 * 0.1 * dissipator(sigma_plus(), pure.matrix());
    CHECK(frobenius_distance(got.matrix(), expect) <= 1e-13);
  }
}

TEST_CASE("hierarchy ensemble means agree with the averaged Lindblad flow") {
  const double gamma = 0.1, dt = 0.01;
  const std::size_t n = 3000;
  const TimeGrid grid(dt, 1200);
  const DensityMatrix init = density_from_bloch(kR0);
  auto prep = std::make_shared<PreparedSteeringSet>(erre_set());

  auto run = [&](StepFn fn) {
    return run_ensemble(fn, init, grid, n, 777);
  };
  const EnsembleStats full = run([&](const DensityMatrix& w, RngStream& s) {
    return full_step(w, *prep, gamma, dt, s);
  });
  const EnsembleStats davg = run([&](const DensityMatrix& w, RngStream& s) {
    return dir_avg_step(w, *prep, gamma, dt, s);
  });
  const EnsembleStats cavg = run([&](const DensityMatrix& w, RngStream& s) {
    return click_avg_step(w, *prep, gamma, dt, s);
  });

  std::size_t bad = 0;
  for (std::size_t k = 0; k < full.n_points(); ++k) {
    const DensityMatrix closed = two_dir_solution(gamma, full.t[k]);
    const double z_exact = 2.0 * closed.zeta() - 1.0;
    const double x_exact = 2.0 * closed.chi().real();
    for (const EnsembleStats* st : {&full, &davg, &cavg}) {
      if (std::abs(st->mean_bloch[k].z - z_exact) >
          3.0 * st->stderr_bloch[k].z + 1e-8) {
        ++bad;
      }
      if (std::abs(st->mean_bloch[k].x - x_exact) >
          3.0 * st->stderr_bloch[k].x + 1e-8) {
        ++bad;
      }
    }
    // pairwise agreement within combined 3 SE
    auto comb = [&](double se1, double se2) {
      return 3.0 * std::sqrt(se1 * se1 + se2 * se2) + 1e-8;
    };
    if (std::abs(full.mean_bloch[k].z - davg.mean_bloch[k].z) >
        comb(full.stderr_bloch[k].z, davg.stderr_bloch[k].z)) {
      ++bad;
    }
    if (std::abs(full.mean_bloch[k].z - cavg.mean_bloch[k].z) >
        comb(full.stderr_bloch[k].z, cavg.stderr_bloch[k].z)) {
      ++bad;
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("multi-white-noise model reproduces the direction-averaged SME") {
  const double gamma = 0.1, dt = 0.01;
  auto prep = std::make_shared<PreparedSteeringSet>(erre_set());
  RngStream stream(76, 0);

  SUBCASE("click posterior is the probability-weighted mixture") {
    const DensityMatrix w = density_from_bloch(kR0);
    bool saw = false;
    for (int k = 0; k < 100000 && !saw; ++k) {
      const MultiNoiseStepResult r =
          multi_noise_step(w, *prep, gamma, dt, stream);
      if (r.outcome == MeasurementOutcome::Click) {
        saw = true;
        Matrix2 expect{};
        for (std::size_t i = 0; i < prep->size(); ++i) {
          expect += prep->probabilities()[i] *
                    (prep->u(i) * w.matrix() * prep->u(i).adjoint());
        }
        const DensityMatrix expect_dm =
            DensityMatrix::normalized_from_matrix(expect);
        CHECK(std::abs(r.posterior.zeta() - expect_dm.zeta()) <= 1e-13);
        CHECK(std::abs(r.posterior.chi() - expect_dm.chi()) <= 1e-13);
      }
    }
    CHECK(saw);
  }

  SUBCASE("single direction reduces to the ideal branches") {
    const PreparedSteeringSet ideal(SteeringSet({{0.0, 0.0, 1.0}}));
    RngStream s1(77, 1), s2(77, 1);
    DensityMatrix a = density_from_bloch(kR0);
    DensityMatrix b = a;
    for (int k = 0; k < 1000; ++k) {
      a = multi_noise_step(a, ideal, gamma, dt, s1).posterior;
      b = dir_avg_step(b, ideal, gamma, dt, s2);
      CHECK(std::abs(a.zeta() - b.zeta()) <= 1e-14);
    }
  }

  SUBCASE("ensemble mean matches dir_avg_step within 3 SE") {
    const TimeGrid grid(dt, 600);
    const DensityMatrix init = density_from_bloch(kR0);
    const EnsembleStats mn = run_ensemble(
        [&](const DensityMatrix& w, RngStream& s) {
          return multi_noise_step(w, *prep, gamma, dt, s).posterior;
        },
        init, grid, 2000, 42);
    const EnsembleStats da = run_ensemble(
        [&](const DensityMatrix& w, RngStream& s) {
          return dir_avg_step(w, *prep, gamma, dt, s);
        },
        init, grid, 2000, 43);
    std::size_t bad = 0;
    for (std::size_t k = 0; k < mn.n_points(); ++k) {
      const double se = 3.0 * std::sqrt(mn.stderr_bloch[k].z * mn.stderr_bloch[k].z +
                                        da.stderr_bloch[k].z * da.stderr_bloch[k].z);
      if (std::abs(mn.mean_bloch[k].z - da.mean_bloch[k].z) > se + 1e-9) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("two-direction stationary closed forms") {
  SUBCASE("theta = 0 is the unperturbed target") {
    const TwoDirStationary st = two_dir_stationary(0.7, 0.0);
    CHECK(st.exact.fidelity == doctest::Approx(1.0));
    CHECK(st.exact.trace_distance == doctest::Approx(0.0));
  }
  SUBCASE("(p=1/2, theta=pi/3) reference values") {
    const TwoDirStationary st = two_dir_stationary(0.5, M_PI / 3.0);
    CHECK(st.state.zeta() == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(std::abs(st.state.chi()) <= 1e-15);
    CHECK(st.exact.fidelity == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(st.exact.trace_distance == doctest::Approx(0.4).epsilon(1e-13));
  }
  SUBCASE("rhs of the averaged Lindbladian vanishes at the formula state") {
    RngStream stream(78, 0);
    for (int i = 0; i < 40; ++i) {
      const double p = stream.next_uniform();
      const double th = stream.next_uniform() * M_PI * 0.95;
      const TwoDirStationary st = two_dir_stationary(p, th);
      const Matrix2 resid = avg_lindblad_rhs(
          st.state, SteeringSet::symmetric_pair(th, p), 1.0);
      CHECK(resid.max_abs() <= 1e-12);
    }
  }
  SUBCASE("D1 closed form at p = 1/2 and its maximum impurity") {
    const double th = M_PI / 3.0;
    CHECK(two_dir_stationary(0.5, th).exact.trace_distance ==
          doctest::Approx(4.0 * std::sin(th / 2) * std::sin(th / 2) /
                          (3.0 + std::cos(2.0 * th)))
              .epsilon(1e-13));
    CHECK(two_dir_stationary(0.5, M_PI / 2.0).exact.linear_entropy ==
          doctest::Approx(0.5).epsilon(1e-13));
  }
  SUBCASE("series truncations track the exact values for small theta") {
    for (const double p : {0.5, 0.3, 0.85}) {
      for (const double th : {0.02, 0.05, 0.1}) {
        const TwoDirStationary st = two_dir_stationary(p, th);
        CHECK(std::abs(st.exact.fidelity - st.series.fidelity) <=
              1e-4 * std::max(1e-6, th * th));
        CHECK(std::abs(st.exact.trace_distance - st.series.trace_distance) <=
              1e-6);
        CHECK(std::abs(st.exact.linear_entropy - st.series.linear_entropy) <=
              1e-8);
      }
    }
  }
  SUBCASE("parity: leading exponent is 4 at p=1/2 and 1 at p=0.3") {
    std::vector<double> lx, ly_half, ly_p3;
    for (double th = 1e-2; th <= 1e-1; th *= 1.2) {
      lx.push_back(std::log(th));
      ly_half.push_back(std::log(
          two_dir_stationary(0.5, th).exact.trace_distance));
      ly_p3.push_back(std::log(
          two_dir_stationary(0.3, th).exact.trace_distance));
    }
    const double slope_half = oracle::fit_slope(lx, ly_half);
    const double slope_p3 = oracle::fit_slope(lx, ly_p3);
    CHECK(std::abs(slope_half - 4.0) <= 0.1);
    CHECK(std::abs(slope_p3 - 1.0) <= 0.05);
    // evenness in theta
    CHECK(two_dir_stationary(0.5, 0.3).exact.trace_distance ==
          doctest::Approx(two_dir_stationary(0.5, -0.3).exact.trace_distance)
              .epsilon(1e-14));
  }
}

TEST_CASE("continuous direction distributions") {
  SUBCASE("uniform arc closed form") {
    CHECK(continuous_fidelity({UniformArc{M_PI / 2.0}}) ==
          doctest::Approx(0.5 + 4.0 / (3.0 * M_PI)).epsilon(1e-14));
    // theta~ -> 0 recovers perfect steering
    CHECK(continuous_fidelity({UniformArc{1e-6}}) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("von Mises closed form and small-sigma series") {
    for (const double sigma : {0.05, 0.02, 0.005, 1e-4}) {
      const double f = continuous_fidelity({VonMises{sigma}});
      const double series = 1.0 - 3.0 / 16.0 * std::pow(sigma, 4);
      CHECK(std::abs(f - series) <= 1e-8 * std::max(1.0, sigma));
    }
    // no overflow deep in the concentrated regime
    CHECK(std::isfinite(continuous_fidelity({VonMises{1e-6}})));
  }
  SUBCASE("bessel ratio is continuous across evaluation strategies") {
    for (const double x : {49.9, 50.1, 9.9e5, 1.1e6}) {
      const double r = bessel_i0_over_i1(x);
      const double asym = 1.0 + 0.5 / x + 0.375 / (x * x);
      CHECK(std::abs(r - asym) <= 1e-6 / x);
    }
  }
  SUBCASE("quadrature generator reproduces the closed-form fidelity") {
    for (const double tt : {0.2, 0.8, M_PI / 2.0}) {
      const DirectionDistribution dist{UniformArc{tt}};
      const auto rhs = [&](const oracle::Vec3& r) -> oracle::Vec3 {
        const Matrix2 d = continuous_lindblad_rhs(
            density_from_bloch({r[0], r[1], r[2]}), dist, 1.0);
        return {2.0 * d.m01.real(), -2.0 * d.m01.imag(), 2.0 * d.m00.real()};
      };
      const oracle::Vec3 r = oracle::rk4(rhs, {0.4, 0.1, -0.5}, 2e-3, 30000);
      CHECK(std::abs(0.5 * (1.0 + r[2]) - continuous_fidelity(dist)) <= 1e-9);
    }
    for (const double sigma : {0.5, 0.2}) {
      const DirectionDistribution dist{VonMises{sigma}};
      const auto rhs = [&](const oracle::Vec3& r) -> oracle::Vec3 {
        const Matrix2 d = continuous_lindblad_rhs(
            density_from_bloch({r[0], r[1], r[2]}), dist, 1.0);
        return {2.0 * d.m01.real(), -2.0 * d.m01.imag(), 2.0 * d.m00.real()};
      };
      const oracle::Vec3 r = oracle::rk4(rhs, {0.4, 0.1, -0.5}, 2e-3, 30000);
      CHECK(std::abs(0.5 * (1.0 + r[2]) - continuous_fidelity(dist)) <= 1e-8);
    }
  }
}
