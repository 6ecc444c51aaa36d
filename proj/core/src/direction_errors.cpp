#include "qsteer/direction_errors.hpp"

#include <array>
#include <cmath>

namespace qsteer {

SteeringSet::SteeringSet(std::vector<SteeringDirection> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("steering set is empty");
  double total = 0.0;
  for (const auto& e : entries_) {
    RotationAngles angles(e.theta, e.phi);  // range check
    (void)angles;
    if (!(e.probability >= 0.0)) {
      throw ValidationError("steering probabilities must be >= 0");
    }
    total += e.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("steering probabilities sum to " +
                          std::to_string(total) + ", expected 1");
  }
}

SteeringSet SteeringSet::symmetric_pair(double theta, double p) {
  return SteeringSet({{theta, 0.0, p}, {theta, M_PI, 1.0 - p}});
}

PreparedSteeringSet::PreparedSteeringSet(const SteeringSet& set) {
  const Matrix2 base = sigma_plus();
  mean_udag_u_ = Matrix2{};
  for (const auto& e : set.entries()) {
    const Matrix2 u = rotated_jump(RotationAngles(e.theta, e.phi), base);
    probs_.push_back(e.probability);
    u_.push_back(u);
    udag_u_.push_back(u.adjoint() * u);
    mean_udag_u_ += e.probability * udag_u_.back();
  }
}

DensityMatrix full_step(const DensityMatrix& omega,
                        const PreparedSteeringSet& set, double gamma,
                        double dt, RngStream& stream) {
  const std::size_t i = sample_categorical(stream, set.probabilities());
  return jump_sme_step(omega, set.u(i), set.udag_u(i), gamma, dt, stream);
}

DensityMatrix dir_avg_step(const DensityMatrix& pi_s,
                           const PreparedSteeringSet& set, double gamma,
                           double dt, RngStream& stream) {
  const Matrix2 w = pi_s.matrix();
  const double expect = (set.mean_udag_u() * w).trace().real();
  if (sample_jump(stream, std::max(0.0, gamma * expect * dt)) == 1) {
    if (expect <= 0.0) {
      throw NumericalError("click sampled with vanishing mean rate");
    }
    Matrix2 post{};
    for (std::size_t i = 0; i < set.size(); ++i) {
      post += set.probabilities()[i] * (set.u(i) * w * set.u(i).adjoint());
    }
    return DensityMatrix::normalized_from_matrix(post);
  }
  const Matrix2 k = identity2() - (0.5 * gamma * dt) * set.mean_udag_u();
  return DensityMatrix::normalized_from_matrix(k * w * k.adjoint());
}

DensityMatrix click_avg_step(const DensityMatrix& sigma_s,
                             const PreparedSteeringSet& set, double gamma,
                             double dt, RngStream& stream) {
  const std::size_t i = sample_categorical(stream, set.probabilities());
  const Matrix2 w = sigma_s.matrix();
  const Matrix2 next = w + (gamma * dt) * dissipator(set.u(i), w);
  return DensityMatrix::normalized_from_matrix(next);
}

BlochVector det_fixed_point(const PreparedSteeringSet& set) {
  const Matrix2& m = set.mean_udag_u();
  const BlochVector b{(m * sigma_x()).trace().real(),
                      (m * sigma_y()).trace().real(),
                      (m * sigma_z()).trace().real()};
  const double n = b.norm();
  if (n < 1e-12) {
    throw ValidationError(
        "steering set is isotropic: no unique deterministic fixed point");
  }
  return {-b.x / n, -b.y / n, -b.z / n};
}

BlochVector det_fixed_point(const SteeringSet& set) {
  return det_fixed_point(PreparedSteeringSet(set));
}

Matrix2 avg_lindblad_rhs(const DensityMatrix& rho,
                         const PreparedSteeringSet& set, double gamma) {
  Matrix2 out{};
  const Matrix2 w = rho.matrix();
  for (std::size_t i = 0; i < set.size(); ++i) {
    out += (gamma * set.probabilities()[i]) * dissipator(set.u(i), w);
  }
  return out;
}

Matrix2 avg_lindblad_rhs(const DensityMatrix& rho, const SteeringSet& set,
                         double gamma) {
  return avg_lindblad_rhs(rho, PreparedSteeringSet(set), gamma);
}

DensityMatrix two_dir_solution(double gamma, double t) {
  const double zeta =
      0.9 - (8.0 + 5.0 * std::sqrt(2.0)) / 20.0 * std::exp(-0.625 * gamma * t);
  const double chi = std::exp(-0.875 * gamma * t) / (2.0 * std::sqrt(2.0));
  return DensityMatrix(zeta, chi);
}

TwoDirStationary two_dir_stationary(double p, double theta) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0, 1]");
  if (!(theta >= -M_PI && theta <= M_PI)) {
    throw ValidationError("theta must lie in [-pi, pi]");
  }
  const double q = (1.0 - p) * p;
  const double e11 =
      (4.0 + q + 4.0 * (1.0 + q) * std::cos(theta) +
       (p - 1.0) * p * (4.0 * std::cos(3.0 * theta) + std::cos(4.0 * theta))) /
      (8.0 + 2.0 * q + 2.0 * (p - 1.0) * p * std::cos(4.0 * theta));
  const double e12 = 2.0 * (2.0 * p - 1.0) * std::sin(theta) /
                     (4.0 + q + (p - 1.0) * p * std::cos(4.0 * theta));
  const DensityMatrix state(e11, Complex(e12, 0.0));
  const QuantifierTriple exact = target_metrics(state);

  // Series about theta = 0.  The trace distance changes parity at p = 1/2:
  // leading theta^4 there, leading theta at any other p.
  const double th2 = theta * theta;
  const double th4 = th2 * th2;
  double d_series;
  if (p == 0.5) {
    d_series = th4 / 16.0 + th4 * th2 / 48.0;
  } else {
    const double pq = (p - 1.0) * p;
    const double t3 = (60.0 * pq - 1.0) / 24.0;
    const double t5 = (120.0 * pq * (78.0 * pq - 49.0) + 1.0) / 1920.0;
    const double pref = std::abs(0.5 - p);
    const double t7 =
        (16.0 * pq *
             (630.0 * pq * (8.0 * pq * (157.0 * pq - 163.0) - 229.0) +
              27011.0) -
         1.0) /
        (1290240.0 * pref);
    const double th = std::abs(theta);
    d_series = pref * (th + t3 * th * th2 + t5 * th * th4) +
               t7 * th * th2 * th4;
  }
  const double f_series =
      1.0 - 0.25 * (1.0 - 4.0 * p + 4.0 * p * p) * th2 +
      (1.0 + 8.0 * p - 104.0 * p * p + 192.0 * p * p * p -
       96.0 * p * p * p * p) /
          48.0 * th4;
  const double l_series =
      2.0 * p * (1.0 - 4.0 * p + 6.0 * p * p - 3.0 * p * p * p) * th4;
  return {state, exact, {f_series, d_series, l_series}};
}

// --- continuous distributions ---------------------------------------------

namespace {

// 64-node Gauss-Legendre rule on [-1, 1], nodes by Newton iteration.
struct GaussLegendre64 {
  std::array<double, 64> x{};
  std::array<double, 64> w{};
  GaussLegendre64() {
    constexpr int n = 64;
    for (int i = 0; i < n / 2; ++i) {
      double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
        }
        pp = n * (t * p0 - p1) / (t * t - 1.0);
        const double dt = p0 / pp;
        t -= dt;
        if (std::abs(dt) < 1e-15) break;
      }
      x[i] = -t;
      x[n - 1 - i] = t;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * pp * pp);
    }
  }
};

const GaussLegendre64& gl64() {
  static const GaussLegendre64 rule;
  return rule;
}

double von_mises_ratio_cf(double x) {
  // backward recurrence for r0 = I1/I0; contraction needs N ~ sqrt(x)
  const int n = static_cast<int>(6.0 * std::sqrt(x)) + 40;
  double r = 0.0;
  for (int k = n; k >= 1; --k) {
    r = 1.0 / (2.0 * k / x + r);
  }
  return r;
}

}  // namespace

double bessel_i0_over_i1(double x) {
  if (!(x > 0.0)) throw ValidationError("bessel ratio requires x > 0");
  if (x <= 50.0) {
    return std::cyl_bessel_i(0.0, x) / std::cyl_bessel_i(1.0, x);
  }
  if (x <= 1e6) {
    return 1.0 / von_mises_ratio_cf(x);
  }
  // asymptotic series of I0/I1 for large argument
  const double ix = 1.0 / x;
  return 1.0 + 0.5 * ix + 0.375 * ix * ix + 0.375 * ix * ix * ix;
}

double continuous_fidelity(const DirectionDistribution& dist) {
  if (const auto* arc = std::get_if<UniformArc>(&dist.dist)) {
    const double tt = arc->theta_tilde;
    if (!(tt > 0.0 && tt <= M_PI)) {
      throw ValidationError("uniform arc half-width must lie in (0, pi]");
    }
    return 0.5 + 4.0 * std::sin(tt) / (6.0 * tt + std::sin(2.0 * tt));
  }
  if (const auto* vm = std::get_if<VonMises>(&dist.dist)) {
    if (!(vm->sigma > 0.0)) throw ValidationError("sigma must be > 0");
    const double x = 1.0 / (vm->sigma * vm->sigma);
    return 0.5 + 1.0 / (2.0 * bessel_i0_over_i1(x) - vm->sigma * vm->sigma);
  }
  throw ValidationError(
      "continuous_fidelity needs a continuous distribution; use "
      "two_dir_stationary or avg_lindblad_rhs for discrete sets");
}

Matrix2 continuous_lindblad_rhs(const DensityMatrix& rho,
                                const DirectionDistribution& dist,
                                double gamma) {
  double lo, hi;
  std::function<double(double)> density;
  if (const auto* arc = std::get_if<UniformArc>(&dist.dist)) {
    const double tt = arc->theta_tilde;
    if (!(tt > 0.0 && tt <= M_PI)) {
      throw ValidationError("uniform arc half-width must lie in (0, pi]");
    }
    lo = -tt;
    hi = tt;
    density = [](double) { return 1.0; };
  } else if (const auto* vm = std::get_if<VonMises>(&dist.dist)) {
    if (!(vm->sigma > 0.0)) throw ValidationError("sigma must be > 0");
    const double x = 1.0 / (vm->sigma * vm->sigma);
    // clip to the mass-carrying window when the density is concentrated
    const double half = std::min(M_PI, 12.0 * vm->sigma);
    lo = -half;
    hi = half;
    density = [x](double th) { return std::exp(x * (std::cos(th) - 1.0)); };
  } else {
    throw ValidationError("quadrature generator needs a continuous distribution");
  }

  const auto& rule = gl64();
  const Matrix2 w = rho.matrix();
  const Matrix2 base = sigma_plus();
  Matrix2 acc{};
  double norm = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double th = 0.5 * (hi + lo) + 0.5 * (hi - lo) * rule.x[i];
    const double wt = 0.5 * (hi - lo) * rule.w[i] * density(th);
    // R(theta, 0) with signed theta: rotation about y by theta
    const double ct = std::cos(0.5 * th);
    const double st = std::sin(0.5 * th);
    const Matrix2 r{ct, -st, st, ct};
    const Matrix2 u = r * base * r.adjoint();
    acc += wt * dissipator(u, w);
    norm += wt;
  }
  return (gamma / norm) * acc;
}

// --- multi-white-noise model ------------------------------------------------

MultiNoiseStepResult multi_noise_step(const DensityMatrix& rho,
                                      const PreparedSteeringSet& set,
                                      double gamma, double dt,
                                      RngStream& stream) {
  // Kraus pair of the repeated-interaction slice with n white noises:
  // M0 = I - (gamma dt / 2) sum_i p_i U_i^dag U_i; the click operation is the
  // Ito-averaged mixture sum_i p_i U_i . U_i^dag.
  const Matrix2 w = rho.matrix();
  const double expect = (set.mean_udag_u() * w).trace().real();
  if (sample_jump(stream, std::max(0.0, gamma * expect * dt)) == 1) {
    if (expect <= 0.0) {
      throw NumericalError("click sampled with vanishing mean rate");
    }
    Matrix2 post{};
    for (std::size_t i = 0; i < set.size(); ++i) {
      post += set.probabilities()[i] * (set.u(i) * w * set.u(i).adjoint());
    }
    return {MeasurementOutcome::Click,
            DensityMatrix::normalized_from_matrix(post)};
  }
  const Matrix2 m0 = identity2() - (0.5 * gamma * dt) * set.mean_udag_u();
  return {MeasurementOutcome::NoClick,
          DensityMatrix::normalized_from_matrix(m0 * w * m0.adjoint())};
}

// SteeringSet conveniences

DensityMatrix full_step(const DensityMatrix& omega, const SteeringSet& set,
                        double gamma, double dt, RngStream& stream) {
  return full_step(omega, PreparedSteeringSet(set), gamma, dt, stream);
}

DensityMatrix dir_avg_step(const DensityMatrix& pi_s, const SteeringSet& set,
                           double gamma, double dt, RngStream& stream) {
  return dir_avg_step(pi_s, PreparedSteeringSet(set), gamma, dt, stream);
}

DensityMatrix click_avg_step(const DensityMatrix& sigma_s,
                             const SteeringSet& set, double gamma, double dt,
                             RngStream& stream) {
  return click_avg_step(sigma_s, PreparedSteeringSet(set), gamma, dt, stream);
}

MultiNoiseStepResult multi_noise_step(const DensityMatrix& rho,
                                      const SteeringSet& set, double gamma,
                                      double dt, RngStream& stream) {
  return multi_noise_step(rho, PreparedSteeringSet(set), gamma, dt, stream);
}

}  // namespace qsteer
