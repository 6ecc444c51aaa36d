#include "qsteer/static_detector_error.hpp"

#include <cmath>

namespace qsteer {

namespace {
// Critical means kappa within 1e-12 * gamma of gamma/8.
constexpr double kCriticalRelTol = 1e-12;
constexpr double kImagTol = 1e-10;

double checked_real(Complex v, const char* what) {
  if (std::abs(v.imag()) > kImagTol * std::max(1.0, std::abs(v.real()))) {
    throw NumericalError(std::string("reconstructed ") + what +
                         " has imaginary part " + std::to_string(v.imag()));
  }
  return v.real();
}
}  // namespace

DetectorState::DetectorState(double a, double b_abs, double phi)
    : a_(a), b_abs_(b_abs), phi_(phi) {
  if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("a must lie in [0, 1]");
  if (!(b_abs >= 0.0)) throw ValidationError("|b| must be >= 0");
  if (!(phi >= 0.0 && phi < 2.0 * M_PI)) {
    throw ValidationError("phi must lie in [0, 2*pi)");
  }
  // positivity of the detector matrix
  if (b_abs * b_abs > a * (1.0 - a) + 1e-12) {
    throw ValidationError("detector state is not positive: |b|^2 > a(1-a)");
  }
}

ErroneousChannelParams::ErroneousChannelParams(double gamma, double kappa,
                                               double a, double phi)
    : gamma_(gamma), kappa_(kappa), a_(a), phi_(phi) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
  if (!(kappa >= 0.0)) throw ValidationError("kappa must be >= 0");
  if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("a must lie in [0, 1]");
  if (!std::isfinite(phi)) throw ValidationError("phi must be finite");
}

DampingTag classify_regime(const ErroneousChannelParams& p) {
  const double crit = p.gamma() / 8.0;
  if (std::abs(p.kappa() - crit) < kCriticalRelTol * p.gamma()) {
    return DampingTag::Critical;
  }
  return p.kappa() > crit ? DampingTag::Underdamped : DampingTag::Overdamped;
}

Matrix2 erroneous_rhs(const DensityMatrix& rho,
                      const ErroneousChannelParams& p) {
  const Complex eiphi = std::exp(Complex(0.0, p.phi()));
  const Matrix2 h = eiphi * sigma_plus() + std::conj(eiphi) * sigma_minus();
  const Matrix2 w = rho.matrix();
  return Complex(0.0, -p.kappa()) * commutator(h, w) +
         p.gamma_plus() * dissipator(sigma_plus(), w) +
         p.gamma_minus() * dissipator(sigma_minus(), w);
}

BlochVector erroneous_rhs_bloch(const BlochVector& r,
                                const ErroneousChannelParams& p) {
  const double g = p.gamma();
  const double k = p.kappa();
  const double s = std::sin(p.phi());
  const double c = std::cos(p.phi());
  return {-0.5 * g * r.x - 2.0 * k * r.z * s,
          -0.5 * g * r.y - 2.0 * k * r.z * c,
          g * (2.0 * p.a() - 1.0) - g * r.z + 2.0 * k * r.y * c +
              2.0 * k * r.x * s};
}

DampingRegime solve_constants(const BlochVector& r0,
                              const ErroneousChannelParams& p) {
  DampingRegime regime;
  regime.tag = classify_regime(p);
  const double g = p.gamma();
  const double k = p.kappa();
  regime.lambda = (g * g * p.a() + 4.0 * k * k) / (g * g + 8.0 * k * k);
  const Complex disc =
      std::sqrt(Complex(0.0625 * g * g - 4.0 * k * k, 0.0));
  regime.omega_plus = disc - 0.75 * g;
  regime.omega_minus = -disc - 0.75 * g;
  if (regime.tag == DampingTag::Critical) return regime;

  if (std::abs(regime.omega_plus - regime.omega_minus) <
      1e-12 * std::max(1.0, g)) {
    throw NumericalError(
        "degenerate mode rates outside the declared critical regime; "
        "reclassify kappa = gamma/8 as Critical");
  }
  const double c = std::cos(p.phi());
  const double s = std::sin(p.phi());
  // f(0), g(0) from the transverse components, then a 2x2 solve in C1, C2
  const Complex f0 = k * (r0.y * c + r0.x * s);
  regime.c3 = k * (r0.x * c - r0.y * s);
  const Complex rhs1 = 0.5 * (r0.z + 1.0) - regime.lambda;
  const Complex rhs2 = f0 - g * (regime.lambda - p.a());
  const Complex ap = regime.omega_plus + g;
  const Complex am = regime.omega_minus + g;
  const Complex det = am - ap;
  regime.c1 = (am * rhs1 - rhs2) / det;
  regime.c2 = (rhs2 - ap * rhs1) / det;
  return regime;
}

namespace {

BlochVector critical_solution(const BlochVector& r0,
                              const ErroneousChannelParams& p, double t) {
  const double g = p.gamma();
  const double a = p.a();
  const double c = std::cos(p.phi());
  const double s = std::sin(p.phi());
  const double gt = g * t;
  const double mix = r0.x * s + r0.y * c;
  const double sec = (2.0 * a - 1.0) / 3.0 - 0.25 * r0.z;
  // Note: the constant term of z is 8(2a-1)/9, the stationary value of
  // Eq. (17) at kappa = gamma/8; x and y keep 4(1-2a)/9 prefactors.
  const double cx = 0.25 * (gt + 4.0) * mix * s +
                    (4.0 / 9.0 * (2.0 * a - 1.0) + gt * sec) * s +
                    std::exp(0.25 * gt) * (r0.x * c - r0.y * s) * c;
  const double cy = 0.25 * (gt + 4.0) * mix * c +
                    (4.0 / 9.0 * (2.0 * a - 1.0) + gt * sec) * c +
                    std::exp(0.25 * gt) * (r0.y * s - r0.x * c) * s;
  const double cz =
      0.25 * gt * mix + gt * sec + r0.z - 8.0 / 9.0 * (2.0 * a - 1.0);
  const double decay = std::exp(-0.75 * gt);
  return {4.0 / 9.0 * (1.0 - 2.0 * a) * s + decay * cx,
          4.0 / 9.0 * (1.0 - 2.0 * a) * c + decay * cy,
          8.0 / 9.0 * (2.0 * a - 1.0) + decay * cz};
}

}  // namespace

BlochVector analytic_solution(const BlochVector& r0,
                              const ErroneousChannelParams& p, double t) {
  if (p.kappa() == 0.0) {
    // no unitary channel: plain exponential relaxation toward (0,0,2a-1)
    const double g = p.gamma();
    const double zi = 2.0 * p.a() - 1.0;
    return {r0.x * std::exp(-0.5 * g * t), r0.y * std::exp(-0.5 * g * t),
            zi + (r0.z - zi) * std::exp(-g * t)};
  }
  const DampingRegime regime = solve_constants(r0, p);
  if (regime.tag == DampingTag::Critical) {
    return critical_solution(r0, p, t);
  }
  const double g = p.gamma();
  const double k = p.kappa();
  const double c = std::cos(p.phi());
  const double s = std::sin(p.phi());
  const Complex ep = std::exp(regime.omega_plus * t);
  const Complex em = std::exp(regime.omega_minus * t);
  const Complex f = regime.c1 * (regime.omega_plus + g) * ep +
                    regime.c2 * (regime.omega_minus + g) * em +
                    g * (regime.lambda - p.a());
  const Complex gg = regime.c3 * std::exp(-0.5 * g * t);
  const Complex x = (c * gg + s * f) / k;
  const Complex y = (c * f - s * gg) / k;
  const Complex z = 2.0 * (regime.c1 * ep + regime.c2 * em + regime.lambda) - 1.0;
  return {checked_real(x, "x"), checked_real(y, "y"), checked_real(z, "z")};
}

StationaryState stationary_state(const ErroneousChannelParams& p) {
  const double g = p.gamma();
  const double k = p.kappa();
  const double pre = (2.0 * p.a() - 1.0) * g / (g * g + 8.0 * k * k);
  const BlochVector r{-4.0 * k * std::sin(p.phi()) * pre,
                      -4.0 * k * std::cos(p.phi()) * pre, g * pre};
  return {density_from_bloch(r), r};
}

double ellipsoid_residual(const BlochVector& r, double a) {
  if (!(a > 0.0 && a < 1.0) || a == 0.5) {
    throw ValidationError("ellipsoid requires a in (0,1/2) or (1/2,1)");
  }
  const double h = a - 0.5;
  return (r.x * r.x + r.y * r.y) / (2.0 * h * h) +
         (r.z - h) * (r.z - h) / (h * h) - 1.0;
}

QuantifierTriple stationary_quantifiers(const ErroneousChannelParams& p,
                                        QuantifierMode mode) {
  const double g = p.gamma();
  const double k = p.kappa();
  const double a = p.a();
  if (mode == QuantifierMode::Exact) {
    const double den = g * g + 8.0 * k * k;
    const double f = 0.5 + g * g * (2.0 * a - 1.0) / (2.0 * den);
    const double t1 = (1.0 - a) * g * g + 4.0 * k * k;
    const double d =
        std::sqrt(t1 * t1 +
                  4.0 * g * g * k * k * (2.0 * a - 1.0) * (2.0 * a - 1.0)) /
        den;
    const double l =
        1.0 - (g * g * (g * g + 16.0 * k * k) * (1.0 + 2.0 * (a - 1.0) * a) +
               32.0 * k * k * k * k) /
                  (den * den);
    return {f, d, l};
  }
  if (!(a < 1.0)) {
    throw ValidationError("series expansion requires a < 1");
  }
  const double k2 = k * k;
  const double g2 = g * g;
  const double f = a - 4.0 / g2 * (2.0 * a - 1.0) * k2;
  const double d = 1.0 - a + 2.0 / g2 * (2.0 * a - 1.0) / (1.0 - a) * k2;
  const double l = 2.0 * a * (1.0 - a) +
                   32.0 / (g2 * g2) * (1.0 - 2.0 * a) * (1.0 - 2.0 * a) * k2 * k2;
  return {f, d, l};
}

}  // namespace qsteer
