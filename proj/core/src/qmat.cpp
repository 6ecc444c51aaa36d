#include "qsteer/qmat.hpp"

#include <algorithm>
#include <cmath>

namespace qsteer {

namespace {
constexpr Complex kI{0.0, 1.0};
}

double Matrix2::max_abs() const {
  return std::max(std::max(std::abs(m00), std::abs(m01)),
                  std::max(std::abs(m10), std::abs(m11)));
}

bool Matrix2::is_finite() const {
  auto ok = [](Complex c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  };
  return ok(m00) && ok(m01) && ok(m10) && ok(m11);
}

Matrix2 identity2() { return {1.0, 0.0, 0.0, 1.0}; }
Matrix2 sigma_x() { return {0.0, 1.0, 1.0, 0.0}; }
Matrix2 sigma_y() { return {0.0, -kI, kI, 0.0}; }
Matrix2 sigma_z() { return {1.0, 0.0, 0.0, -1.0}; }
Matrix2 sigma_plus() { return {0.0, 1.0, 0.0, 0.0}; }
Matrix2 sigma_minus() { return {0.0, 0.0, 1.0, 0.0}; }

double frobenius_distance(const Matrix2& a, const Matrix2& b) {
  const Matrix2 d = a - b;
  return std::sqrt(std::norm(d.m00) + std::norm(d.m01) + std::norm(d.m10) +
                   std::norm(d.m11));
}

Matrix2 dissipator(const Matrix2& x, const Matrix2& rho) {
  const Matrix2 xdx = x.adjoint() * x;
  return x * rho * x.adjoint() - 0.5 * (xdx * rho + rho * xdx);
}

Matrix2 commutator(const Matrix2& a, const Matrix2& b) {
  return a * b - b * a;
}

Matrix2 anticommutator(const Matrix2& a, const Matrix2& b) {
  return a * b + b * a;
}

Matrix2 unitary_exp_herm(const Matrix2& h, double s) {
  // H = alpha I + v.sigma with real alpha, v; exp(-i s H) splits into a phase
  // and a rotation about v.
  const double alpha = 0.5 * (h.m00.real() + h.m11.real());
  const double vx = h.m01.real();
  const double vy = -h.m01.imag();
  const double vz = 0.5 * (h.m00.real() - h.m11.real());
  const double vn = std::sqrt(vx * vx + vy * vy + vz * vz);
  const Complex phase = std::exp(Complex(0.0, -s * alpha));
  if (vn == 0.0) {
    Matrix2 r = identity2();
    return phase * r;
  }
  const double c = std::cos(s * vn);
  const double sn = std::sin(s * vn) / vn;
  Matrix2 r{Complex(c, -sn * vz), Complex(-sn * vy, -sn * vx),
            Complex(sn * vy, -sn * vx), Complex(c, sn * vz)};
  return phase * r;
}

double Ket2::norm() const { return std::sqrt(std::norm(up) + std::norm(down)); }

Ket2 Ket2::normalized() const {
  const double n = norm();
  if (n == 0.0) throw NumericalError("cannot normalize zero ket");
  return {up / n, down / n};
}

Matrix2 Ket2::projector() const {
  return {up * std::conj(up), up * std::conj(down), down * std::conj(up),
          down * std::conj(down)};
}

Complex inner(const Ket2& a, const Ket2& b) {
  return std::conj(a.up) * b.up + std::conj(a.down) * b.down;
}

Ket2 ket_up() { return {1.0, 0.0}; }
Ket2 ket_down() { return {0.0, 1.0}; }

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

DensityMatrix::DensityMatrix(double zeta, Complex chi)
    : zeta_(zeta), chi_(chi) {
  if (!std::isfinite(zeta) || !std::isfinite(chi.real()) ||
      !std::isfinite(chi.imag())) {
    throw NumericalError("density matrix entries are not finite");
  }
  // min eigenvalue is (1 - |r|)/2, so positivity is a Bloch-norm bound
  const double r2 =
      (2.0 * zeta - 1.0) * (2.0 * zeta - 1.0) + 4.0 * std::norm(chi);
  if (r2 > (1.0 + kPositivityTol) * (1.0 + kPositivityTol)) {
    throw NumericalError("density matrix is not positive: |r| = " +
                         std::to_string(std::sqrt(r2)));
  }
}

DensityMatrix DensityMatrix::normalized_from_matrix(const Matrix2& m) {
  const double tr = (m.m00 + m.m11).real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw NumericalError("cannot normalize matrix with trace " +
                         std::to_string(tr));
  }
  const double zeta = m.m00.real() / tr;
  const Complex chi = 0.5 * (m.m01 + std::conj(m.m10)) / tr;
  return DensityMatrix(zeta, chi);
}

DensityMatrix target_state() { return DensityMatrix(1.0, 0.0); }
DensityMatrix maximally_mixed() { return DensityMatrix(0.5, 0.0); }

DensityMatrix pure_state(const Ket2& psi) {
  const Ket2 n = psi.normalized();
  return DensityMatrix(std::norm(n.up), n.up * std::conj(n.down));
}

BlochVector bloch_from_density(const DensityMatrix& rho) {
  return {2.0 * rho.chi().real(), -2.0 * rho.chi().imag(),
          2.0 * rho.zeta() - 1.0};
}

DensityMatrix density_from_bloch(const BlochVector& r) {
  if (r.norm() > 1.0 + kPositivityTol) {
    throw ValidationError("Bloch vector outside the unit ball: |r| = " +
                          std::to_string(r.norm()));
  }
  return DensityMatrix(0.5 * (1.0 + r.z), 0.5 * Complex(r.x, -r.y));
}

RotationAngles::RotationAngles(double theta, double phi)
    : theta_(theta), phi_(phi) {
  if (!(theta >= 0.0 && theta <= M_PI)) {
    throw ValidationError("theta must lie in [0, pi], got " +
                          std::to_string(theta));
  }
  if (!(phi >= 0.0 && phi < 2.0 * M_PI)) {
    throw ValidationError("phi must lie in [0, 2*pi), got " +
                          std::to_string(phi));
  }
}

Matrix2 rotation(const RotationAngles& angles) {
  const double ct = std::cos(0.5 * angles.theta());
  const double st = std::sin(0.5 * angles.theta());
  const Complex em = std::exp(Complex(0.0, -0.5 * angles.phi()));
  const Complex ep = std::exp(Complex(0.0, 0.5 * angles.phi()));
  return {em * ct, em * (-st), ep * st, ep * ct};
}

Matrix2 rotated_jump(const RotationAngles& angles, const Matrix2& u) {
  const Ket2 t = ket_up();
  const Ket2 ut = u * t;
  if (ut.norm() > 1e-10) {
    throw ValidationError("jump operator does not annihilate the target ket");
  }
  const Ket2 uut = (u * u.adjoint()) * t;
  const double dev = std::sqrt(std::norm(uut.up - t.up) + std::norm(uut.down));
  if (dev > 1e-10) {
    throw ValidationError("U U^dag does not fix the target ket");
  }
  const Matrix2 r = rotation(angles);
  return r * u * r.adjoint();
}

}  // namespace qsteer
