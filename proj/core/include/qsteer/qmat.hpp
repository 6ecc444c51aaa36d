#pragma once

// Complex 2x2 algebra for a steered qubit: density matrices in the
// (zeta, chi) parametrization, Bloch conversions, rotations and rotated
// jump operators.

#include <complex>
#include <stdexcept>
#include <string>

namespace qsteer {

using Complex = std::complex<double>;

inline constexpr double kPositivityTol = 1e-10;

/// Base class of all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid input: out-of-range parameter, violated precondition.
struct ValidationError : Error {
  using Error::Error;
};

/// A state or intermediate quantity left the physically allowed region.
struct NumericalError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Matrix2

/// Dense complex 2x2 matrix, row major.
struct Matrix2 {
  Complex m00{}, m01{}, m10{}, m11{};

  friend Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
    return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
  }
  friend Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
    return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
  }
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
  }
  friend Matrix2 operator*(Complex s, const Matrix2& a) {
    return {s * a.m00, s * a.m01, s * a.m10, s * a.m11};
  }
  friend Matrix2 operator*(double s, const Matrix2& a) {
    return Complex(s, 0.0) * a;
  }
  Matrix2& operator+=(const Matrix2& b) { return *this = *this + b; }
  Matrix2& operator-=(const Matrix2& b) { return *this = *this - b; }

  Matrix2 adjoint() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
  }
  Complex trace() const { return m00 + m11; }
  Complex det() const { return m00 * m11 - m01 * m10; }

  /// max |entry|, used for tolerance scaling
  double max_abs() const;
  bool is_finite() const;
};

Matrix2 identity2();
Matrix2 sigma_x();
Matrix2 sigma_y();
Matrix2 sigma_z();
Matrix2 sigma_plus();   // |up><down|
Matrix2 sigma_minus();  // |down><up|

/// Frobenius distance, handy in tests and validation.
double frobenius_distance(const Matrix2& a, const Matrix2& b);

/// Dissipator D(X)rho = X rho X^dag - 1/2 {X^dag X, rho}.
Matrix2 dissipator(const Matrix2& x, const Matrix2& rho);

/// Commutator [a, b].
Matrix2 commutator(const Matrix2& a, const Matrix2& b);

/// Anticommutator {a, b}.
Matrix2 anticommutator(const Matrix2& a, const Matrix2& b);

/// exp(-i s H) for Hermitian H, evaluated in closed form.
Matrix2 unitary_exp_herm(const Matrix2& h, double s);

// ---------------------------------------------------------------------------
// Kets

/// Complex 2-vector in the canonical basis {|up>, |down>}.
struct Ket2 {
  Complex up{}, down{};

  double norm() const;
  Ket2 normalized() const;
  /// |k><k|
  Matrix2 projector() const;

  friend Ket2 operator*(const Matrix2& m, const Ket2& k) {
    return {m.m00 * k.up + m.m01 * k.down, m.m10 * k.up + m.m11 * k.down};
  }
  friend Ket2 operator*(Complex s, const Ket2& k) {
    return {s * k.up, s * k.down};
  }
};

/// <a|b>
Complex inner(const Ket2& a, const Ket2& b);

Ket2 ket_up();    // |Psi_target>, the steering target
Ket2 ket_down();

// ---------------------------------------------------------------------------
// Bloch vectors and density matrices

struct BlochVector {
  double x{}, y{}, z{};

  double norm() const;
  friend BlochVector operator+(const BlochVector& a, const BlochVector& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend BlochVector operator-(const BlochVector& a, const BlochVector& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend BlochVector operator*(double s, const BlochVector& a) {
    return {s * a.x, s * a.y, s * a.z};
  }
};

/// Qubit state rho = [[zeta, chi], [conj(chi), 1-zeta]].
///
/// Hermiticity and unit trace are structural; positivity is validated on
/// construction (min eigenvalue >= -kPositivityTol) and violations throw
/// instead of being clipped.
class DensityMatrix {
 public:
  DensityMatrix() : zeta_(1.0), chi_(0.0) {}  // target state |up><up|
  DensityMatrix(double zeta, Complex chi);

  double zeta() const { return zeta_; }
  Complex chi() const { return chi_; }

  Matrix2 matrix() const {
    return {Complex(zeta_, 0.0), chi_, std::conj(chi_),
            Complex(1.0 - zeta_, 0.0)};
  }

  /// Rebuild a state from an (approximately) Hermitian positive matrix with
  /// nonzero trace.  The matrix is symmetrized and divided by its trace, so
  /// steppers can feed raw Kraus products straight in.
  static DensityMatrix normalized_from_matrix(const Matrix2& m);

  bool operator==(const DensityMatrix& o) const {
    return zeta_ == o.zeta_ && chi_ == o.chi_;
  }

 private:
  double zeta_;
  Complex chi_;
};

DensityMatrix target_state();          // |up><up|
DensityMatrix maximally_mixed();       // I/2
DensityMatrix pure_state(const Ket2& psi);

/// r = Tr[rho sigma] = (2 Re chi, -2 Im chi, 2 zeta - 1).
BlochVector bloch_from_density(const DensityMatrix& rho);

/// rho = (I + r.sigma)/2; rejects |r| > 1 + kPositivityTol.
DensityMatrix density_from_bloch(const BlochVector& r);

// ---------------------------------------------------------------------------
// Rotations

/// Polar/azimuth pair with theta in [0, pi], phi in [0, 2*pi).
struct RotationAngles {
  RotationAngles(double theta, double phi);
  double theta() const { return theta_; }
  double phi() const { return phi_; }

 private:
  double theta_;
  double phi_;
};

/// R(theta, phi) = exp(-i phi sigma_z / 2) exp(-i theta sigma_y / 2).
Matrix2 rotation(const RotationAngles& angles);

/// U_i = R U R^dag.  U must annihilate the target ket and satisfy
/// U U^dag |target> = |target> (checked to 1e-10).
Matrix2 rotated_jump(const RotationAngles& angles, const Matrix2& u);

}  // namespace qsteer
