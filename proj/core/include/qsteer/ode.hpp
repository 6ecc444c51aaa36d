#pragma once

// Fixed-step RK4 on Bloch vectors, used by the deterministic run modes and
// the analytic-vs-numeric verification paths.

#include <functional>

#include "qsteer/qmat.hpp"

namespace qsteer {

using BlochRhs = std::function<BlochVector(const BlochVector&)>;

inline BlochVector rk4_step(const BlochRhs& rhs, const BlochVector& r,
                            double h) {
  const BlochVector k1 = rhs(r);
  const BlochVector k2 = rhs(r + (0.5 * h) * k1);
  const BlochVector k3 = rhs(r + (0.5 * h) * k2);
  const BlochVector k4 = rhs(r + h * k3);
  return r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline BlochVector rk4_integrate(const BlochRhs& rhs, BlochVector r, double h,
                                 std::size_t n_steps) {
  for (std::size_t i = 0; i < n_steps; ++i) r = rk4_step(rhs, r, h);
  return r;
}

/// Bloch-space derivative of a traceless Hermitian matrix derivative.
inline BlochVector bloch_derivative(const Matrix2& d) {
  return {2.0 * d.m01.real(), -2.0 * d.m01.imag(), 2.0 * d.m00.real()};
}

}  // namespace qsteer
