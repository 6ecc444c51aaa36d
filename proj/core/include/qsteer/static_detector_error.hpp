#pragma once

// Detector-initialization error: the reset detector state carries a wrong
// population a and a coherence |b| e^{i phi}, which induces a competing
// dissipator D(sigma-) and a unitary channel of strength kappa on top of the
// ideal flow.  Provides the Lindbladian, its closed-form solutions in all
// three damping regimes, stationary states and ellipsoids, and the
// stationary quantifiers with their small-error expansions.

#include "qsteer/qmat.hpp"
#include "qsteer/quantifiers.hpp"

namespace qsteer {

/// Erroneous detector reset state [[a, |b|e^{i phi}], [|b|e^{-i phi}, 1-a]].
struct DetectorState {
  DetectorState(double a, double b_abs, double phi);
  double a() const { return a_; }
  double b_abs() const { return b_abs_; }
  double phi() const { return phi_; }

 private:
  double a_;
  double b_abs_;
  double phi_;
};

/// Channel parameters of the induced Lindbladian.  kappa is an independent
/// scenario parameter (the continuum limit of J|b|), not derived from a
/// DetectorState.
struct ErroneousChannelParams {
  ErroneousChannelParams(double gamma, double kappa, double a, double phi);
  double gamma() const { return gamma_; }
  double kappa() const { return kappa_; }
  double a() const { return a_; }
  double phi() const { return phi_; }
  double gamma_plus() const { return a_ * gamma_; }
  double gamma_minus() const { return (1.0 - a_) * gamma_; }

 private:
  double gamma_;
  double kappa_;
  double a_;
  double phi_;
};

enum class DampingTag { Overdamped, Underdamped, Critical };

/// Mode content of the generic solution: Omega_{+,-}, lambda, and the
/// integration constants solved from r(0).
struct DampingRegime {
  DampingTag tag{};
  Complex omega_plus{};
  Complex omega_minus{};
  double lambda{};
  Complex c1{}, c2{}, c3{};
};

DampingTag classify_regime(const ErroneousChannelParams& p);

/// -i kappa [h~, rho] + gamma+ D(sigma+) rho + gamma- D(sigma-) rho with
/// h~ = e^{i phi} sigma+ + h.c.
Matrix2 erroneous_rhs(const DensityMatrix& rho,
                      const ErroneousChannelParams& p);

/// Bloch form of the same generator.
BlochVector erroneous_rhs_bloch(const BlochVector& r,
                                const ErroneousChannelParams& p);

/// Integration constants for the closed-form solution, solved from r(0) = r0.
DampingRegime solve_constants(const BlochVector& r0,
                              const ErroneousChannelParams& p);

/// Closed-form r(t).  Uses the generic two-mode solution away from
/// kappa = gamma/8 and the critically damped solution at it.
BlochVector analytic_solution(const BlochVector& r0,
                              const ErroneousChannelParams& p, double t);

/// Stationary state of the erroneous Lindbladian.
struct StationaryState {
  DensityMatrix state;
  BlochVector bloch;
};
StationaryState stationary_state(const ErroneousChannelParams& p);

/// LHS - 1 of the stationary-ellipsoid equation
/// (x^2+y^2)/(2(a-1/2)^2) + (z-(a-1/2))^2/(a-1/2)^2 = 1.
double ellipsoid_residual(const BlochVector& r, double a);

enum class QuantifierMode { Exact, Series };

/// Stationary fidelity / trace distance / impurity against the ideal target;
/// Series gives the small-(kappa, 1-a) truncations.
QuantifierTriple stationary_quantifiers(const ErroneousChannelParams& p,
                                        QuantifierMode mode);

}  // namespace qsteer
