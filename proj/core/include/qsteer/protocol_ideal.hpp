#pragma once

// Error-free steering protocol: discrete generalized measurements, the
// weak-measurement-limit jump SME, and the Lindblad flow with its closed-form
// solution.  The canonical bases are fixed once: target ket |up>, detector
// reset to |up>, jump operator U = sigma+.

#include <optional>

#include "qsteer/qmat.hpp"
#include "qsteer/stoch.hpp"

namespace qsteer {

/// Channel strength gamma, step dt, with coupling J = sqrt(gamma/dt) so that
/// J^2 dt = gamma by construction.
struct ProtocolParams {
  ProtocolParams(double gamma, double dt);
  double gamma() const { return gamma_; }
  double dt() const { return dt_; }
  double coupling() const;  // J

 private:
  double gamma_;
  double dt_;
};

enum class CouplingClass { Valid, PiMultiple, HalfPiOddMultiple };

/// Flags J*dt that is a multiple of pi (no steering) or an odd multiple of
/// pi/2 (projective limit); tolerance 1e-9 on J*dt mod pi/2.
CouplingClass classify_coupling(double coupling, double dt);

struct KrausPair {
  Matrix2 m0;  // diag(1, cos(J dt))
  Matrix2 m1;  // sin(J dt) |up><down|
};

KrausPair kraus_pair(double coupling, double dt);

enum class MeasurementOutcome { NoClick = 0, Click = 1, Blind = 2 };

struct DiscreteStepResult {
  MeasurementOutcome outcome;
  DensityMatrix posterior;
};

/// One discrete measurement step.  With a stream, samples the readout and
/// returns the normalized posterior; without one, applies the blind update
/// sum_a M_a rho M_a^dag.
DiscreteStepResult discrete_step(const DensityMatrix& rho,
                                 const ProtocolParams& params,
                                 RngStream* stream);

/// Same as discrete_step but with an explicit coupling, for scenarios where
/// J fluctuates away from sqrt(gamma/dt).
DiscreteStepResult discrete_step_with_coupling(const DensityMatrix& rho,
                                               double coupling, double dt,
                                               RngStream* stream);

/// One step of the jump-type SME in the WM limit: a click (probability
/// gamma <U^dag U> dt) replaces the state by U w U^dag / <U^dag U>; otherwise
/// the normalized no-click Kraus map applies the anticommutator drift.
DensityMatrix wm_jump_step(const DensityMatrix& omega, double gamma, double dt,
                           RngStream& stream);

/// Shared jump-SME kernel for a general partial-isometry jump operator and
/// rate; used by the error modules.
DensityMatrix jump_sme_step(const DensityMatrix& omega, const Matrix2& u,
                            const Matrix2& udag_u, double rate, double dt,
                            RngStream& stream);

/// Closed-form solution of the ideal Lindblad flow:
/// x,y decay at gamma/2 and z relaxes to 1 at rate gamma.
BlochVector ideal_lindblad_solution(const BlochVector& r0, double gamma,
                                    double t);

/// gamma * D(sigma+) rho.
Matrix2 ideal_lindblad_rhs(const DensityMatrix& rho, double gamma);

}  // namespace qsteer
