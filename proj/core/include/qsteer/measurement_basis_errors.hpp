#pragma once

// Random measurement-direction error: the detector is projected in a basis
// drawn per step from a family of ONBs.  Blind averaging is basis
// independent and reproduces the ideal update exactly; trajectories follow a
// jump/diffusive hybrid SME for the two-basis family the continuum limit is
// derived for.

#include <vector>

#include "qsteer/protocol_ideal.hpp"
#include "qsteer/qmat.hpp"
#include "qsteer/stoch.hpp"

namespace qsteer {

struct MeasurementBasis {
  Ket2 ket0;
  Ket2 ket1;
  double probability{};
};

/// Family of orthonormal detector bases with probabilities summing to 1.
class MeasurementBasisFamily {
 public:
  explicit MeasurementBasisFamily(std::vector<MeasurementBasis> bases);
  const std::vector<MeasurementBasis>& bases() const { return bases_; }

  /// canonical {|0>, |1>} with probability 1
  static MeasurementBasisFamily canonical();
  /// canonical basis with probability p1, the |+/-> basis with 1 - p1
  static MeasurementBasisFamily canonical_plus_hadamard(double p1);

 private:
  std::vector<MeasurementBasis> bases_;
};

struct RandomBasisStepResult {
  std::size_t basis_index{};
  MeasurementOutcome outcome{};
  DensityMatrix posterior;
};

/// One discrete step with a randomly drawn measurement basis: (i, alpha) are
/// sampled jointly with probability p(i) Tr[M_alpha^(i) w M_alpha^(i)^dag].
RandomBasisStepResult random_basis_discrete_step(
    const DensityMatrix& omega, const MeasurementBasisFamily& family,
    double coupling, double dt, RngStream& stream);

/// Measurement operators of basis i at coupling J and step dt.
KrausPair basis_kraus(const MeasurementBasis& basis, double coupling,
                      double dt);

enum class WienerCentering {
  Recentered,   // dW = dZ - <L + L^dag> dt, the SME's zero-mean increment
  PreCentered,  // raw dZ of the discrete derivation, for derivation tests
};

/// One step of the two-basis hybrid SME at the ket level: with probability
/// p1 a jump-type step (L = i sqrt(gamma) U), otherwise a diffusive step.
/// Both branches renormalize the ket, so purity is exact along trajectories.
Ket2 hybrid_sme_step(const Ket2& psi, double p1, double gamma, double dt,
                     RngStream& stream,
                     WienerCentering centering = WienerCentering::Recentered);

/// Density-matrix wrapper around the ket stepper (input must be pure).
DensityMatrix hybrid_sme_step(const DensityMatrix& omega, double p1,
                              double gamma, double dt, RngStream& stream,
                              WienerCentering centering = WienerCentering::Recentered);

/// Trajectory factory holding the ket between steps.
TrajectoryFactory make_hybrid_trajectory_factory(double p1, double gamma,
                                                 double dt);

/// Iterates blind random-basis updates against ideal blind updates from the
/// same initial state and returns the max componentwise deviation; the two
/// agree algebraically, so the result is rounding-level.
double blind_equivalence_check(const MeasurementBasisFamily& family,
                               double coupling, double dt,
                               const DensityMatrix& rho0,
                               std::size_t n_steps);

}  // namespace qsteer
