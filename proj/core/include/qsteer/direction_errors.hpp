#pragma once

// Fluctuating steering directions: the three averaging-hierarchy SMEs
// (full stochasticity, direction-averaged, click-averaged), the fully
// averaged Lindbladian and its fixed points, two-direction closed forms,
// continuous direction distributions, and the multi-white-noise model that
// reproduces the direction-averaged SME.

#include <variant>
#include <vector>

#include "qsteer/protocol_ideal.hpp"
#include "qsteer/qmat.hpp"
#include "qsteer/quantifiers.hpp"
#include "qsteer/stoch.hpp"

namespace qsteer {

struct SteeringDirection {
  double theta{};
  double phi{};
  double probability{};
};

/// Discrete set of target directions with probabilities summing to 1.
class SteeringSet {
 public:
  explicit SteeringSet(std::vector<SteeringDirection> entries);
  const std::vector<SteeringDirection>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// The paper's running example: {(pi/3, 0; 1/2), (pi/3, pi; 1/2)}.
  static SteeringSet symmetric_pair(double theta, double p);

 private:
  std::vector<SteeringDirection> entries_;
};

/// Precomputed rotated jump operators and products for the hot stepper loops.
class PreparedSteeringSet {
 public:
  explicit PreparedSteeringSet(const SteeringSet& set);

  std::size_t size() const { return u_.size(); }
  const std::vector<double>& probabilities() const { return probs_; }
  const Matrix2& u(std::size_t i) const { return u_[i]; }
  const Matrix2& udag_u(std::size_t i) const { return udag_u_[i]; }
  /// sum_i p(i) U_i^dag U_i
  const Matrix2& mean_udag_u() const { return mean_udag_u_; }

 private:
  std::vector<double> probs_;
  std::vector<Matrix2> u_;
  std::vector<Matrix2> udag_u_;
  Matrix2 mean_udag_u_;
};

// --- the three averaging hierarchies -------------------------------------

/// Full stochasticity (directions + readouts): sample a direction, then one
/// jump-SME step along it.  Preserves purity along every trajectory.
DensityMatrix full_step(const DensityMatrix& omega,
                        const PreparedSteeringSet& set, double gamma,
                        double dt, RngStream& stream);
DensityMatrix full_step(const DensityMatrix& omega, const SteeringSet& set,
                        double gamma, double dt, RngStream& stream);

/// Directions averaged out, readouts kept: the no-click drift uses the mean
/// operator sum_i p(i) U_i^dag U_i and a click jumps to the generally mixed
/// state sum_i p(i) U_i w U_i^dag / <.>.
DensityMatrix dir_avg_step(const DensityMatrix& pi_s,
                           const PreparedSteeringSet& set, double gamma,
                           double dt, RngStream& stream);
DensityMatrix dir_avg_step(const DensityMatrix& pi_s, const SteeringSet& set,
                           double gamma, double dt, RngStream& stream);

/// Readouts averaged out, directions kept: Euler step of the sampled
/// dissipator, never purity preserving from mixed input.
DensityMatrix click_avg_step(const DensityMatrix& sigma_s,
                             const PreparedSteeringSet& set, double gamma,
                             double dt, RngStream& stream);
DensityMatrix click_avg_step(const DensityMatrix& sigma_s,
                             const SteeringSet& set, double gamma, double dt,
                             RngStream& stream);

/// Unit Bloch vector of the stable fixed point of the no-click drift:
/// r = -Tr[sum_i p(i) U_i^dag U_i sigma] / ||.||.  Throws if the set is
/// isotropic (zero traceless part, no unique fixed point).
BlochVector det_fixed_point(const SteeringSet& set);
BlochVector det_fixed_point(const PreparedSteeringSet& set);

/// Fully averaged Lindbladian sum_i gamma p(i) D(U_i) rho.
Matrix2 avg_lindblad_rhs(const DensityMatrix& rho, const SteeringSet& set,
                         double gamma);
Matrix2 avg_lindblad_rhs(const DensityMatrix& rho,
                         const PreparedSteeringSet& set, double gamma);

/// Closed-form solution of the fully averaged flow for the running example
/// set symmetric_pair(pi/3, 1/2) started from r0 = (1, 0, -1)/sqrt(2):
/// zeta(t) = 9/10 - (8 + 5 sqrt 2)/20 exp(-5 gamma t / 8),
/// chi(t)  = exp(-7 gamma t / 8) / (2 sqrt 2).
DensityMatrix two_dir_solution(double gamma, double t);

/// Stationary state and quantifiers of the symmetric two-direction set
/// {(theta, 0; p), (theta, pi; 1-p)}.
struct TwoDirStationary {
  DensityMatrix state;
  QuantifierTriple exact;
  QuantifierTriple series;
};
TwoDirStationary two_dir_stationary(double p, double theta);

// --- continuous direction distributions ----------------------------------

struct UniformArc {
  double theta_tilde{};  // half width, in (0, pi]
};
struct VonMises {
  double sigma{};  // dispersion parameter, > 0
};

struct DirectionDistribution {
  std::variant<SteeringSet, UniformArc, VonMises> dist;
};

/// Stationary fidelity against the target for a continuous distribution of
/// directions, in closed form.  Discrete sets go through two_dir_stationary
/// or avg_lindblad_rhs instead.
double continuous_fidelity(const DirectionDistribution& dist);

/// I0(x) / I1(x), valid for x > 0 across all magnitudes (direct evaluation,
/// continued fraction, asymptotic series).
double bessel_i0_over_i1(double x);

/// Quadrature-averaged Lindblad generator of a continuous distribution
/// (Gauss-Legendre, 64 nodes); the dual route to continuous_fidelity.
Matrix2 continuous_lindblad_rhs(const DensityMatrix& rho,
                                const DirectionDistribution& dist,
                                double gamma);

// --- multi-white-noise repeated interaction (Appendix E route) -----------

struct MultiNoiseStepResult {
  MeasurementOutcome outcome;
  DensityMatrix posterior;
};

/// One step of the n-white-noise repeated-interaction model.  Built from its
/// own Kraus pair; statistically equivalent to dir_avg_step.
MultiNoiseStepResult multi_noise_step(const DensityMatrix& rho,
                                      const PreparedSteeringSet& set,
                                      double gamma, double dt,
                                      RngStream& stream);
MultiNoiseStepResult multi_noise_step(const DensityMatrix& rho,
                                      const SteeringSet& set, double gamma,
                                      double dt, RngStream& stream);

}  // namespace qsteer
