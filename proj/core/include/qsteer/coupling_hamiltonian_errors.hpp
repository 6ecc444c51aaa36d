#pragma once

// Fluctuating detector-system coupling (quenched set, Gaussian, white noise)
// and environmentally induced Hamiltonian noise: perturbed Lindbladian,
// the jump-diffusive SME, closed-form stationary quantifiers for the
// sigma_x perturbation, and Monte-Carlo checks of the commutation theorems
// (expectation vs time ordering, expectation vs partial trace).

#include <utility>
#include <variant>
#include <vector>

#include "qsteer/protocol_ideal.hpp"
#include "qsteer/qmat.hpp"
#include "qsteer/quantifiers.hpp"
#include "qsteer/stoch.hpp"

namespace qsteer {

// --- coupling-strength errors ---------------------------------------------

struct CouplingEntry {
  double coupling{};     // J_n
  double probability{};  // p_n
};

struct DiscreteCouplingSet {
  std::vector<CouplingEntry> entries;
};
struct GaussianCoupling {
  double sigma{};  // standard deviation of the per-step coupling
};
struct WhiteNoiseCoupling {
  double upsilon{};  // noise strength
};

struct CouplingDistribution {
  std::variant<DiscreteCouplingSet, GaussianCoupling, WhiteNoiseCoupling> dist;
};

/// Validates a distribution for step size dt: every discrete J_n dt must be a
/// valid coupling (not a multiple of pi or odd multiple of pi/2) and at least
/// one nonzero J_n must have positive probability.
void validate_coupling(const CouplingDistribution& dist, double dt);

/// Effective averaged channel strength: sum p_n J_n^2 dt (discrete),
/// sigma^2 dt (Gaussian), Upsilon^2 (white noise).
double effective_rate(const CouplingDistribution& dist, double dt);

/// The averaged flow keeps the ideal dissipator with a rescaled rate:
/// gamma_eff D(sigma+) rho.
Matrix2 coupling_error_rhs(const DensityMatrix& rho,
                           const CouplingDistribution& dist, double dt);

/// One quenched-coupling protocol step: draws J from the distribution, then
/// performs a discrete generalized measurement with that coupling.
DiscreteStepResult quenched_coupling_step(const DensityMatrix& rho,
                                          const CouplingDistribution& dist,
                                          double dt, RngStream& stream);

/// One step under a white-noise coupling J -> Upsilon xi(t).  Blind mode
/// applies rho + Upsilon^2 D(U) rho dt; trajectory mode samples the Wiener
/// increment and the detector readout from the induced Kraus pair.
DensityMatrix whitenoise_coupling_step(const DensityMatrix& rho,
                                       double upsilon, double dt,
                                       RngStream* stream);

// --- Hamiltonian-noise errors -----------------------------------------------

/// Blocks of the perturbation h~_ds = [[A, B^dag], [B, C]] in the detector
/// basis; A and C must be Hermitian.  C never enters the reduced dynamics.
struct PerturbationBlocks {
  PerturbationBlocks(const Matrix2& a, const Matrix2& b, const Matrix2& c);

  const Matrix2& a() const { return a_; }
  const Matrix2& b() const { return b_; }
  const Matrix2& c() const { return c_; }

  /// h~_ds = I_d (x) G: A = C = G, B = 0.
  static PerturbationBlocks from_system_operator(const Matrix2& g);
  /// h~_ds = G (x) I_s.
  static PerturbationBlocks from_detector_operator(const Matrix2& g);

 private:
  Matrix2 a_, b_, c_;
};

/// Noise bookkeeping: gamma_tilde = eta * Upsilon^2 is what the dynamics
/// sees; Upsilon and eta are retained for provenance only.
struct NoiseParams {
  double upsilon{};
  double eta{};
  double gamma_tilde{};

  static NoiseParams from_rate(double gamma_tilde);
  static NoiseParams from_micro(double upsilon, double eta);
};

/// [gamma D(U) + gamma~ D(A) + gamma~ D(B)] rho.
Matrix2 perturbed_lindblad_rhs(const DensityMatrix& rho, double gamma,
                               const PerturbationBlocks& blocks,
                               double gamma_tilde);

enum class DiffusionForm {
  ExactUnitary,  // apply exp(-i sqrt(gamma~) A dX); Ito correction implicit
  FirstOrder,    // literal first-order expansion of the SME
};

/// One step of the jump-diffusive SME.  No-click: unitary diffusion
/// generated by A plus the deterministic backaction drift; click
/// (probability <gamma U^dag U + gamma~ B^dag B> dt): jump to the generally
/// mixed state (gamma U w U^dag + gamma~ B w B^dag) / <.>.
DensityMatrix jump_diffusive_step(const DensityMatrix& omega, double gamma,
                                  const PerturbationBlocks& blocks,
                                  double gamma_tilde, double dt,
                                  RngStream& stream,
                                  DiffusionForm form = DiffusionForm::ExactUnitary);

/// Closed-form stationary quantifiers for the sigma_x perturbation
/// (A = sigma_x, B = 0): exact triple and the leading small-gamma~ orders.
std::pair<QuantifierTriple, QuantifierTriple> stationary_quantifiers_sigma_x(
    double gamma, double gamma_tilde);

// --- commutation theorems ----------------------------------------------------

struct CommutationReport {
  /// max componentwise |E o Tr_d - Tr_d o E| over the reduced Bloch vector
  double mc_vs_mc{};
  /// worst componentwise (deviation - 3 SE) for the two-estimate comparison
  double mc_vs_mc_margin{};
  /// max deviation of either estimate from the deterministic flow e^{Lt}
  double mc_vs_closed{};
  /// worst componentwise (deviation - 3 SE) against the closed flow
  double mc_vs_closed_margin{};
  /// max entrywise deviation of the two sides of the time-ordered identity
  double identity_deviation{};
  bool passed() const {
    return mc_vs_mc_margin <= 0.0 && mc_vs_closed_margin <= 0.0;
  }
};

/// Monte-Carlo check that expectation over the white noise commutes with the
/// partial trace and reproduces the closed detector-system flow, plus the
/// deterministic time-ordered-exponential identity (product integration with
/// n_substeps slices).  The detector-system coupling is J = sqrt(gamma / t).
CommutationReport commutation_checks(double gamma,
                                     const PerturbationBlocks& blocks,
                                     double gamma_tilde, double t,
                                     std::size_t n_samples,
                                     std::uint64_t seed = 20240901,
                                     std::size_t n_substeps = 1000);

}  // namespace qsteer
