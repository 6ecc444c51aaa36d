#include "qsteer/measurement_basis_errors.hpp"

#include <cmath>

namespace qsteer {

MeasurementBasisFamily::MeasurementBasisFamily(
    std::vector<MeasurementBasis> bases)
    : bases_(std::move(bases)) {
  if (bases_.empty()) throw ValidationError("basis family is empty");
  double total = 0.0;
  for (const auto& b : bases_) {
    if (std::abs(b.ket0.norm() - 1.0) > 1e-12 ||
        std::abs(b.ket1.norm() - 1.0) > 1e-12 ||
        std::abs(inner(b.ket0, b.ket1)) > 1e-12) {
      throw ValidationError("measurement basis is not orthonormal");
    }
    if (!(b.probability >= 0.0)) {
      throw ValidationError("basis probabilities must be >= 0");
    }
    total += b.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("basis probabilities sum to " +
                          std::to_string(total));
  }
}

MeasurementBasisFamily MeasurementBasisFamily::canonical() {
  return MeasurementBasisFamily({{ket_up(), ket_down(), 1.0}});
}

MeasurementBasisFamily MeasurementBasisFamily::canonical_plus_hadamard(
    double p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw ValidationError("p1 must be in [0,1]");
  const double s = 1.0 / std::sqrt(2.0);
  const Ket2 plus{s, s};
  const Ket2 minus{s, -s};
  return MeasurementBasisFamily(
      {{ket_up(), ket_down(), p1}, {plus, minus, 1.0 - p1}});
}

KrausPair basis_kraus(const MeasurementBasis& basis, double coupling,
                      double dt) {
  // W(dt)|0>_d has detector components (I + (cos - 1) U^dag U) on |0> and
  // -i sin U on |1>; the basis kets pick out the combination.
  const double c = std::cos(coupling * dt);
  const double s = std::sin(coupling * dt);
  const Matrix2 udag_u = sigma_minus() * sigma_plus();
  const Matrix2 top = identity2() + (c - 1.0) * udag_u;
  const Matrix2 bottom = Complex(0.0, -s) * sigma_plus();
  return {std::conj(basis.ket0.up) * top + std::conj(basis.ket0.down) * bottom,
          std::conj(basis.ket1.up) * top + std::conj(basis.ket1.down) * bottom};
}

RandomBasisStepResult random_basis_discrete_step(
    const DensityMatrix& omega, const MeasurementBasisFamily& family,
    double coupling, double dt, RngStream& stream) {
  const Matrix2 w = omega.matrix();
  std::vector<double> weights;
  std::vector<Matrix2> posts;
  weights.reserve(2 * family.bases().size());
  posts.reserve(2 * family.bases().size());
  for (const auto& basis : family.bases()) {
    const KrausPair k = basis_kraus(basis, coupling, dt);
    for (const Matrix2* m : {&k.m0, &k.m1}) {
      const Matrix2 post = (*m) * w * m->adjoint();
      posts.push_back(post);
      weights.push_back(
          std::max(0.0, basis.probability * post.trace().real()));
    }
  }
  double total = 0.0;
  for (double v : weights) total += v;
  // joint probabilities sum to 1 by Kraus completeness; rescale away rounding
  for (double& v : weights) v /= total;
  const std::size_t pick = sample_categorical(stream, weights);
  return {pick / 2,
          pick % 2 == 0 ? MeasurementOutcome::NoClick
                        : MeasurementOutcome::Click,
          DensityMatrix::normalized_from_matrix(posts[pick])};
}

namespace {

Ket2 normalized_or_throw(const Ket2& k) {
  const double n = k.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw NumericalError("hybrid step produced an unnormalizable ket");
  }
  return {k.up / n, k.down / n};
}

}  // namespace

Ket2 hybrid_sme_step(const Ket2& psi, double p1, double gamma, double dt,
                     RngStream& stream, WienerCentering centering) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw ValidationError("p1 must be in [0,1]");
  // L = i sqrt(gamma) U with U = sigma+, so L^dag L = gamma |down><down|.
  const double root_g = std::sqrt(gamma);
  const bool correct_basis = stream.next_uniform() < p1;
  if (correct_basis) {
    const double excited = std::norm(psi.down);
    const double p_click = gamma * excited * dt;
    if (sample_jump(stream, std::max(0.0, p_click)) == 1) {
      if (excited <= 0.0) {
        throw NumericalError("jump sampled from the dark state");
      }
      return {psi.down / std::abs(psi.down) * Complex(0.0, 1.0), 0.0};
    }
    // no-click drift: K = I - (dt/2) L^dag L
    const Ket2 next{psi.up, (1.0 - 0.5 * gamma * dt) * psi.down};
    return normalized_or_throw(next);
  }
  // diffusive branch: M(dZ) = I - (dt/2) L^dag L + dZ L applied and
  // renormalized; the physical readout dZ has mean <L + L^dag> dt
  const Complex l_psi_up = Complex(0.0, root_g) * psi.down;  // (L psi).up
  const double tau =
      2.0 * (std::conj(psi.up) * l_psi_up).real();  // <L + L^dag>
  const double dw = sample_wiener(stream, dt);
  const double dz =
      centering == WienerCentering::Recentered ? dw + tau * dt : dw;
  const Ket2 next{psi.up + dz * l_psi_up,
                  (1.0 - 0.5 * gamma * dt) * psi.down};
  return normalized_or_throw(next);
}

DensityMatrix hybrid_sme_step(const DensityMatrix& omega, double p1,
                              double gamma, double dt, RngStream& stream,
                              WienerCentering centering) {
  if (linear_entropy(omega) > kPositivityTol) {
    throw ValidationError("hybrid SME acts on pure states");
  }
  // extract the ket of a pure state
  const BlochVector r = bloch_from_density(omega);
  const double theta = std::acos(std::clamp(r.z, -1.0, 1.0));
  const double phi = std::atan2(-r.y, r.x);  // chi = (x - i y)/2 phase
  const Ket2 psi{std::cos(0.5 * theta),
                 std::exp(Complex(0.0, -phi)) * std::sin(0.5 * theta)};
  return pure_state(hybrid_sme_step(psi, p1, gamma, dt, stream, centering));
}

namespace {

class HybridTrajectory final : public Trajectory {
 public:
  HybridTrajectory(const DensityMatrix& initial, double p1, double gamma,
                   double dt)
      : p1_(p1), gamma_(gamma), dt_(dt) {
    if (linear_entropy(initial) > kPositivityTol) {
      throw ValidationError("hybrid SME needs a pure initial state");
    }
    const BlochVector r = bloch_from_density(initial);
    const double theta = std::acos(std::clamp(r.z, -1.0, 1.0));
    const double phi = std::atan2(-r.y, r.x);
    psi_ = Ket2{std::cos(0.5 * theta),
                std::exp(Complex(0.0, -phi)) * std::sin(0.5 * theta)};
  }
  void step(RngStream& stream) override {
    psi_ = hybrid_sme_step(psi_, p1_, gamma_, dt_, stream);
  }
  DensityMatrix state() const override { return pure_state(psi_); }

 private:
  double p1_, gamma_, dt_;
  Ket2 psi_;
};

}  // namespace

TrajectoryFactory make_hybrid_trajectory_factory(double p1, double gamma,
                                                 double dt) {
  return [=](const DensityMatrix& initial) {
    return std::make_unique<HybridTrajectory>(initial, p1, gamma, dt);
  };
}

double blind_equivalence_check(const MeasurementBasisFamily& family,
                               double coupling, double dt,
                               const DensityMatrix& rho0,
                               std::size_t n_steps) {
  std::vector<KrausPair> kraus;
  kraus.reserve(family.bases().size());
  for (const auto& b : family.bases()) {
    kraus.push_back(basis_kraus(b, coupling, dt));
  }
  const KrausPair ideal = kraus_pair(coupling, dt);
  Matrix2 random_state = rho0.matrix();
  Matrix2 ideal_state = rho0.matrix();
  double worst = 0.0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    Matrix2 next{};
    for (std::size_t i = 0; i < kraus.size(); ++i) {
      const double p = family.bases()[i].probability;
      next += p * (kraus[i].m0 * random_state * kraus[i].m0.adjoint());
      next += p * (kraus[i].m1 * random_state * kraus[i].m1.adjoint());
    }
    random_state = next;
    ideal_state = ideal.m0 * ideal_state * ideal.m0.adjoint() +
                  ideal.m1 * ideal_state * ideal.m1.adjoint();
    worst = std::max(worst, frobenius_distance(random_state, ideal_state));
  }
  return worst;
}

}  // namespace qsteer
