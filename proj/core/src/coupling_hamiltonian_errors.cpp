#include "qsteer/coupling_hamiltonian_errors.hpp"

#include <array>
#include <cmath>

namespace qsteer {

// --- coupling-strength errors ------------------------------------------------

void validate_coupling(const CouplingDistribution& dist, double dt) {
  if (const auto* d = std::get_if<DiscreteCouplingSet>(&dist.dist)) {
    if (d->entries.empty()) throw ValidationError("empty coupling set");
    double total = 0.0;
    bool has_nonzero = false;
    for (const auto& e : d->entries) {
      if (!(e.probability >= 0.0)) {
        throw ValidationError("coupling probabilities must be >= 0");
      }
      if (classify_coupling(std::abs(e.coupling), dt) != CouplingClass::Valid &&
          e.coupling != 0.0) {
        throw ValidationError("coupling " + std::to_string(e.coupling) +
                              " is erroneous for dt = " + std::to_string(dt));
      }
      if (e.coupling != 0.0 && e.probability > 0.0) has_nonzero = true;
      total += e.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ValidationError("coupling probabilities sum to " +
                            std::to_string(total));
    }
    if (!has_nonzero) {
      throw ValidationError(
          "coupling set needs at least one nonzero J with p > 0");
    }
    return;
  }
  if (const auto* g = std::get_if<GaussianCoupling>(&dist.dist)) {
    if (!(g->sigma > 0.0)) throw ValidationError("sigma must be > 0");
    return;
  }
  const auto& w = std::get<WhiteNoiseCoupling>(dist.dist);
  if (!(w.upsilon > 0.0)) throw ValidationError("Upsilon must be > 0");
}

double effective_rate(const CouplingDistribution& dist, double dt) {
  if (const auto* d = std::get_if<DiscreteCouplingSet>(&dist.dist)) {
    double rate = 0.0;
    for (const auto& e : d->entries) {
      rate += e.probability * e.coupling * e.coupling * dt;
    }
    return rate;
  }
  if (const auto* g = std::get_if<GaussianCoupling>(&dist.dist)) {
    return g->sigma * g->sigma * dt;
  }
  const auto& w = std::get<WhiteNoiseCoupling>(dist.dist);
  return w.upsilon * w.upsilon;
}

Matrix2 coupling_error_rhs(const DensityMatrix& rho,
                           const CouplingDistribution& dist, double dt) {
  return effective_rate(dist, dt) * dissipator(sigma_plus(), rho.matrix());
}

DiscreteStepResult quenched_coupling_step(const DensityMatrix& rho,
                                          const CouplingDistribution& dist,
                                          double dt, RngStream& stream) {
  if (const auto* d = std::get_if<DiscreteCouplingSet>(&dist.dist)) {
    std::vector<double> probs;
    probs.reserve(d->entries.size());
    for (const auto& e : d->entries) probs.push_back(e.probability);
    const std::size_t n = sample_categorical(stream, probs);
    return discrete_step_with_coupling(rho, d->entries[n].coupling, dt,
                                       &stream);
  }
  if (const auto* g = std::get_if<GaussianCoupling>(&dist.dist)) {
    const double j = g->sigma * stream.next_gaussian();
    return discrete_step_with_coupling(rho, j, dt, &stream);
  }
  throw ValidationError(
      "white-noise coupling is time dependent; use whitenoise_coupling_step");
}

DensityMatrix whitenoise_coupling_step(const DensityMatrix& rho,
                                       double upsilon, double dt,
                                       RngStream* stream) {
  if (!(upsilon > 0.0)) throw ValidationError("Upsilon must be > 0");
  const Matrix2 w = rho.matrix();
  if (stream == nullptr) {
    return DensityMatrix::normalized_from_matrix(
        w + (upsilon * upsilon * dt) * dissipator(sigma_plus(), w));
  }
  // Kraus pair of W(dt) = exp(-i Upsilon h0 dX) at the sampled increment:
  // M0 = I - (Upsilon^2 dX^2 / 2) U^dag U, M1 = -i Upsilon dX U.
  const double dx = sample_wiener(*stream, dt);
  const double u2x2 = upsilon * upsilon * dx * dx;
  const Matrix2 udag_u = sigma_minus() * sigma_plus();
  const Matrix2 m0 = identity2() - (0.5 * u2x2) * udag_u;
  const double p1_raw = u2x2 * (udag_u * w).trace().real();
  const Matrix2 m0_post = m0 * w * m0.adjoint();
  const double p0_raw = m0_post.trace().real();
  if (stream->next_uniform() * (p0_raw + p1_raw) < p1_raw) {
    return DensityMatrix::normalized_from_matrix(
        sigma_plus() * w * sigma_minus());
  }
  return DensityMatrix::normalized_from_matrix(m0_post);
}

// --- Hamiltonian-noise errors -------------------------------------------------

PerturbationBlocks::PerturbationBlocks(const Matrix2& a, const Matrix2& b,
                                       const Matrix2& c)
    : a_(a), b_(b), c_(c) {
  if (frobenius_distance(a, a.adjoint()) > 1e-12 * std::max(1.0, a.max_abs())) {
    throw ValidationError("block A must be Hermitian");
  }
  if (frobenius_distance(c, c.adjoint()) > 1e-12 * std::max(1.0, c.max_abs())) {
    throw ValidationError("block C must be Hermitian");
  }
}

PerturbationBlocks PerturbationBlocks::from_system_operator(const Matrix2& g) {
  return PerturbationBlocks(g, Matrix2{}, g);
}

PerturbationBlocks PerturbationBlocks::from_detector_operator(
    const Matrix2& g) {
  return PerturbationBlocks(g.m00.real() * identity2(), g.m10 * identity2(),
                            g.m11.real() * identity2());
}

NoiseParams NoiseParams::from_rate(double gamma_tilde) {
  if (!(gamma_tilde >= 0.0)) throw ValidationError("gamma~ must be >= 0");
  return {std::sqrt(gamma_tilde), 1.0, gamma_tilde};
}

NoiseParams NoiseParams::from_micro(double upsilon, double eta) {
  if (!(upsilon >= 0.0) || !(eta >= 0.0)) {
    throw ValidationError("Upsilon and eta must be >= 0");
  }
  return {upsilon, eta, eta * upsilon * upsilon};
}

Matrix2 perturbed_lindblad_rhs(const DensityMatrix& rho, double gamma,
                               const PerturbationBlocks& blocks,
                               double gamma_tilde) {
  const Matrix2 w = rho.matrix();
  return gamma * dissipator(sigma_plus(), w) +
         gamma_tilde * dissipator(blocks.a(), w) +
         gamma_tilde * dissipator(blocks.b(), w);
}

DensityMatrix jump_diffusive_step(const DensityMatrix& omega, double gamma,
                                  const PerturbationBlocks& blocks,
                                  double gamma_tilde, double dt,
                                  RngStream& stream, DiffusionForm form) {
  const bool no_noise = gamma_tilde == 0.0 || (blocks.a().max_abs() == 0.0 &&
                                               blocks.b().max_abs() == 0.0);
  if (no_noise) {
    // reduces to the ideal jump SME, bit for bit
    return wm_jump_step(omega, gamma, dt, stream);
  }
  const Matrix2 w = omega.matrix();
  const Matrix2 bdag_b = blocks.b().adjoint() * blocks.b();
  const Matrix2 udag_u = sigma_minus() * sigma_plus();
  const Matrix2 rate_op = gamma * udag_u + gamma_tilde * bdag_b;
  const double expect = (rate_op * w).trace().real();
  if (sample_jump(stream, std::max(0.0, expect * dt)) == 1) {
    if (expect <= 0.0) throw NumericalError("jump sampled at zero rate");
    const Matrix2 post =
        gamma * (sigma_plus() * w * sigma_minus()) +
        gamma_tilde * (blocks.b() * w * blocks.b().adjoint());
    return DensityMatrix::normalized_from_matrix(post);
  }
  const bool diffusive =
      gamma_tilde > 0.0 && blocks.a().max_abs() > 0.0;
  if (!diffusive) {
    const Matrix2 k = identity2() - (0.5 * dt) * rate_op;
    return DensityMatrix::normalized_from_matrix(k * w * k.adjoint());
  }
  const double dx = sample_wiener(stream, dt);
  if (form == DiffusionForm::FirstOrder) {
    // literal expansion: -i sqrt(g~)[A,w]dX + g~ D(A) w dt + drift terms
    const double root = std::sqrt(gamma_tilde);
    Matrix2 next = w;
    next += Complex(0.0, -root * dx) * commutator(blocks.a(), w);
    next += (gamma_tilde * dt) * dissipator(blocks.a(), w);
    next += dt * (expect * w - 0.5 * anticommutator(rate_op, w));
    return DensityMatrix::normalized_from_matrix(next);
  }
  // exact unitary diffusion; the Ito correction g~ D(A) dt emerges from
  // averaging the conjugation, positivity holds per trajectory
  const Matrix2 k = identity2() - (0.5 * dt) * rate_op;
  const Matrix2 kwk = k * w * k.adjoint();
  const Matrix2 v = unitary_exp_herm(blocks.a(), std::sqrt(gamma_tilde) * dx);
  return DensityMatrix::normalized_from_matrix(v * kwk * v.adjoint());
}

std::pair<QuantifierTriple, QuantifierTriple> stationary_quantifiers_sigma_x(
    double gamma, double gamma_tilde) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
  if (!(gamma_tilde >= 0.0)) throw ValidationError("gamma~ must be >= 0");
  const double den = gamma + 2.0 * gamma_tilde;
  const QuantifierTriple exact{
      (gamma + gamma_tilde) / den, gamma_tilde / den,
      2.0 * gamma_tilde * (gamma + gamma_tilde) / (den * den)};
  const QuantifierTriple leading{1.0 - gamma_tilde / gamma,
                                 gamma_tilde / gamma,
                                 2.0 * gamma_tilde / gamma};
  return {exact, leading};
}

// --- commutation theorems ------------------------------------------------------

namespace {

// Minimal dense complex 4x4 for the detector-system pair, basis |d> (x) |s>.
struct Mat4 {
  std::array<Complex, 16> m{};

  Complex& at(int r, int c) { return m[4 * r + c]; }
  const Complex& at(int r, int c) const { return m[4 * r + c]; }

  friend Mat4 operator+(const Mat4& a, const Mat4& b) {
    Mat4 out;
    for (int i = 0; i < 16; ++i) out.m[i] = a.m[i] + b.m[i];
    return out;
  }
  friend Mat4 operator-(const Mat4& a, const Mat4& b) {
    Mat4 out;
    for (int i = 0; i < 16; ++i) out.m[i] = a.m[i] - b.m[i];
    return out;
  }
  friend Mat4 operator*(Complex s, const Mat4& a) {
    Mat4 out;
    for (int i = 0; i < 16; ++i) out.m[i] = s * a.m[i];
    return out;
  }
  friend Mat4 operator*(const Mat4& a, const Mat4& b) {
    Mat4 out;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        Complex acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += a.at(r, k) * b.at(k, c);
        out.at(r, c) = acc;
      }
    }
    return out;
  }
  Mat4 adjoint() const {
    Mat4 out;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) out.at(r, c) = std::conj(at(c, r));
    return out;
  }
  double max_abs() const {
    double v = 0.0;
    for (const auto& e : m) v = std::max(v, std::abs(e));
    return v;
  }
};

Mat4 identity4() {
  Mat4 out;
  for (int i = 0; i < 4; ++i) out.at(i, i) = 1.0;
  return out;
}

Mat4 from_blocks(const Matrix2& b00, const Matrix2& b01, const Matrix2& b10,
                 const Matrix2& b11) {
  Mat4 out;
  auto put = [&](int rb, int cb, const Matrix2& blk) {
    out.at(2 * rb + 0, 2 * cb + 0) = blk.m00;
    out.at(2 * rb + 0, 2 * cb + 1) = blk.m01;
    out.at(2 * rb + 1, 2 * cb + 0) = blk.m10;
    out.at(2 * rb + 1, 2 * cb + 1) = blk.m11;
  };
  put(0, 0, b00);
  put(0, 1, b01);
  put(1, 0, b10);
  put(1, 1, b11);
  return out;
}

Matrix2 partial_trace_detector(const Mat4& m) {
  return {m.at(0, 0) + m.at(2, 2), m.at(0, 1) + m.at(2, 3),
          m.at(1, 0) + m.at(3, 2), m.at(1, 1) + m.at(3, 3)};
}

/// Taylor exponential with scaling and squaring; arguments here are small.
Mat4 expm(const Mat4& a) {
  int squarings = 0;
  double norm = a.max_abs() * 4.0;
  Mat4 scaled = a;
  while (norm > 0.25) {
    scaled = Complex(0.5, 0.0) * scaled;
    norm *= 0.5;
    ++squarings;
  }
  Mat4 result = identity4();
  Mat4 term = identity4();
  for (int k = 1; k <= 14; ++k) {
    term = Complex(1.0 / k, 0.0) * (term * scaled);
    result = result + term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Mat4 ad(const Mat4& h, const Mat4& x) { return h * x - x * h; }

struct DsGenerator {
  double coupling;      // J
  double gamma_tilde;   // eta Upsilon^2
  Mat4 h0;
  Mat4 h_tilde;

  Mat4 rhs(const Mat4& rho) const {
    return Complex(0.0, -coupling) * ad(h0, rho) -
           Complex(0.5 * gamma_tilde, 0.0) * ad(h_tilde, ad(h_tilde, rho));
  }
};

Mat4 rk4_flow(const DsGenerator& gen, Mat4 rho, double t, std::size_t steps) {
  const double h = t / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const Mat4 k1 = gen.rhs(rho);
    const Mat4 k2 = gen.rhs(rho + Complex(0.5 * h, 0.0) * k1);
    const Mat4 k3 = gen.rhs(rho + Complex(0.5 * h, 0.0) * k2);
    const Mat4 k4 = gen.rhs(rho + Complex(h, 0.0) * k3);
    rho = rho + Complex(h / 6.0, 0.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

/// exp(-i s h0) in closed form, using h0^3 = h0 for the canonical U = sigma+.
Mat4 h0_unitary(const Mat4& h0, const Mat4& h0_sq, double s) {
  return identity4() + Complex(0.0, -std::sin(s)) * h0 +
         Complex(std::cos(s) - 1.0, 0.0) * h0_sq;
}

}  // namespace

CommutationReport commutation_checks(double gamma,
                                     const PerturbationBlocks& blocks,
                                     double gamma_tilde, double t,
                                     std::size_t n_samples, std::uint64_t seed,
                                     std::size_t n_substeps) {
  if (!(gamma > 0.0) || !(t > 0.0)) {
    throw ValidationError("commutation_checks requires gamma, t > 0");
  }
  if (n_samples < 2) throw ValidationError("need at least 2 samples");

  const double coupling = std::sqrt(gamma / t);
  DsGenerator gen;
  gen.coupling = coupling;
  gen.gamma_tilde = gamma_tilde;
  gen.h0 = from_blocks(Matrix2{}, sigma_minus(), sigma_plus(), Matrix2{});
  gen.h_tilde = from_blocks(blocks.a(), blocks.b().adjoint(), blocks.b(),
                            blocks.c());

  const BlochVector r0{1.0 / std::sqrt(2.0), 0.0, -1.0 / std::sqrt(2.0)};
  const Matrix2 rho_s0 = density_from_bloch(r0).matrix();
  const Mat4 rho_ds0 = from_blocks(rho_s0, Matrix2{}, Matrix2{}, Matrix2{});

  // Monte-Carlo: W(t | xi) as a product of slice unitaries
  // exp(-i (J h0 dt + sqrt(g~) h_tilde dX)).
  const std::size_t mc_steps = 200;
  const double dt = t / static_cast<double>(mc_steps);
  const double root_gt = std::sqrt(gamma_tilde);

  auto sample_reduced = [&](RngStream& stream) {
    Mat4 rho = rho_ds0;
    for (std::size_t k = 0; k < mc_steps; ++k) {
      const double dx = sample_wiener(stream, dt);
      const Mat4 arg = Complex(0.0, -1.0) *
                       (Complex(coupling * dt, 0.0) * gen.h0 +
                        Complex(root_gt * dx, 0.0) * gen.h_tilde);
      const Mat4 w = expm(arg);
      rho = w * rho * w.adjoint();
    }
    return bloch_from_density(
        DensityMatrix::normalized_from_matrix(partial_trace_detector(rho)));
  };

  // estimate A: E[Tr_d W rho W^dag]; estimate B: Tr_d E[W rho W^dag].
  // Disjoint streams make the comparison a real statistical check.
  std::array<double, 3> sum_a{}, sq_a{}, sum_b{}, sq_b{};
  for (std::size_t i = 0; i < n_samples; ++i) {
    RngStream sa(seed, i);
    const BlochVector ba = sample_reduced(sa);
    sum_a[0] += ba.x;
    sum_a[1] += ba.y;
    sum_a[2] += ba.z;
    sq_a[0] += ba.x * ba.x;
    sq_a[1] += ba.y * ba.y;
    sq_a[2] += ba.z * ba.z;
    RngStream sb(seed, n_samples + i);
    const BlochVector bb = sample_reduced(sb);
    sum_b[0] += bb.x;
    sum_b[1] += bb.y;
    sum_b[2] += bb.z;
    sq_b[0] += bb.x * bb.x;
    sq_b[1] += bb.y * bb.y;
    sq_b[2] += bb.z * bb.z;
  }

  const double n = static_cast<double>(n_samples);
  const Mat4 flowed = rk4_flow(gen, rho_ds0, t, 2000);
  const BlochVector closed = bloch_from_density(
      DensityMatrix::normalized_from_matrix(partial_trace_detector(flowed)));
  const std::array<double, 3> closed_arr{closed.x, closed.y, closed.z};

  CommutationReport report;
  report.mc_vs_mc_margin = -1.0;
  report.mc_vs_closed_margin = -1.0;
  for (int c = 0; c < 3; ++c) {
    const double ma = sum_a[c] / n;
    const double mb = sum_b[c] / n;
    const double va = std::max(0.0, sq_a[c] / n - ma * ma) / (n - 1.0);
    const double vb = std::max(0.0, sq_b[c] / n - mb * mb) / (n - 1.0);
    report.mc_vs_mc = std::max(report.mc_vs_mc, std::abs(ma - mb));
    report.mc_vs_mc_margin = std::max(
        report.mc_vs_mc_margin, std::abs(ma - mb) - 3.0 * std::sqrt(va + vb));
    report.mc_vs_closed =
        std::max(report.mc_vs_closed,
                 std::max(std::abs(ma - closed_arr[c]),
                          std::abs(mb - closed_arr[c])));
    report.mc_vs_closed_margin =
        std::max(report.mc_vs_closed_margin,
                 std::max(std::abs(ma - closed_arr[c]) - 3.0 * std::sqrt(va),
                          std::abs(mb - closed_arr[c]) - 3.0 * std::sqrt(vb)));
  }

  // Deterministic identity: the interaction-picture time-ordered exponential
  // against the constant-generator flow, by product integration.
  const Mat4 h0_sq = gen.h0 * gen.h0;
  const double ds = t / static_cast<double>(n_substeps);
  Mat4 m = rho_ds0;
  auto k_apply = [&](double s, const Mat4& x) {
    const Mat4 e = h0_unitary(gen.h0, h0_sq, -coupling * s);  // exp(+i s J h0)
    const Mat4 inner = e.adjoint() * x * e;
    const Mat4 dd = ad(gen.h_tilde, ad(gen.h_tilde, inner));
    return Complex(-0.5 * gamma_tilde, 0.0) * (e * dd * e.adjoint());
  };
  for (std::size_t j = 0; j < n_substeps; ++j) {
    const double s0 = ds * static_cast<double>(j);
    const Mat4 k1 = k_apply(s0, m);
    const Mat4 k2 = k_apply(s0 + 0.5 * ds, m + Complex(0.5 * ds, 0.0) * k1);
    const Mat4 k3 = k_apply(s0 + 0.5 * ds, m + Complex(0.5 * ds, 0.0) * k2);
    const Mat4 k4 = k_apply(s0 + ds, m + Complex(ds, 0.0) * k3);
    m = m + Complex(ds / 6.0, 0.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const Mat4 efinal = h0_unitary(gen.h0, h0_sq, coupling * t);
  const Mat4 lhs = efinal * m * efinal.adjoint();
  const Mat4 rhs = rk4_flow(gen, rho_ds0, t, n_substeps);
  report.identity_deviation = (lhs - rhs).max_abs();
  return report;
}

}  // namespace qsteer
