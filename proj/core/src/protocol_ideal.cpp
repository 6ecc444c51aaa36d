#include "qsteer/protocol_ideal.hpp"

#include <cmath>

namespace qsteer {

namespace {
constexpr double kImpossibleClick = 1e-15;
}

ProtocolParams::ProtocolParams(double gamma, double dt)
    : gamma_(gamma), dt_(dt) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
}

double ProtocolParams::coupling() const { return std::sqrt(gamma_ / dt_); }

CouplingClass classify_coupling(double coupling, double dt) {
  if (!(coupling >= 0.0) || !(dt >= 0.0)) {
    throw ValidationError("classify_coupling requires J, dt >= 0");
  }
  const double x = coupling * dt;
  const double half_pi = 0.5 * M_PI;
  const double m = std::round(x / half_pi);
  if (std::abs(x - m * half_pi) <= 1e-9) {
    const long long k = static_cast<long long>(m);
    return (k % 2 == 0) ? CouplingClass::PiMultiple
                        : CouplingClass::HalfPiOddMultiple;
  }
  return CouplingClass::Valid;
}

KrausPair kraus_pair(double coupling, double dt) {
  if (!(coupling >= 0.0) || !(dt >= 0.0)) {
    throw ValidationError("kraus_pair requires J, dt >= 0");
  }
  const double c = std::cos(coupling * dt);
  const double s = std::sin(coupling * dt);
  return {Matrix2{1.0, 0.0, 0.0, c}, Matrix2{0.0, s, 0.0, 0.0}};
}

DiscreteStepResult discrete_step_with_coupling(const DensityMatrix& rho,
                                               double coupling, double dt,
                                               RngStream* stream) {
  const KrausPair k = kraus_pair(coupling, dt);
  if (stream == nullptr) {
    const Matrix2 blind = k.m0 * rho.matrix() * k.m0.adjoint() +
                          k.m1 * rho.matrix() * k.m1.adjoint();
    return {MeasurementOutcome::Blind,
            DensityMatrix::normalized_from_matrix(blind)};
  }
  const double s = std::sin(coupling * dt);
  const double p1 = s * s * (1.0 - rho.zeta());  // Tr[M1^dag M1 rho]
  if (p1 >= kImpossibleClick && stream->next_uniform() < p1) {
    return {MeasurementOutcome::Click, target_state()};
  }
  if (p1 < kImpossibleClick) {
    stream->next_uniform();  // keep draw count independent of the state
  }
  const Matrix2 post = k.m0 * rho.matrix() * k.m0.adjoint();
  return {MeasurementOutcome::NoClick,
          DensityMatrix::normalized_from_matrix(post)};
}

DiscreteStepResult discrete_step(const DensityMatrix& rho,
                                 const ProtocolParams& params,
                                 RngStream* stream) {
  return discrete_step_with_coupling(rho, params.coupling(), params.dt(),
                                     stream);
}

DensityMatrix jump_sme_step(const DensityMatrix& omega, const Matrix2& u,
                            const Matrix2& udag_u, double rate, double dt,
                            RngStream& stream) {
  const Matrix2 w = omega.matrix();
  const double expect = (udag_u * w).trace().real();
  const double p_click = rate * expect * dt;
  if (sample_jump(stream, std::max(0.0, p_click)) == 1) {
    if (expect <= 0.0) {
      throw NumericalError("jump sampled from a dark state");
    }
    return DensityMatrix::normalized_from_matrix(u * w * u.adjoint());
  }
  // no-click Kraus K = I - (rate dt / 2) U^dag U; normalization supplies the
  // <U^dag U> counterterm of the anticommutator drift
  const Matrix2 k = identity2() - (0.5 * rate * dt) * udag_u;
  return DensityMatrix::normalized_from_matrix(k * w * k.adjoint());
}

DensityMatrix wm_jump_step(const DensityMatrix& omega, double gamma, double dt,
                           RngStream& stream) {
  static const Matrix2 u = sigma_plus();
  static const Matrix2 udag_u = sigma_minus() * sigma_plus();
  return jump_sme_step(omega, u, udag_u, gamma, dt, stream);
}

BlochVector ideal_lindblad_solution(const BlochVector& r0, double gamma,
                                    double t) {
  const double eh = std::exp(-0.5 * gamma * t);
  const double ef = std::exp(-gamma * t);
  return {r0.x * eh, r0.y * eh, 1.0 - (1.0 - r0.z) * ef};
}

Matrix2 ideal_lindblad_rhs(const DensityMatrix& rho, double gamma) {
  return gamma * dissipator(sigma_plus(), rho.matrix());
}

}  // namespace qsteer
