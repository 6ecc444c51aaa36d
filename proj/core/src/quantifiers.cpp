#include "qsteer/quantifiers.hpp"

#include <algorithm>
#include <cmath>

namespace qsteer {

double fidelity(const DensityMatrix& rho, const DensityMatrix& omega) {
  const double tr_ro = rho.zeta() * omega.zeta() +
                       (1.0 - rho.zeta()) * (1.0 - omega.zeta()) +
                       2.0 * (rho.chi() * std::conj(omega.chi())).real();
  // dets can round to small negatives for pure states
  const double det_r =
      std::max(0.0, rho.zeta() * (1.0 - rho.zeta()) - std::norm(rho.chi()));
  const double det_o = std::max(
      0.0, omega.zeta() * (1.0 - omega.zeta()) - std::norm(omega.chi()));
  const double f = tr_ro + 2.0 * std::sqrt(det_r * det_o);
  return std::clamp(f, 0.0, 1.0);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& omega) {
  return 0.5 * (bloch_from_density(rho) - bloch_from_density(omega)).norm();
}

double linear_entropy(const DensityMatrix& rho) {
  const double z = rho.zeta();
  const double purity = z * z + (1.0 - z) * (1.0 - z) + 2.0 * std::norm(rho.chi());
  return std::max(0.0, 1.0 - purity);
}

QuantifierTriple target_metrics(const DensityMatrix& rho) {
  const double one_minus_zeta = 1.0 - rho.zeta();
  return {rho.zeta(),
          std::sqrt(one_minus_zeta * one_minus_zeta + std::norm(rho.chi())),
          linear_entropy(rho)};
}

}  // namespace qsteer
