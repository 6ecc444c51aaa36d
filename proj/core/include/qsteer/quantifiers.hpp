#pragma once

// Distance measures between a steered state and the ideal target, plus the
// linear entropy ("impurity").

#include "qsteer/qmat.hpp"

namespace qsteer {

struct QuantifierTriple {
  double fidelity{};        // in [0, 1]
  double trace_distance{};  // in [0, 1]
  double linear_entropy{};  // in [0, 1/2] for a qubit
};

/// Uhlmann fidelity via the qubit closed form
/// F = Tr(rho omega) + 2 sqrt(det rho * det omega).
double fidelity(const DensityMatrix& rho, const DensityMatrix& omega);

/// Half the trace norm of rho - omega; for qubits this is half the Euclidean
/// distance between the Bloch vectors.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& omega);

/// L = 1 - Tr rho^2.
double linear_entropy(const DensityMatrix& rho);

/// All three quantifiers against the fixed target |up><up|:
/// (zeta, sqrt((1-zeta)^2 + |chi|^2), 1 - Tr rho^2).
QuantifierTriple target_metrics(const DensityMatrix& rho);

}  // namespace qsteer
