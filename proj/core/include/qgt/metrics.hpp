#pragma once

#include "qgt/data.hpp"
#include "qgt/povm.hpp"
#include "qgt/sim.hpp"

namespace qgt {

// Bhattacharyya overlap sum_a sqrt(p(a) q(a)); 1 iff the distributions agree.
double classical_fidelity(const ProbDist& p, const ProbDist& q);

// Uhlmann fidelity Tr sqrt(sqrt(a) b sqrt(a)). Both inputs must be PSD up to
// the -1e-6 clip tolerance.
double quantum_fidelity(const DensityMatrix& a, const DensityMatrix& b);

// Tr(rho sigma_axis^(j) sigma_axis^(k)), identity elsewhere.
double pauli_correlation(const DensityMatrix& rho, int j, int k, Basis axis);

// Same correlation read off a Pauli-4 outcome distribution: marginalize onto
// the qubit pair, linear-invert the two-qubit marginal, take the expectation.
double pauli_correlation_from_dist(const ProbDist& dist, const PovmSet& p, int j, int k,
                                   Basis axis);

}  // namespace qgt
