#pragma once

#include "qgt/data.hpp"
#include "qgt/povm.hpp"
#include "qgt/sim.hpp"

namespace qgt {

struct MleConfig {
    int max_iters = 5000;
    double tol = 1e-10;       // relative objective change
    double grad_tol = 1e-9;   // Frobenius norm of the objective gradient
    double step = 1.0;        // initial gradient step, halved by line search
};

struct PhysicalFit {
    DensityMatrix rho;  // PSD, trace 1
    ProbDist p_mle;     // Born distribution of rho
    double objective = 0.0;  // ||p_model - p_mle||^2
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // accepted-step objectives, non-increasing
};

// Projects a (possibly unrealizable) POVM distribution onto the set of
// distributions generated by physical density matrices, minimizing
// ||p_model - P(rho)||^2 by projected gradient descent with backtracking.
// Initialized from the PSD-projected linear inversion of p_model.
PhysicalFit mle_project(const ProbDist& p_model, const PovmSet& povm, const MleConfig& cfg = {});

}  // namespace qgt
