#include "qgt/mle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgt {

namespace {

// Eigenvalue clip at zero followed by trace renormalization.
CMatrix project_psd(const CMatrix& m) {
    EigDecomposition eig = hermitian_eig(m);
    const std::size_t n = m.rows;
    std::vector<double> lambda(eig.eigenvalues);
    double tr = 0.0;
    for (double& l : lambda) {
        l = std::max(l, 0.0);
        tr += l;
    }
    CMatrix out(n, n);
    if (tr <= 0.0) {
        // fully clipped: fall back to the maximally mixed state
        for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0 / static_cast<double>(n);
        return out;
    }
    for (double& l : lambda) l /= tr;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (lambda[k] == 0.0) continue;
                s += eig.eigenvectors.at(i, k) * lambda[k] * std::conj(eig.eigenvectors.at(j, k));
            }
            out.at(i, j) = s;
        }
    // keep the iterate exactly Hermitian
    for (std::size_t i = 0; i < n; ++i) {
        out.at(i, i).imag(0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx avg = 0.5 * (out.at(i, j) + std::conj(out.at(j, i)));
            out.at(i, j) = avg;
            out.at(j, i) = std::conj(avg);
        }
    }
    return out;
}

double objective_of(const ProbDist& born, const ProbDist& target) {
    double s = 0.0;
    for (std::size_t i = 0; i < born.values.size(); ++i) {
        const double r = born.values[i] - target.values[i];
        s += r * r;
    }
    return s;
}

}  // namespace

PhysicalFit mle_project(const ProbDist& p_model, const PovmSet& povm, const MleConfig& cfg) {
    if (p_model.alphabet != povm.alphabet())
        throw std::invalid_argument("mle_project: alphabet mismatch");
    if (povm.kind != PovmKind::Pauli4)
        throw std::invalid_argument("mle_project: coarse-grain to pauli4 first");
    const int n = p_model.n_qubits;

    CMatrix rho(0, 0);
    try {
        rho = project_psd(reconstruct_linear_inversion(p_model, povm).matrix);
    } catch (const std::exception&) {
        const std::size_t dim = std::size_t(1) << n;
        rho = CMatrix(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) rho.at(i, i) = 1.0 / static_cast<double>(dim);
    }

    auto born = [&](const CMatrix& m) {
        DensityMatrix d;
        d.n_qubits = n;
        d.matrix = m;
        return povm_distribution(d, povm);
    };

    ProbDist current = born(rho);
    double obj = objective_of(current, p_model);
    std::vector<double> trace = {obj};
    double step = cfg.step;
    bool converged = false;
    int iter = 0;

    for (; iter < cfg.max_iters; ++iter) {
        // gradient in the Hermitian inner product: 2 sum_a r_a M^(a)
        std::vector<double> residual(current.values.size());
        for (std::size_t i = 0; i < residual.size(); ++i)
            residual[i] = 2.0 * (current.values[i] - p_model.values[i]);
        const CMatrix grad = povm_weighted_sum(residual, povm, n);
        if (grad.frobenius_norm() < cfg.grad_tol) {
            converged = true;
            break;
        }

        bool accepted = false;
        double eta = step;
        for (int halvings = 0; halvings <= 30; ++halvings) {
            CMatrix candidate = rho;
            candidate -= grad * cplx(eta);
            candidate = project_psd(candidate);
            ProbDist cand_born = born(candidate);
            const double cand_obj = objective_of(cand_born, p_model);
            if (cand_obj < obj) {
                const double rel_change = (obj - cand_obj) / std::max(obj, 1e-300);
                rho = std::move(candidate);
                current = std::move(cand_born);
                obj = cand_obj;
                trace.push_back(obj);
                step = std::min(eta * 2.0, cfg.step);  // geometric step recovery
                accepted = true;
                if (rel_change < cfg.tol) converged = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted || converged) {
            // no descent direction left within the line search: stationary
            if (!accepted) converged = true;
            ++iter;
            break;
        }
    }

    PhysicalFit fit;
    fit.rho = DensityMatrix::from_matrix(n, rho, /*check_psd=*/true);
    fit.p_mle = std::move(current);
    fit.objective = obj;
    fit.iterations = iter;
    fit.converged = converged;
    fit.objective_trace = std::move(trace);
    return fit;
}

}  // namespace qgt
