#include "cbq/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace cbq {

PsdSolver::PsdSolver(const Eigen::MatrixXd& K, double reg) {
    if (!(reg >= 0.0)) throw std::invalid_argument("PsdSolver: regulariser must be nonnegative");
    factorize(K, Eigen::VectorXd::Constant(K.rows(), reg));
}

PsdSolver::PsdSolver(const Eigen::MatrixXd& K, const Eigen::VectorXd& diag_reg) {
    if (diag_reg.size() != K.rows()) throw std::invalid_argument("PsdSolver: diagonal size mismatch");
    if (diag_reg.size() > 0 && !(diag_reg.minCoeff() >= 0.0))
        throw std::invalid_argument("PsdSolver: regulariser must be nonnegative");
    factorize(K, diag_reg);
}

void PsdSolver::factorize(const Eigen::MatrixXd& K, const Eigen::VectorXd& diag_reg) {
    if (K.rows() != K.cols()) throw std::invalid_argument("PsdSolver: matrix must be square");
    if (!K.isApprox(K.transpose(), 1e-10)) throw std::invalid_argument("PsdSolver: matrix must be symmetric");
    const Eigen::Index n = K.rows();
    double scale = K.trace() / static_cast<double>(n);
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
    const double ladder[] = {0.0, 1e-10, 1e-8, 1e-6};
    for (int step = 0; step < 4; ++step) {
        const double jitter = ladder[step] * scale;
        Eigen::MatrixXd M = K;
        M.diagonal() += diag_reg;
        M.diagonal().array() += jitter;
        llt_.compute(M);
        attempts_ = step + 1;
        if (llt_.info() == Eigen::Success && std::isfinite(llt_.matrixLLT()(n - 1, n - 1))) {
            jitter_ = jitter;
            return;
        }
    }
    throw std::runtime_error("PsdSolver: Cholesky failed at maximum jitter");
}

double PsdSolver::log_det() const {
    double acc = 0.0;
    const auto& L = llt_.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) acc += 2.0 * std::log(L(i, i));
    return acc;
}

double PsdSolver::condition_estimate() const {
    const auto& L = llt_.matrixLLT();
    double lo = L(0, 0), hi = L(0, 0);
    for (Eigen::Index i = 1; i < L.rows(); ++i) {
        lo = std::min(lo, L(i, i));
        hi = std::max(hi, L(i, i));
    }
    const double r = hi / lo;
    return r * r;
}

Eigen::MatrixXd regularized_cholesky_solve(const Eigen::MatrixXd& K, double reg, const Eigen::MatrixXd& B,
                                           double* jitter_used) {
    PsdSolver solver(K, reg);
    if (jitter_used) *jitter_used = solver.jitter();
    return solver.solve(B);
}

}  // namespace cbq
