#pragma once

#include <Eigen/Dense>

namespace cbq {

// Cholesky solver for K + reg*Id (scalar) or K + diag(reg) (vector).  If the
// factorisation fails, jitter escalates through {1e-10, 1e-8, 1e-6} * tr(K)/n
// on top of the requested regulariser; the jitter actually used is recorded.
class PsdSolver {
public:
    PsdSolver(const Eigen::MatrixXd& K, double reg);
    PsdSolver(const Eigen::MatrixXd& K, const Eigen::VectorXd& diag_reg);

    Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const { return llt_.solve(B); }
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

    // log-determinant of the regularised matrix, from the Cholesky diagonal
    double log_det() const;
    double jitter() const { return jitter_; }
    int jitter_attempts() const { return attempts_; }
    // cheap condition estimate from the Cholesky diagonal
    double condition_estimate() const;
    Eigen::Index size() const { return llt_.matrixLLT().rows(); }

private:
    void factorize(const Eigen::MatrixXd& K, const Eigen::VectorXd& diag_reg);

    Eigen::LLT<Eigen::MatrixXd> llt_;
    double jitter_ = 0.0;
    int attempts_ = 0;
};

// (K + reg*Id)^{-1} B; jitter_used receives the escalated jitter if any.
Eigen::MatrixXd regularized_cholesky_solve(const Eigen::MatrixXd& K, double reg, const Eigen::MatrixXd& B,
                                           double* jitter_used = nullptr);

}  // namespace cbq
