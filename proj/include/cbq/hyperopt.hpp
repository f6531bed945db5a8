#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cbq/kernels.hpp"

namespace cbq {

// Empirical-Bayes search grids.
struct HyperGrid {
    std::vector<double> amplitudes{1.0, 10.0, 100.0, 1000.0};
    std::vector<double> lengthscales{0.1, 0.3, 1.0, 3.0, 10.0};
    std::vector<double> lambdas_theta{0.01, 0.1, 1.0};
};

struct Standardization {
    Eigen::VectorXd values;
    double mean = 0.0;
    double stddev = 1.0;
};

// Subtract the empirical mean, divide by the (population) standard deviation.
// Throws "degenerate targets" for constant input.
Standardization standardize(const Eigen::VectorXd& values);

// log N(f | m, K + lambda Id) computed through the Cholesky log-determinant.
double stage1_log_marginal(const Kernel& k_x, const Eigen::MatrixXd& samples, const Eigen::VectorXd& f_vals,
                           double lambda_x, double prior_mean = 0.0);

// Heteroscedastic version: the diagonal is lambda_theta + sigma2_bq entrywise.
double stage2_log_marginal(const Kernel& k_theta, const Eigen::MatrixXd& thetas, const Eigen::VectorXd& means,
                           const Eigen::VectorXd& variances, double lambda_theta, double prior_mean = 0.0);

struct Stage1Choice {
    double amplitude = 1.0;
    double lengthscale = 1.0;
    double log_marginal = 0.0;
};

struct Stage2Choice {
    double amplitude = 1.0;
    double lengthscale = 1.0;
    double lambda_theta = 0.0;
    double log_marginal = 0.0;
};

// Grid argmax of the log-marginal likelihood over amplitude x lengthscale.
// Cells are scanned lengthscale-major, ascending, with strict improvement, so
// ties resolve to the smallest lengthscale then the smallest amplitude.
Stage1Choice grid_search_stage1(const Eigen::MatrixXd& samples, const Eigen::VectorXd& f_std,
                                const std::function<Kernel(double lengthscale, double amplitude)>& make_kernel,
                                double lambda_x, const HyperGrid& grid = {});

Stage2Choice grid_search_stage2(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& means_std,
                                const Eigen::VectorXd& variances_std,
                                const std::function<Kernel(double lengthscale, double amplitude)>& make_kernel,
                                const HyperGrid& grid = {});

// Central finite differences with h_i = 1e-4 (1 + |x_i|).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x);
// Five-point stencil, used to cross-check the two-point version.
Eigen::VectorXd fd_gradient5(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x);

struct SteinDescentResult {
    double constant = 0.0;
    double lengthscale = 1.0;
    double amplitude = 1.0;
    double log_marginal = 0.0;
    double initial_log_marginal = 0.0;
};

struct SteinDescentOptions {
    double init_constant = 0.0;
    double init_lengthscale = 1.0;
    double init_amplitude = 1.0;
    double step = 0.05;
    int iterations = 300;
};

// Full-batch gradient ascent on the stage-1 log-marginal in (c, log l, log A)
// with numerical gradients; deterministic, returns the best iterate seen.
SteinDescentResult stein_c_descent(
    const std::function<Kernel(double constant, double lengthscale, double amplitude)>& make_stein,
    const Eigen::MatrixXd& samples, const Eigen::VectorXd& f_std, double lambda_x,
    const SteinDescentOptions& options = {});

SteinDescentResult stein_c_descent(const std::function<Kernel(double lengthscale, double amplitude)>& make_base,
                                   const ScoreFn& score, const Eigen::MatrixXd& samples,
                                   const Eigen::VectorXd& f_std, double lambda_x,
                                   const SteinDescentOptions& options = {});

}  // namespace cbq
