#pragma once

#include <Eigen/Dense>

#include "cbq/embeddings.hpp"
#include "cbq/kernels.hpp"

namespace cbq {

// Bayesian-quadrature posterior N(mean, variance) on a single integral.
struct BqPosterior {
    double mean = 0.0;
    double variance = 0.0;
    int sample_count = 0;
    double condition_estimate = 1.0;
    double jitter_used = 0.0;
};

struct BqOptions {
    double prior_mean = 0.0;  // constant prior mean function
};

// Posterior on E_{X~P}[f(X)] from samples and noiseless evaluations:
//   mean = m0 + mu(x)^T (K + lambda Id)^{-1} (f - m0)
//   var  = E[k(X,X')] - mu(x)^T (K + lambda Id)^{-1} mu(x)
// Tiny negative variances (within 1e-10 of the initial error) clamp to zero;
// anything worse signals a broken embedding and throws.
BqPosterior bq_fit(const Kernel& kernel, const EmbeddingPair& pair, const Eigen::MatrixXd& samples,
                   const Eigen::VectorXd& f_vals, double lambda_x, const BqOptions& options = {});

}  // namespace cbq
