#include "cbq/bq.hpp"

#include <cmath>
#include <stdexcept>

#include "cbq/linalg.hpp"

namespace cbq {

BqPosterior bq_fit(const Kernel& kernel, const EmbeddingPair& pair, const Eigen::MatrixXd& samples,
                   const Eigen::VectorXd& f_vals, double lambda_x, const BqOptions& options) {
    const Eigen::Index n = samples.rows();
    if (n < 1) throw std::invalid_argument("bq_fit: need at least one sample");
    if (f_vals.size() != n) throw std::invalid_argument("bq_fit: sample/value count mismatch");
    if (!f_vals.allFinite()) throw std::invalid_argument("bq_fit: non-finite function values");
    if (!pair.kernel().same_spec(kernel))
        throw std::invalid_argument("bq_fit: embedding was built for a different kernel");

    const Eigen::MatrixXd K = kernel.gram(samples, samples);
    PsdSolver solver(K, lambda_x);

    const Eigen::VectorXd mu = pair.kme_all(samples);
    const Eigen::VectorXd centered = f_vals.array() - options.prior_mean;

    BqPosterior post;
    post.sample_count = static_cast<int>(n);
    post.condition_estimate = solver.condition_estimate();
    post.jitter_used = solver.jitter();
    post.mean = options.prior_mean + mu.dot(solver.solve(centered));

    const double prior_var = pair.initial_error();
    double var = prior_var - mu.dot(solver.solve(mu));
    if (var < 0.0) {
        // Tolerance widens with the conditioning of the solve: roundoff in the
        // quadratic form scales like eps * cond.  A genuinely broken embedding
        // produces a negative variance on the order of the initial error
        // itself, which still trips this check.
        const double tol = std::max(1e-10, 1e-13 * post.condition_estimate) * std::max(prior_var, 1e-12);
        if (var < -tol) throw std::runtime_error("bq_fit: posterior variance is substantially negative");
        var = 0.0;
    }
    post.variance = var;
    return post;
}

}  // namespace cbq
