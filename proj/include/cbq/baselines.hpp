#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cbq/cbq.hpp"
#include "cbq/embeddings.hpp"
#include "cbq/kernels.hpp"

namespace cbq {

// Plain Monte Carlo mean.
double mc_estimate(const Eigen::VectorXd& f_vals);

// Dataset shared by the sampling-based estimators: T groups of N samples
// drawn from P_{theta_t}, with x-only integrand values.
struct IsDataset {
    Eigen::MatrixXd thetas;               // T x p
    std::vector<Eigen::MatrixXd> samples;  // per t: N x d
    std::vector<Eigen::VectorXd> f_vals;   // per t: N
};

enum class IsNormalization {
    Verbatim,   // sum over t, i divided by T only
    PerSample,  // divided by N*T, the variant used for benchmarking
};

// Importance-sampling estimate of I(theta*) reusing all N*T samples:
//   sum_t sum_i p_{theta*}(x_i^t) / p_{theta_t}(x_i^t) f(x_i^t) / norm.
double is_estimate(const IsDataset& data,
                   const std::function<double(const Eigen::VectorXd& theta, const Eigen::VectorXd& x)>& log_density,
                   const Eigen::VectorXd& theta_star, IsNormalization normalization);

// Ridge-regularised polynomial regression on the total-degree monomial basis
// (stage 2 of LSMC).  Columns are scaled to unit variance before the ridge
// penalty is applied; the intercept is not penalised.
class PolynomialModel {
public:
    static PolynomialModel fit(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& targets, int order,
                               double ridge);
    double predict(const Eigen::VectorXd& theta) const;
    int order() const { return order_; }
    int coefficient_count() const { return static_cast<int>(coef_.size()); }

    static int monomial_count(int order, int dim);

private:
    int order_ = 1;
    std::vector<std::vector<int>> exponents_;
    Eigen::VectorXd coef_;
    Eigen::VectorXd col_scale_;
};

PolynomialModel lsmc_fit(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& mc_means, int order, double ridge);
double lsmc_predict(const PolynomialModel& model, const Eigen::VectorXd& theta);

// Kernel ridge regression over theta (stage 2 of KLSMC): identical to the
// CBQ stage-2 solve with all stage-1 variances set to zero, so the
// regulariser is the scalar lambda Id.
CbqModel klsmc_fit(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& mc_means, const Kernel& k_theta,
                   double lambda_theta, const CbqOptions& options = {});
double klsmc_predict(const CbqModel& model, const Eigen::VectorXd& theta);

// Multi-output BQ: one GP over all N*T samples.  The x-only form conditions
// on k_x alone; the (x, theta) form multiplies in k_theta elementwise, with
// theta_t repeated N times.  Cost is cubic in N*T, so fits above max_points
// are rejected.
struct MobqOptions {
    double lambda_x = 0.0;
    int max_points = 3000;
};

class MobqModel {
public:
    static MobqModel fit(const std::vector<Eigen::MatrixXd>& samples, const std::vector<Eigen::VectorXd>& f_vals,
                         const Kernel& k_x, const MobqOptions& options = {});
    static MobqModel fit_xtheta(const std::vector<Eigen::MatrixXd>& samples,
                                const std::vector<Eigen::VectorXd>& f_vals, const Kernel& k_x,
                                const Kernel& k_theta, const Eigen::MatrixXd& thetas,
                                const MobqOptions& options = {});

    // embedding_for builds the (k_x, P_{theta*}) embedding evaluated on the
    // concatenated samples.
    double predict(const EmbeddingPair& pair_at_theta_star) const;
    double predict(const EmbeddingPair& pair_at_theta_star, const Eigen::VectorXd& theta_star) const;

    int point_count() const { return static_cast<int>(all_samples_.rows()); }
    const Eigen::MatrixXd& points() const { return all_samples_; }
    double jitter() const { return jitter_; }

private:
    Eigen::MatrixXd all_samples_;
    Eigen::MatrixXd all_thetas_;  // empty for the x-only form
    Eigen::VectorXd weights_;     // (K + lambda Id)^{-1} f
    Kernel k_theta_ = Kernel::gaussian_rbf(1.0, 1.0);
    bool has_theta_ = false;
    double jitter_ = 0.0;
};

double mobq_estimate(const std::vector<Eigen::MatrixXd>& samples, const std::vector<Eigen::VectorXd>& f_vals,
                     const Kernel& k_x, const EmbeddingPair& pair_at_theta_star, const MobqOptions& options = {});

}  // namespace cbq
