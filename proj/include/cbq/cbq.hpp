#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cbq/bq.hpp"
#include "cbq/kernels.hpp"
#include "cbq/linalg.hpp"

namespace cbq {

struct CbqOptions {
    // Standardize the stage-1 means (subtract mean, divide by std) before
    // fitting; stage-1 variances are divided by std^2 to stay unit-consistent
    // and predictions are mapped back, including the variance (times std^2).
    bool standardize = true;
    double prior_mean = 0.0;  // used when standardize is off
};

// Heteroscedastic GP over theta fitted to stage-1 posteriors: the Gram matrix
// is regularised by the diagonal vector lambda_theta + sigma2_bq(theta_t),
// entrywise, not by a scalar.
class CbqModel {
public:
    static CbqModel fit(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& means,
                        const Eigen::VectorXd& variances, const Kernel& k_theta, double lambda_theta,
                        const CbqOptions& options = {});
    static CbqModel fit(const Eigen::MatrixXd& thetas, const std::vector<BqPosterior>& posteriors,
                        const Kernel& k_theta, double lambda_theta, const CbqOptions& options = {});

    std::pair<double, double> predict(const Eigen::VectorXd& theta_star) const;
    std::pair<Eigen::VectorXd, Eigen::MatrixXd> predict_joint(const Eigen::MatrixXd& theta_stars) const;

    const Eigen::VectorXd& alpha() const { return alpha_; }
    double target_shift() const { return shift_; }
    double target_scale() const { return scale_; }
    double jitter() const { return solver_.jitter(); }
    int train_count() const { return static_cast<int>(thetas_.rows()); }
    const Kernel& kernel() const { return kernel_; }

private:
    CbqModel(Eigen::MatrixXd thetas, Kernel k, PsdSolver solver)
        : thetas_(std::move(thetas)), kernel_(std::move(k)), solver_(std::move(solver)) {}

    Eigen::VectorXd cross_vector(const Eigen::VectorXd& theta_star) const;

    Eigen::MatrixXd thetas_;
    Kernel kernel_;
    PsdSolver solver_;
    Eigen::VectorXd alpha_;
    double shift_ = 0.0;
    double scale_ = 1.0;
};

CbqModel cbq_fit(const Eigen::MatrixXd& thetas, const std::vector<BqPosterior>& posteriors, const Kernel& k_theta,
                 double lambda_theta, const CbqOptions& options = {});
std::pair<double, double> cbq_predict(const CbqModel& model, const Eigen::VectorXd& theta_star);
std::pair<Eigen::VectorXd, Eigen::MatrixXd> cbq_predict_joint(const CbqModel& model,
                                                              const Eigen::MatrixXd& theta_stars);

}  // namespace cbq
