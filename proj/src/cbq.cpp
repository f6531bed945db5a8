#include "cbq/cbq.hpp"

#include <cmath>
#include <stdexcept>

#include "cbq/hyperopt.hpp"

namespace cbq {

CbqModel CbqModel::fit(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& means,
                       const Eigen::VectorXd& variances, const Kernel& k_theta, double lambda_theta,
                       const CbqOptions& options) {
    const Eigen::Index t = thetas.rows();
    if (t < 1) throw std::invalid_argument("cbq_fit: need at least one parameter point");
    if (means.size() != t || variances.size() != t)
        throw std::invalid_argument("cbq_fit: thetas, means and variances must have equal length");
    if (variances.minCoeff() < 0.0) throw std::invalid_argument("cbq_fit: negative stage-1 variance");
    if (!(lambda_theta >= 0.0)) throw std::invalid_argument("cbq_fit: lambda must be nonnegative");

    double shift = options.standardize ? 0.0 : options.prior_mean;
    double scale = 1.0;
    Eigen::VectorXd targets = means.array() - shift;
    if (options.standardize && t >= 2) {
        const Standardization s = standardize(means);
        targets = s.values;
        shift = s.mean;
        scale = s.stddev;
    }
    const Eigen::VectorXd noise = variances / (scale * scale);

    const Eigen::MatrixXd K = k_theta.gram(thetas, thetas);
    PsdSolver solver(K, Eigen::VectorXd(noise.array() + lambda_theta));

    CbqModel model(thetas, k_theta, std::move(solver));
    model.alpha_ = model.solver_.solve(targets);
    model.shift_ = shift;
    model.scale_ = scale;
    return model;
}

CbqModel CbqModel::fit(const Eigen::MatrixXd& thetas, const std::vector<BqPosterior>& posteriors,
                       const Kernel& k_theta, double lambda_theta, const CbqOptions& options) {
    Eigen::VectorXd means(posteriors.size()), vars(posteriors.size());
    for (std::size_t i = 0; i < posteriors.size(); ++i) {
        means(static_cast<Eigen::Index>(i)) = posteriors[i].mean;
        vars(static_cast<Eigen::Index>(i)) = posteriors[i].variance;
    }
    return fit(thetas, means, vars, k_theta, lambda_theta, options);
}

Eigen::VectorXd CbqModel::cross_vector(const Eigen::VectorXd& theta_star) const {
    if (theta_star.size() != thetas_.cols()) throw std::invalid_argument("cbq_predict: dimension mismatch");
    Eigen::VectorXd ks(thetas_.rows());
    for (Eigen::Index i = 0; i < thetas_.rows(); ++i) ks(i) = kernel_(theta_star, thetas_.row(i).transpose());
    return ks;
}

std::pair<double, double> CbqModel::predict(const Eigen::VectorXd& theta_star) const {
    const Eigen::VectorXd ks = cross_vector(theta_star);
    const double mean = shift_ + scale_ * ks.dot(alpha_);
    const double prior = kernel_(theta_star, theta_star);
    double var = prior - ks.dot(solver_.solve(ks));
    if (var < 0.0) {
        if (var < -1e-10 * std::max(prior, 1.0) - 1e-13 * solver_.condition_estimate() * prior)
            throw std::runtime_error("cbq_predict: predictive variance is substantially negative");
        var = 0.0;
    }
    return {mean, scale_ * scale_ * var};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> CbqModel::predict_joint(const Eigen::MatrixXd& theta_stars) const {
    const Eigen::Index s = theta_stars.rows();
    if (s < 1) throw std::invalid_argument("cbq_predict_joint: need at least one test point");
    Eigen::MatrixXd Ks(thetas_.rows(), s);
    for (Eigen::Index j = 0; j < s; ++j) Ks.col(j) = cross_vector(theta_stars.row(j).transpose());
    const Eigen::MatrixXd Kss = kernel_.gram(theta_stars, theta_stars);

    Eigen::VectorXd mean = Eigen::VectorXd::Constant(s, shift_) + scale_ * (Ks.transpose() * alpha_);
    Eigen::MatrixXd cov = Kss - Ks.transpose() * solver_.solve(Ks);
    cov = 0.5 * (cov + cov.transpose()).eval();
    for (Eigen::Index j = 0; j < s; ++j) cov(j, j) = std::max(cov(j, j), 0.0);
    cov *= scale_ * scale_;
    return {std::move(mean), std::move(cov)};
}

CbqModel cbq_fit(const Eigen::MatrixXd& thetas, const std::vector<BqPosterior>& posteriors, const Kernel& k_theta,
                 double lambda_theta, const CbqOptions& options) {
    return CbqModel::fit(thetas, posteriors, k_theta, lambda_theta, options);
}

std::pair<double, double> cbq_predict(const CbqModel& model, const Eigen::VectorXd& theta_star) {
    return model.predict(theta_star);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> cbq_predict_joint(const CbqModel& model,
                                                              const Eigen::MatrixXd& theta_stars) {
    return model.predict_joint(theta_stars);
}

}  // namespace cbq
