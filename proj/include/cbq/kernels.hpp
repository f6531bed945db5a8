#pragma once

#include <functional>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "cbq/measures.hpp"

namespace cbq {

// Score function x -> grad log p(x), typically derived from a Measure.
struct ScoreFn {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
    int dim = 0;
    std::string source;

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return eval(x); }
};

ScoreFn score_of(const Measure& measure);

// Covariance functions.  GaussianRbf, Matern32 (isotropic or tensor-product
// metric) and LogGaussian are stationary families with k(x,x) = amplitude.
// Stein wraps a base kernel and a score function through the Langevin
// operator applied to both arguments, plus an additive constant; its mean
// embedding under the score's distribution is that constant.
class Kernel {
public:
    enum class Family { GaussianRbf, Matern32, LogGaussian, Stein };
    enum class Metric { Isotropic, TensorProduct };

    static Kernel gaussian_rbf(double lengthscale, double amplitude);
    static Kernel matern32(double lengthscale, double amplitude, Metric metric = Metric::Isotropic);
    static Kernel log_gaussian(double lengthscale, double amplitude);
    static Kernel stein(const Kernel& base, ScoreFn score, double constant);

    Family family() const { return family_; }
    Metric metric() const { return metric_; }
    double lengthscale() const;
    double amplitude() const;
    double stein_constant() const { return c_; }
    const Kernel& base() const;
    const ScoreFn& score() const;

    // Same family/metric/hyperparameters (used to detect kernel/embedding
    // mismatches; Stein score functions are compared by source tag).
    bool same_spec(const Kernel& other) const;

    double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    // Gram matrix with rows of X against rows of Y.
    Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) const;

    Kernel with_hyperparameters(double lengthscale, double amplitude) const;
    Kernel with_stein_constant(double constant) const;

    std::string describe() const;

private:
    Kernel() = default;

    Family family_ = Family::GaussianRbf;
    Metric metric_ = Metric::Isotropic;
    double l_ = 1.0, amp_ = 1.0, c_ = 0.0;
    std::shared_ptr<const Kernel> base_;
    ScoreFn score_;
};

double eval_kernel(const Kernel& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
Eigen::MatrixXd gram(const Kernel& spec, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

// Langevin-Stein form built from a base kernel (GaussianRbf or Matern32):
//   k_p(x,y) = s(x)^T k s(y) + s(x)^T grad_y k + s(y)^T grad_x k
//              + sum_i d^2 k / dx_i dy_i,  returned value is k_p(x,y) + c.
// The Matern32 cross-derivative at x == y uses its limit 3 A / l^2 per
// coordinate.
double stein_eval(const Kernel& base, const ScoreFn& score, double c, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& y);

}  // namespace cbq
