#pragma once

#include <string>

#include <Eigen/Dense>

#include "cbq/rng.hpp"

namespace cbq {

// Probability measures used as sampling distributions P_theta and Q.  Each
// variant exposes its log-density, density and score (gradient of the
// log-density), which is what the quadrature and Stein-kernel machinery needs.
class Measure {
public:
    enum class Kind { Gaussian, Lognormal, Gamma, Uniform };

    static Measure gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
    static Measure gaussian(double mean, double var);
    // Lognormal(log_mean, log_var): log X ~ N(log_mean, log_var), 1-d.
    static Measure lognormal(double log_mean, double log_var);
    // Gamma(shape, rate): density proportional to x^{shape-1} e^{-rate x}.
    static Measure gamma(double shape, double rate);
    static Measure uniform(Eigen::VectorXd lower, Eigen::VectorXd upper);
    static Measure uniform(double lower, double upper);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    std::string describe() const;

    double log_density(const Eigen::VectorXd& x) const;
    double density(const Eigen::VectorXd& x) const;
    Eigen::VectorXd score(const Eigen::VectorXd& x) const;

    // Gaussian accessors
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    const Eigen::MatrixXd& chol_lower() const { return chol_lower_; }

    // Lognormal accessors
    double log_mean() const { return a_; }
    double log_var() const { return b_; }
    // Gamma accessors
    double shape() const { return a_; }
    double rate() const { return b_; }
    // Uniform accessors
    const Eigen::VectorXd& lower() const { return lo_; }
    const Eigen::VectorXd& upper() const { return hi_; }

private:
    Measure() = default;

    Kind kind_ = Kind::Gaussian;
    int dim_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd chol_lower_;
    Eigen::MatrixXd cov_inv_;
    double log_norm_ = 0.0;  // log normalisation constant of the density
    double a_ = 0.0, b_ = 0.0;
    Eigen::VectorXd lo_, hi_;
};

// Draws `count` samples, one per row.  Gaussian draws go through the Cholesky
// transform of standard normals, Gamma through Marsaglia-Tsang, so streams are
// fully determined by the rng state.
Eigen::MatrixXd sample_measure(const Measure& measure, Rng& rng, int count);

}  // namespace cbq
