#include "cbq/measures.hpp"

#include <cmath>
#include <stdexcept>

namespace cbq {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

Measure Measure::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    const int d = static_cast<int>(mean.size());
    if (cov.rows() != d || cov.cols() != d)
        throw std::invalid_argument("gaussian: covariance shape does not match mean");
    if (!cov.isApprox(cov.transpose(), 1e-12))
        throw std::invalid_argument("gaussian: covariance must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const double min_eig = es.eigenvalues().minCoeff();
    if (!(min_eig > 1e-12 * std::max(cov.trace(), 1e-300)))
        throw std::invalid_argument("gaussian: covariance is not positive definite");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("gaussian: Cholesky failed");

    Measure m;
    m.kind_ = Kind::Gaussian;
    m.dim_ = d;
    m.mean_ = std::move(mean);
    m.cov_ = std::move(cov);
    m.chol_lower_ = llt.matrixL();
    m.cov_inv_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
    double log_det = 0.0;
    for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(m.chol_lower_(i, i));
    m.log_norm_ = -0.5 * (d * kLog2Pi + log_det);
    return m;
}

Measure Measure::gaussian(double mean, double var) {
    Eigen::VectorXd m(1);
    m << mean;
    Eigen::MatrixXd c(1, 1);
    c << var;
    return gaussian(m, c);
}

Measure Measure::lognormal(double log_mean, double log_var) {
    if (!(log_var > 0.0)) throw std::invalid_argument("lognormal: log_var must be positive");
    Measure m;
    m.kind_ = Kind::Lognormal;
    m.dim_ = 1;
    m.a_ = log_mean;
    m.b_ = log_var;
    m.log_norm_ = -0.5 * (kLog2Pi + std::log(log_var));
    return m;
}

Measure Measure::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("gamma: shape and rate must be positive");
    Measure m;
    m.kind_ = Kind::Gamma;
    m.dim_ = 1;
    m.a_ = shape;
    m.b_ = rate;
    m.log_norm_ = shape * std::log(rate) - std::lgamma(shape);
    return m;
}

Measure Measure::uniform(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    if (lower.size() != upper.size()) throw std::invalid_argument("uniform: bound sizes differ");
    if (!((upper - lower).minCoeff() > 0.0))
        throw std::invalid_argument("uniform: upper must exceed lower componentwise");
    Measure m;
    m.kind_ = Kind::Uniform;
    m.dim_ = static_cast<int>(lower.size());
    m.log_norm_ = -((upper - lower).array().log().sum());
    m.lo_ = std::move(lower);
    m.hi_ = std::move(upper);
    return m;
}

Measure Measure::uniform(double lower, double upper) {
    Eigen::VectorXd lo(1), hi(1);
    lo << lower;
    hi << upper;
    return uniform(lo, hi);
}

std::string Measure::describe() const {
    switch (kind_) {
        case Kind::Gaussian: return "gaussian(d=" + std::to_string(dim_) + ")";
        case Kind::Lognormal: return "lognormal";
        case Kind::Gamma: return "gamma";
        case Kind::Uniform: return "uniform(d=" + std::to_string(dim_) + ")";
    }
    return "?";
}

double Measure::log_density(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw std::invalid_argument("log_density: dimension mismatch");
    switch (kind_) {
        case Kind::Gaussian: {
            const Eigen::VectorXd r = x - mean_;
            return log_norm_ - 0.5 * r.dot(cov_inv_ * r);
        }
        case Kind::Lognormal: {
            const double v = x(0);
            if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
            const double u = std::log(v);
            return log_norm_ - u - 0.5 * (u - a_) * (u - a_) / b_;
        }
        case Kind::Gamma: {
            const double v = x(0);
            if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
            return log_norm_ + (a_ - 1.0) * std::log(v) - b_ * v;
        }
        case Kind::Uniform: {
            for (int i = 0; i < dim_; ++i)
                if (x(i) < lo_(i) || x(i) > hi_(i)) return -std::numeric_limits<double>::infinity();
            return log_norm_;
        }
    }
    return 0.0;
}

double Measure::density(const Eigen::VectorXd& x) const { return std::exp(log_density(x)); }

Eigen::VectorXd Measure::score(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw std::invalid_argument("score: dimension mismatch");
    switch (kind_) {
        case Kind::Gaussian: return -(cov_inv_ * (x - mean_));
        case Kind::Lognormal: {
            const double v = x(0);
            if (!(v > 0.0)) throw std::invalid_argument("score: lognormal needs x > 0");
            Eigen::VectorXd s(1);
            s << -1.0 / v - (std::log(v) - a_) / (b_ * v);
            return s;
        }
        case Kind::Gamma: {
            const double v = x(0);
            if (!(v > 0.0)) throw std::invalid_argument("score: gamma needs x > 0");
            Eigen::VectorXd s(1);
            s << (a_ - 1.0) / v - b_;
            return s;
        }
        case Kind::Uniform: return Eigen::VectorXd::Zero(dim_);
    }
    return Eigen::VectorXd::Zero(dim_);
}

Eigen::MatrixXd sample_measure(const Measure& measure, Rng& rng, int count) {
    if (count < 0) throw std::invalid_argument("sample_measure: negative count");
    const int d = measure.dim();
    Eigen::MatrixXd out(count, d);
    switch (measure.kind()) {
        case Measure::Kind::Gaussian: {
            for (int i = 0; i < count; ++i)
                out.row(i) = (measure.mean() + measure.chol_lower() * rng.normal_vector(d)).transpose();
            break;
        }
        case Measure::Kind::Lognormal: {
            const double s = std::sqrt(measure.log_var());
            for (int i = 0; i < count; ++i) out(i, 0) = std::exp(measure.log_mean() + s * rng.normal());
            break;
        }
        case Measure::Kind::Gamma: {
            for (int i = 0; i < count; ++i) out(i, 0) = rng.gamma(measure.shape(), measure.rate());
            break;
        }
        case Measure::Kind::Uniform: {
            for (int i = 0; i < count; ++i)
                for (int j = 0; j < d; ++j) out(i, j) = rng.uniform(measure.lower()(j), measure.upper()(j));
            break;
        }
    }
    return out;
}

}  // namespace cbq
