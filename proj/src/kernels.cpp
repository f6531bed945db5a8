#include "cbq/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace cbq {

namespace {

const double kSqrt3 = std::sqrt(3.0);

void check_positive(double l, double A) {
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("kernel: lengthscale must be positive");
    if (!(A > 0.0) || !std::isfinite(A)) throw std::invalid_argument("kernel: amplitude must be positive");
}

double matern32_1d(double dist, double a) {
    const double z = a * std::abs(dist);
    return (1.0 + z) * std::exp(-z);
}

// Langevin-Stein evaluation with precomputed scores.  All four terms are
// written so that swapping (x, sx) with (y, sy) reproduces the exact same
// floating-point value.
double stein_core(const Kernel& base, double c, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& sx, const Eigen::VectorXd& sy) {
    const int d = static_cast<int>(x.size());
    const double l = base.lengthscale();
    const double A = base.amplitude();
    const Eigen::VectorXd diff = x - y;

    double k = 0.0, cross = 0.0, div = 0.0;
    switch (base.family()) {
        case Kernel::Family::GaussianRbf: {
            const double l2 = l * l;
            const double r2 = diff.squaredNorm();
            k = A * std::exp(-0.5 * r2 / l2);
            // grad_x k = -(k/l^2) diff, grad_y k = +(k/l^2) diff
            const double g = k / l2;
            cross = g * (sx - sy).dot(diff);
            div = k * (d / l2 - r2 / (l2 * l2));
            break;
        }
        case Kernel::Family::Matern32: {
            const double a = kSqrt3 / l;
            if (base.metric() == Kernel::Metric::Isotropic) {
                const double r = diff.norm();
                const double e = std::exp(-a * r);
                k = A * (1.0 + a * r) * e;
                // grad_x k = -(A a^2 e) diff; cross derivative sum has the
                // almost-everywhere limit A a^2 d at r = 0.
                const double g = A * a * a * e;
                cross = g * (sx - sy).dot(diff);
                div = g * (d - a * r);
            } else {
                Eigen::VectorXd m(d), e(d);
                for (int i = 0; i < d; ++i) {
                    const double z = a * std::abs(diff(i));
                    e(i) = std::exp(-z);
                    m(i) = (1.0 + z) * e(i);
                }
                double prod = A;
                for (int i = 0; i < d; ++i) prod *= m(i);
                k = prod;
                for (int i = 0; i < d; ++i) {
                    double rest = A;
                    for (int j = 0; j < d; ++j)
                        if (j != i) rest *= m(j);
                    // d m / d delta = -a^2 delta e^{-a|delta|}
                    const double dm = -a * a * diff(i) * e(i);
                    // dk/dx_i = dm * rest ; dk/dy_i = -dm * rest
                    cross += (sx(i) - sy(i)) * (-dm) * rest;
                    // -d^2 m / d delta^2 = a^2 e (1 - a|delta|)
                    div += a * a * e(i) * (1.0 - a * std::abs(diff(i))) * rest;
                }
                break;
            }
            break;
        }
        default:
            throw std::invalid_argument("stein: base must be GaussianRbf or Matern32");
    }
    return sx.dot(sy) * k + cross + div + c;
}

}  // namespace

ScoreFn score_of(const Measure& measure) {
    ScoreFn s;
    s.dim = measure.dim();
    s.source = measure.describe();
    s.eval = [measure](const Eigen::VectorXd& x) { return measure.score(x); };
    return s;
}

Kernel Kernel::gaussian_rbf(double lengthscale, double amplitude) {
    check_positive(lengthscale, amplitude);
    Kernel k;
    k.family_ = Family::GaussianRbf;
    k.l_ = lengthscale;
    k.amp_ = amplitude;
    return k;
}

Kernel Kernel::matern32(double lengthscale, double amplitude, Metric metric) {
    check_positive(lengthscale, amplitude);
    Kernel k;
    k.family_ = Family::Matern32;
    k.metric_ = metric;
    k.l_ = lengthscale;
    k.amp_ = amplitude;
    return k;
}

Kernel Kernel::log_gaussian(double lengthscale, double amplitude) {
    check_positive(lengthscale, amplitude);
    Kernel k;
    k.family_ = Family::LogGaussian;
    k.l_ = lengthscale;
    k.amp_ = amplitude;
    return k;
}

Kernel Kernel::stein(const Kernel& base, ScoreFn score, double constant) {
    if (base.family_ == Family::Stein) throw std::invalid_argument("stein: base must not itself be a Stein kernel");
    if (base.family_ == Family::LogGaussian)
        throw std::invalid_argument("stein: base must be GaussianRbf or Matern32");
    if (score.dim <= 0 || !score.eval) throw std::invalid_argument("stein: score function required");
    if (!std::isfinite(constant)) throw std::invalid_argument("stein: constant must be finite");
    Kernel k;
    k.family_ = Family::Stein;
    k.c_ = constant;
    k.base_ = std::make_shared<Kernel>(base);
    k.score_ = std::move(score);
    return k;
}

double Kernel::lengthscale() const { return family_ == Family::Stein ? base_->l_ : l_; }
double Kernel::amplitude() const { return family_ == Family::Stein ? base_->amp_ : amp_; }

const Kernel& Kernel::base() const {
    if (family_ != Family::Stein) throw std::logic_error("base: not a Stein kernel");
    return *base_;
}

const ScoreFn& Kernel::score() const {
    if (family_ != Family::Stein) throw std::logic_error("score: not a Stein kernel");
    return score_;
}

bool Kernel::same_spec(const Kernel& other) const {
    if (family_ != other.family_) return false;
    if (family_ == Family::Stein)
        return c_ == other.c_ && base_->same_spec(*other.base_) && score_.source == other.score_.source;
    return metric_ == other.metric_ && l_ == other.l_ && amp_ == other.amp_;
}

double Kernel::operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if (x.size() != y.size()) throw std::invalid_argument("kernel: dimension mismatch");
    switch (family_) {
        case Family::GaussianRbf:
            return amp_ * std::exp(-0.5 * (x - y).squaredNorm() / (l_ * l_));
        case Family::Matern32: {
            const double a = kSqrt3 / l_;
            if (metric_ == Metric::Isotropic) return amp_ * matern32_1d((x - y).norm(), a);
            double prod = 1.0;
            for (Eigen::Index i = 0; i < x.size(); ++i) prod *= matern32_1d(x(i) - y(i), a);
            return amp_ * prod;
        }
        case Family::LogGaussian: {
            double s2 = 0.0;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                if (!(x(i) > 0.0) || !(y(i) > 0.0))
                    throw std::invalid_argument("log_gaussian: inputs must be strictly positive");
                const double d = std::log(x(i)) - std::log(y(i));
                s2 += d * d;
            }
            return amp_ * std::exp(-0.5 * s2 / (l_ * l_));
        }
        case Family::Stein:
            return stein_eval(*base_, score_, c_, x, y);
    }
    return 0.0;
}

Eigen::MatrixXd Kernel::gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) const {
    if (X.cols() != Y.cols()) throw std::invalid_argument("gram: dimension mismatch");
    const Eigen::Index n = X.rows(), m = Y.rows();
    Eigen::MatrixXd K(n, m);
    if (family_ == Family::Stein) {
        if (static_cast<int>(X.cols()) != score_.dim) throw std::invalid_argument("gram: dimension mismatch");
        Eigen::MatrixXd SX(n, X.cols());
        for (Eigen::Index i = 0; i < n; ++i) SX.row(i) = score_(X.row(i).transpose()).transpose();
        Eigen::MatrixXd SY;
        const bool same = (n == m) && (X.data() == Y.data() || X == Y);
        if (same)
            SY = SX;
        else {
            SY.resize(m, Y.cols());
            for (Eigen::Index j = 0; j < m; ++j) SY.row(j) = score_(Y.row(j).transpose()).transpose();
        }
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                K(i, j) = stein_core(*base_, c_, X.row(i).transpose(), Y.row(j).transpose(),
                                     SX.row(i).transpose(), SY.row(j).transpose());
        return K;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) K(i, j) = (*this)(X.row(i).transpose(), Y.row(j).transpose());
    return K;
}

Kernel Kernel::with_hyperparameters(double lengthscale, double amplitude) const {
    check_positive(lengthscale, amplitude);
    Kernel k = *this;
    if (family_ == Family::Stein) {
        k.base_ = std::make_shared<Kernel>(base_->with_hyperparameters(lengthscale, amplitude));
    } else {
        k.l_ = lengthscale;
        k.amp_ = amplitude;
    }
    return k;
}

Kernel Kernel::with_stein_constant(double constant) const {
    if (family_ != Family::Stein) throw std::logic_error("with_stein_constant: not a Stein kernel");
    if (!std::isfinite(constant)) throw std::invalid_argument("stein: constant must be finite");
    Kernel k = *this;
    k.c_ = constant;
    return k;
}

std::string Kernel::describe() const {
    switch (family_) {
        case Family::GaussianRbf: return "rbf(l=" + std::to_string(l_) + ",A=" + std::to_string(amp_) + ")";
        case Family::Matern32:
            return std::string("matern32") + (metric_ == Metric::TensorProduct ? "-tp" : "") +
                   "(l=" + std::to_string(l_) + ",A=" + std::to_string(amp_) + ")";
        case Family::LogGaussian: return "log_gaussian(l=" + std::to_string(l_) + ",A=" + std::to_string(amp_) + ")";
        case Family::Stein: return "stein(" + base_->describe() + ",c=" + std::to_string(c_) + ")";
    }
    return "?";
}

double eval_kernel(const Kernel& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return spec(x, y);
}

Eigen::MatrixXd gram(const Kernel& spec, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    return spec.gram(X, Y);
}

double stein_eval(const Kernel& base, const ScoreFn& score, double c, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& y) {
    if (base.family() == Kernel::Family::Stein)
        throw std::invalid_argument("stein: base must not itself be a Stein kernel");
    if (x.size() != y.size() || static_cast<int>(x.size()) != score.dim)
        throw std::invalid_argument("stein: dimension mismatch");
    return stein_core(base, c, x, y, score(x), score(y));
}

}  // namespace cbq
