#include "cbq/embeddings.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cbq/gauss_hermite.hpp"

namespace cbq {

namespace {

const double kSqrt3 = std::sqrt(3.0);

bool is_standard_normal(const Measure& m) {
    if (m.kind() != Measure::Kind::Gaussian) return false;
    const int d = m.dim();
    return m.mean().isZero(1e-12) && m.covariance().isApprox(Eigen::MatrixXd::Identity(d, d), 1e-12);
}

// E_{U~N(mean, sd^2)}[(1 + a|U - t|) e^{-a|U - t|}].  The integrand has a
// kink at u = t, where Gauss-Hermite converges only algebraically, so the
// integral is split there and each smooth piece gets a spectral rule.
double matern32_normal_factor(double t, double a, double mean, double sd) {
    return normal_expectation_with_kink(
        [t, a](double u) {
            const double z = a * std::abs(u - t);
            return (1.0 + z) * std::exp(-z);
        },
        mean, sd, t, 80);
}

}  // namespace

EmbeddingPair EmbeddingPair::make(const Kernel& kernel, const Measure& measure) {
    EmbeddingPair pair(kernel, measure);
    const double A = kernel.family() == Kernel::Family::Stein ? 0.0 : kernel.amplitude();

    if (kernel.family() == Kernel::Family::GaussianRbf && measure.kind() == Measure::Kind::Gaussian) {
        const double l2 = kernel.lengthscale() * kernel.lengthscale();
        const int d = measure.dim();
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
        // mu(x) = A |Id + S/l^2|^{-1/2} exp(-(x-m)^T (S + l^2 Id)^{-1} (x-m) / 2)
        Eigen::LLT<Eigen::MatrixXd> llt(measure.covariance() + l2 * id);
        double log_det_scaled = 0.0;  // log |Id + S/l^2|
        for (int i = 0; i < d; ++i) log_det_scaled += 2.0 * std::log(llt.matrixL()(i, i) / std::sqrt(l2));
        const double factor = A * std::exp(-0.5 * log_det_scaled);
        const Eigen::VectorXd mean = measure.mean();
        pair.mu_ = [factor, llt, mean](const Eigen::VectorXd& x) {
            const Eigen::VectorXd r = x - mean;
            return factor * std::exp(-0.5 * r.dot(llt.solve(r)));
        };
        // initial error A |Id + 2 S / l^2|^{-1/2} = A l^d / sqrt(|l^2 Id + 2 S|)
        Eigen::LLT<Eigen::MatrixXd> llt2(id + 2.0 / l2 * measure.covariance());
        double log_det2 = 0.0;
        for (int i = 0; i < d; ++i) log_det2 += 2.0 * std::log(llt2.matrixL()(i, i));
        pair.initial_error_ = A * std::exp(-0.5 * log_det2);
        return pair;
    }

    if (kernel.family() == Kernel::Family::LogGaussian && measure.kind() == Measure::Kind::Lognormal) {
        const double l2 = kernel.lengthscale() * kernel.lengthscale();
        const double m = measure.log_mean();
        const double s2 = measure.log_var();
        pair.mu_ = [A, l2, m, s2](const Eigen::VectorXd& x) {
            if (x.size() != 1 || !(x(0) > 0.0))
                throw std::invalid_argument("kme: log-gaussian embedding needs scalar x > 0");
            const double u = std::log(x(0));
            return A / std::sqrt(1.0 + s2 / l2) * std::exp(-0.5 * (u - m) * (u - m) / (s2 + l2));
        };
        // substituting u = log x reduces the pair to the 1-d Gaussian case
        pair.initial_error_ = A * std::sqrt(l2) / std::sqrt(l2 + 2.0 * s2);
        return pair;
    }

    if (kernel.family() == Kernel::Family::Stein) {
        if (measure.dim() != kernel.score().dim)
            throw std::invalid_argument("embedding: Stein score dimension does not match measure");
        const double c = kernel.stein_constant();
        pair.mu_ = [c](const Eigen::VectorXd&) { return c; };
        pair.initial_error_ = c;
        return pair;
    }

    if (kernel.family() == Kernel::Family::Matern32 && kernel.metric() == Kernel::Metric::TensorProduct &&
        is_standard_normal(measure)) {
        const double a = kSqrt3 / kernel.lengthscale();
        pair.mu_ = [A, a](const Eigen::VectorXd& x) {
            double prod = A;
            for (Eigen::Index j = 0; j < x.size(); ++j) prod *= matern32_normal_factor(x(j), a, 0.0, 1.0);
            return prod;
        };
        // X - X' ~ N(0, 2) per coordinate
        const double pair_factor = matern32_normal_factor(0.0, a, 0.0, std::sqrt(2.0));
        pair.initial_error_ = A * std::pow(pair_factor, measure.dim());
        return pair;
    }

    throw std::invalid_argument("embedding: unsupported kernel/measure combination (" + kernel.describe() +
                                ", " + measure.describe() + ")");
}

EmbeddingPair EmbeddingPair::make_empirical(const Kernel& kernel, const Measure& measure,
                                            const Eigen::VectorXd& samples) {
    if (kernel.family() != Kernel::Family::LogGaussian || measure.kind() != Measure::Kind::Lognormal)
        throw std::invalid_argument("embedding: empirical initial error is only kept for lognormal pairs");
    if (samples.size() == 0) throw std::invalid_argument("embedding: empirical fallback needs samples");
    EmbeddingPair pair = make(kernel, measure);
    double acc = 0.0;
    Eigen::VectorXd x(1);
    for (Eigen::Index i = 0; i < samples.size(); ++i) {
        x(0) = samples(i);
        acc += pair.mu_(x);
    }
    pair.initial_error_ = acc / static_cast<double>(samples.size());
    return pair;
}

Eigen::VectorXd EmbeddingPair::kme_all(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = mu_(X.row(i).transpose());
    return out;
}

double kme(const EmbeddingPair& pair, const Eigen::VectorXd& x) { return pair.kme(x); }
double initial_error(const EmbeddingPair& pair) { return pair.initial_error(); }

Eigen::VectorXd inverse_transform(const Measure& gaussian_measure, const Eigen::VectorXd& u) {
    if (gaussian_measure.kind() != Measure::Kind::Gaussian)
        throw std::invalid_argument("inverse_transform: measure must be Gaussian");
    if (u.size() != gaussian_measure.dim()) throw std::invalid_argument("inverse_transform: dimension mismatch");
    return gaussian_measure.mean() + gaussian_measure.chol_lower() * u;
}

std::function<double(const Eigen::VectorXd&)> reweight_integrand(
    std::function<double(const Eigen::VectorXd&)> f, std::function<double(const Eigen::VectorXd&)> p_density,
    std::function<double(const Eigen::VectorXd&)> q_density) {
    return [f = std::move(f), p = std::move(p_density), q = std::move(q_density)](const Eigen::VectorXd& x) {
        const double qx = q(x);
        if (!(qx > 0.0)) throw std::runtime_error("reweight_integrand: proposal density vanishes at a sample");
        return f(x) * p(x) / qx;
    };
}

namespace {

using boost::math::quadrature::gauss_kronrod;

double kronrod_1d(const std::function<double(double)>& g, double lo, double hi, double tol, double* err) {
    return gauss_kronrod<double, 31>::integrate(g, lo, hi, 12, tol, err);
}

// Integration range covering all but ~1e-14 of the measure's mass (1-d).
void quad_range(const Measure& m, double& lo, double& hi) {
    switch (m.kind()) {
        case Measure::Kind::Gaussian: {
            const double mu = m.mean()(0), sd = std::sqrt(m.covariance()(0, 0));
            lo = mu - 9.0 * sd;
            hi = mu + 9.0 * sd;
            return;
        }
        case Measure::Kind::Gamma: {
            const double mean = m.shape() / m.rate();
            const double sd = std::sqrt(m.shape()) / m.rate();
            lo = 0.0;
            hi = mean + 30.0 * sd;
            return;
        }
        case Measure::Kind::Uniform:
            lo = m.lower()(0);
            hi = m.upper()(0);
            return;
        default:
            throw std::logic_error("quad_range: unsupported measure");
    }
}

OracleEstimate integrate_quadrature(const std::function<double(const Eigen::VectorXd&)>& h, const Measure& m,
                                    double tol) {
    OracleEstimate est;
    if (m.kind() == Measure::Kind::Lognormal) {
        // substitute u = log x: integrate h(e^u) against N(log_mean, log_var)
        const Measure g = Measure::gaussian(m.log_mean(), m.log_var());
        return integrate_quadrature(
            [&h](const Eigen::VectorXd& u) {
                Eigen::VectorXd x(1);
                x << std::exp(u(0));
                return h(x);
            },
            g, tol);
    }
    if (m.dim() == 1) {
        double lo, hi;
        quad_range(m, lo, hi);
        double err = 0.0;
        est.value = kronrod_1d(
            [&](double x) {
                Eigen::VectorXd v(1);
                v << x;
                return h(v) * m.density(v);
            },
            lo, hi, tol, &err);
        est.error = err;
    } else if (m.dim() == 2) {
        if (m.kind() != Measure::Kind::Gaussian && m.kind() != Measure::Kind::Uniform)
            throw std::invalid_argument("integrate_measure: unsupported 2-d quadrature measure");
        double lo0, hi0, lo1, hi1;
        if (m.kind() == Measure::Kind::Gaussian) {
            lo0 = m.mean()(0) - 9.0 * std::sqrt(m.covariance()(0, 0));
            hi0 = m.mean()(0) + 9.0 * std::sqrt(m.covariance()(0, 0));
            lo1 = m.mean()(1) - 9.0 * std::sqrt(m.covariance()(1, 1));
            hi1 = m.mean()(1) + 9.0 * std::sqrt(m.covariance()(1, 1));
        } else {
            lo0 = m.lower()(0);
            hi0 = m.upper()(0);
            lo1 = m.lower()(1);
            hi1 = m.upper()(1);
        }
        double outer_err = 0.0;
        est.value = kronrod_1d(
            [&](double x0) {
                double inner_err = 0.0;
                return kronrod_1d(
                    [&](double x1) {
                        Eigen::VectorXd v(2);
                        v << x0, x1;
                        return h(v) * m.density(v);
                    },
                    lo1, hi1, 0.1 * tol, &inner_err);
            },
            lo0, hi0, tol, &outer_err);
        est.error = outer_err;
    } else {
        throw std::invalid_argument("integrate_measure: quadrature path needs d <= 2");
    }
    if (!std::isfinite(est.value) || est.error > 1e3 * tol * std::max(1.0, std::abs(est.value)))
        throw std::runtime_error("integrate_measure: tolerance not reachable within node budget");
    return est;
}

OracleEstimate integrate_monte_carlo(const std::function<double(const Eigen::VectorXd&)>& h, const Measure& m,
                                     std::uint64_t seed, long draws) {
    Rng rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < draws; ++i) {
        const Eigen::MatrixXd x = sample_measure(m, rng, 1);
        const double v = h(x.row(0).transpose());
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    OracleEstimate est;
    est.value = mean;
    est.error = std::sqrt(m2 / static_cast<double>(draws - 1) / static_cast<double>(draws));
    est.monte_carlo = true;
    return est;
}

bool quadrature_supported(const Measure& m) {
    switch (m.kind()) {
        case Measure::Kind::Gaussian: return m.dim() <= 2;
        case Measure::Kind::Lognormal: return true;
        case Measure::Kind::Gamma: return m.shape() >= 1.0;
        case Measure::Kind::Uniform: return m.dim() <= 2;
    }
    return false;
}

}  // namespace

OracleEstimate integrate_measure(const std::function<double(const Eigen::VectorXd&)>& h, const Measure& measure,
                                 double tol, std::uint64_t mc_seed, bool force_monte_carlo) {
    if (!force_monte_carlo && quadrature_supported(measure)) return integrate_quadrature(h, measure, tol);
    return integrate_monte_carlo(h, measure, mc_seed, 1'000'000);
}

OracleEstimate numeric_kme_oracle(const Kernel& kernel, const Measure& measure, const Eigen::VectorXd& x,
                                  double tol, std::uint64_t mc_seed) {
    const bool mc = kernel.family() == Kernel::Family::Stein;
    return integrate_measure([&](const Eigen::VectorXd& s) { return kernel(s, x); }, measure, tol, mc_seed, mc);
}

}  // namespace cbq
