#include "cbq/hyperopt.hpp"

#include <cmath>
#include <stdexcept>

#include "cbq/linalg.hpp"

namespace cbq {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

double gp_log_marginal(const Eigen::MatrixXd& K, const Eigen::VectorXd& diag_reg, const Eigen::VectorXd& centered) {
    PsdSolver solver(K, diag_reg);
    const double n = static_cast<double>(K.rows());
    return -0.5 * solver.log_det() - 0.5 * n * kLog2Pi - 0.5 * centered.dot(solver.solve(centered));
}
}  // namespace

Standardization standardize(const Eigen::VectorXd& values) {
    if (values.size() < 2) throw std::invalid_argument("standardize: need at least two values");
    Standardization s;
    s.mean = values.mean();
    const double var = (values.array() - s.mean).square().mean();
    s.stddev = std::sqrt(var);
    if (!(s.stddev > 1e-12 * (1.0 + std::abs(s.mean)))) throw std::invalid_argument("degenerate targets");
    s.values = (values.array() - s.mean) / s.stddev;
    return s;
}

double stage1_log_marginal(const Kernel& k_x, const Eigen::MatrixXd& samples, const Eigen::VectorXd& f_vals,
                           double lambda_x, double prior_mean) {
    if (samples.rows() != f_vals.size()) throw std::invalid_argument("stage1_log_marginal: size mismatch");
    const Eigen::MatrixXd K = k_x.gram(samples, samples);
    const Eigen::VectorXd reg = Eigen::VectorXd::Constant(K.rows(), lambda_x);
    return gp_log_marginal(K, reg, f_vals.array() - prior_mean);
}

double stage2_log_marginal(const Kernel& k_theta, const Eigen::MatrixXd& thetas, const Eigen::VectorXd& means,
                           const Eigen::VectorXd& variances, double lambda_theta, double prior_mean) {
    if (thetas.rows() != means.size() || means.size() != variances.size())
        throw std::invalid_argument("stage2_log_marginal: size mismatch");
    if (variances.size() > 0 && variances.minCoeff() < 0.0)
        throw std::invalid_argument("stage2_log_marginal: negative variance");
    const Eigen::MatrixXd K = k_theta.gram(thetas, thetas);
    return gp_log_marginal(K, variances.array() + lambda_theta, means.array() - prior_mean);
}

Stage1Choice grid_search_stage1(const Eigen::MatrixXd& samples, const Eigen::VectorXd& f_std,
                                const std::function<Kernel(double, double)>& make_kernel, double lambda_x,
                                const HyperGrid& grid) {
    if (f_std.size() >= 2) {
        const double sd = std::sqrt((f_std.array() - f_std.mean()).square().mean());
        if (!(sd > 1e-12 * (1.0 + std::abs(f_std.mean())))) throw std::invalid_argument("degenerate targets");
    }
    Stage1Choice best;
    bool found = false;
    for (double l : grid.lengthscales) {
        for (double A : grid.amplitudes) {
            double value;
            try {
                value = stage1_log_marginal(make_kernel(l, A), samples, f_std, lambda_x);
            } catch (const std::runtime_error&) {
                continue;  // cell failed numerically
            }
            if (!std::isfinite(value)) continue;
            if (!found || value > best.log_marginal) {
                best = {A, l, value};
                found = true;
            }
        }
    }
    if (!found) throw std::runtime_error("grid_search_stage1: all grid cells failed");
    return best;
}

Stage2Choice grid_search_stage2(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& means_std,
                                const Eigen::VectorXd& variances_std,
                                const std::function<Kernel(double, double)>& make_kernel, const HyperGrid& grid) {
    if (means_std.size() >= 2) {
        const double sd = std::sqrt((means_std.array() - means_std.mean()).square().mean());
        if (!(sd > 1e-12 * (1.0 + std::abs(means_std.mean())))) throw std::invalid_argument("degenerate targets");
    }
    Stage2Choice best;
    bool found = false;
    for (double l : grid.lengthscales) {
        for (double A : grid.amplitudes) {
            for (double lam : grid.lambdas_theta) {
                double value;
                try {
                    value = stage2_log_marginal(make_kernel(l, A), thetas, means_std, variances_std, lam);
                } catch (const std::runtime_error&) {
                    continue;
                }
                if (!std::isfinite(value)) continue;
                if (!found || value > best.log_marginal) {
                    best = {A, l, lam, value};
                    found = true;
                }
            }
        }
    }
    if (!found) throw std::runtime_error("grid_search_stage2: all grid cells failed");
    return best;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-4 * (1.0 + std::abs(x(i)));
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

Eigen::VectorXd fd_gradient5(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-4 * (1.0 + std::abs(x(i)));
        Eigen::VectorXd x1 = x, x2 = x, x3 = x, x4 = x;
        x1(i) += 2.0 * h;
        x2(i) += h;
        x3(i) -= h;
        x4(i) -= 2.0 * h;
        g(i) = (-f(x1) + 8.0 * f(x2) - 8.0 * f(x3) + f(x4)) / (12.0 * h);
    }
    return g;
}

SteinDescentResult stein_c_descent(const std::function<Kernel(double, double, double)>& make_stein,
                                   const Eigen::MatrixXd& samples, const Eigen::VectorXd& f_std, double lambda_x,
                                   const SteinDescentOptions& options) {
    if (f_std.size() >= 2) {
        const double sd = std::sqrt((f_std.array() - f_std.mean()).square().mean());
        if (!(sd > 1e-12 * (1.0 + std::abs(f_std.mean())))) throw std::invalid_argument("degenerate targets");
    }
    const auto objective = [&](const Eigen::VectorXd& p) -> double {
        try {
            const Kernel k = make_stein(p(0), std::exp(p(1)), std::exp(p(2)));
            return stage1_log_marginal(k, samples, f_std, lambda_x);
        } catch (const std::exception&) {
            // overflowed hyperparameters or failed factorizations show up as
            // an invalid objective; best-seen selection skips them
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    Eigen::VectorXd p(3);
    p << options.init_constant, std::log(options.init_lengthscale), std::log(options.init_amplitude);
    double value = objective(p);
    if (!std::isfinite(value)) throw std::runtime_error("stein_c_descent: objective not finite at initialization");
    const double initial_value = value;

    Eigen::VectorXd best_p = p;
    double best_value = value;
    for (int it = 0; it < options.iterations; ++it) {
        const Eigen::VectorXd g = fd_gradient(objective, p);
        if (!g.allFinite()) break;
        const double norm = g.norm();
        if (!(norm > 1e-12)) break;
        // fixed step length along the gradient direction; raw-gradient steps
        // overshoot badly once N reaches the hundreds
        const Eigen::VectorXd cand = p + (options.step / norm) * g;
        const double cand_value = objective(cand);
        if (!std::isfinite(cand_value)) break;  // keep the best iterate found so far
        p = cand;
        value = cand_value;
        if (value > best_value) {
            best_value = value;
            best_p = p;
        }
    }

    SteinDescentResult r;
    r.constant = best_p(0);
    r.lengthscale = std::exp(best_p(1));
    r.amplitude = std::exp(best_p(2));
    r.log_marginal = best_value;
    r.initial_log_marginal = initial_value;
    return r;
}

SteinDescentResult stein_c_descent(const std::function<Kernel(double, double)>& make_base, const ScoreFn& score,
                                   const Eigen::MatrixXd& samples, const Eigen::VectorXd& f_std, double lambda_x,
                                   const SteinDescentOptions& options) {
    return stein_c_descent(
        [&](double c, double l, double A) { return Kernel::stein(make_base(l, A), score, c); }, samples, f_std,
        lambda_x, options);
}

}  // namespace cbq
