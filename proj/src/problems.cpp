#include "cbq/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "cbq/stats.hpp"

namespace cbq {

const BqBackend& Problem::backend(const std::string& name) const {
    const std::string& wanted = (name.empty() || name == "auto") ? default_backend : name;
    for (const auto& b : backends)
        if (b.name == wanted) return b;
    throw std::invalid_argument("problem '" + id + "' has no stage-1 backend named '" + wanted + "'");
}

Eigen::VectorXd Problem::truth_at(const Eigen::MatrixXd& thetas, int output) const {
    const auto& out = outputs.at(static_cast<std::size_t>(output));
    if (!out.exact_truth) throw std::logic_error("truth_at: problem has no exact ground truth");
    Eigen::VectorXd v(thetas.rows());
    for (Eigen::Index i = 0; i < thetas.rows(); ++i) v(i) = out.exact_truth(thetas.row(i).transpose());
    return v;
}

// --- linear models -----------------------------------------------------------

LinearBayesData make_linear_bayes_data(int d, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("make_linear_bayes_data: d must be positive");
    Rng rng(hash64(seed, 0x11ea6));
    const int m = 10 * d;
    LinearBayesData data;
    data.design.resize(m, d);
    for (int i = 0; i < m; ++i) data.design.row(i) = rng.normal_vector(d).transpose();
    const Eigen::VectorXd w = rng.normal_vector(d);
    data.responses = data.design * w + rng.normal_vector(m);
    data.new_point = rng.normal_vector(d);
    return data;
}

namespace {

Measure linear_posterior(const Eigen::VectorXd& theta, double eta, const LinearBayesData& data) {
    const int d = static_cast<int>(theta.size());
    Eigen::MatrixXd prec = eta * (data.design.transpose() * data.design);
    for (int i = 0; i < d; ++i) {
        if (!(theta(i) > 0.0)) throw std::invalid_argument("linear posterior: theta must be positive");
        prec(i, i) += 1.0 / theta(i);
    }
    const Eigen::MatrixXd cov = prec.llt().solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::VectorXd mean = eta * (cov * (data.design.transpose() * data.responses));
    return Measure::gaussian(mean, 0.5 * (cov + cov.transpose()));
}

BqBackend rbf_gaussian_backend(const std::function<Measure(const Eigen::VectorXd&)>& conditional) {
    BqBackend b;
    b.name = "rbf";
    b.make_kernel = [](double l, double A, double, const Eigen::VectorXd&) { return Kernel::gaussian_rbf(l, A); };
    b.make_embedding = [conditional](const Kernel& k, const Eigen::VectorXd& theta) {
        return EmbeddingPair::make(k, conditional(theta));
    };
    return b;
}

// Matern-3/2 on whitened coordinates u = L^{-1}(x - m(theta)), embedding
// against the standard normal.
BqBackend matern_whitened_backend(int dim, const std::function<Measure(const Eigen::VectorXd&)>& conditional) {
    BqBackend b;
    b.name = "matern-it";
    b.make_kernel = [](double l, double A, double, const Eigen::VectorXd&) {
        return Kernel::matern32(l, A, Kernel::Metric::TensorProduct);
    };
    b.transform = [conditional](const Eigen::MatrixXd& samples, const Eigen::VectorXd& theta) {
        const Measure m = conditional(theta);
        Eigen::MatrixXd u(samples.rows(), samples.cols());
        const auto& L = m.chol_lower();
        for (Eigen::Index i = 0; i < samples.rows(); ++i)
            u.row(i) = L.triangularView<Eigen::Lower>()
                           .solve(Eigen::VectorXd(samples.row(i).transpose() - m.mean()))
                           .transpose();
        return u;
    };
    const Measure std_normal =
        Measure::gaussian(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
    b.make_embedding = [std_normal](const Kernel& k, const Eigen::VectorXd&) {
        return EmbeddingPair::make(k, std_normal);
    };
    return b;
}

BqBackend stein_backend(const std::function<Measure(const Eigen::VectorXd&)>& conditional) {
    BqBackend b;
    b.name = "stein";
    b.is_stein = true;
    b.make_kernel = [conditional](double l, double A, double c, const Eigen::VectorXd& theta) {
        return Kernel::stein(Kernel::matern32(l, A), score_of(conditional(theta)), c);
    };
    b.make_embedding = [conditional](const Kernel& k, const Eigen::VectorXd& theta) {
        return EmbeddingPair::make(k, conditional(theta));
    };
    return b;
}

}  // namespace

Problem linear_bayes_problem(int d, double eta, const LinearBayesData& data, LinearIntegrand kind) {
    if (data.design.cols() != d || data.design.rows() != data.responses.size())
        throw std::invalid_argument("linear_bayes_problem: malformed data");
    // rank-deficient designs are fine: the 1/theta prior term keeps the
    // posterior precision positive definite on Theta = (1,3)^d

    Problem p;
    p.id = "linear";
    p.dim_x = d;
    p.dim_theta = d;
    p.config_key = "linear,d=" + std::to_string(d) + ",eta=" + std::to_string(eta) +
                   ",kind=" + (kind == LinearIntegrand::SecondMoment ? "x2" : "pred");
    p.sample_theta = [d](Rng& rng) {
        Eigen::VectorXd t(d);
        for (int i = 0; i < d; ++i) t(i) = rng.uniform(1.0, 3.0);
        return t;
    };
    auto conditional = [eta, data](const Eigen::VectorXd& theta) { return linear_posterior(theta, eta, data); };
    p.conditional_measure = conditional;
    p.log_density = [conditional](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        return conditional(theta).log_density(x);
    };

    ProblemOutput out;
    if (kind == LinearIntegrand::SecondMoment) {
        out.name = "second_moment";
        out.integrand = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x.squaredNorm(); };
        out.exact_truth = [conditional](const Eigen::VectorXd& theta) {
            const Measure m = conditional(theta);
            return m.covariance().trace() + m.mean().squaredNorm();
        };
    } else {
        const Eigen::VectorXd y_star = data.new_point;
        out.name = "predictive_mean";
        out.integrand = [y_star](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x.dot(y_star); };
        out.exact_truth = [conditional, y_star](const Eigen::VectorXd& theta) {
            return conditional(theta).mean().dot(y_star);
        };
    }
    p.outputs.push_back(std::move(out));

    p.backends.push_back(rbf_gaussian_backend(conditional));
    p.backends.push_back(matern_whitened_backend(d, conditional));
    p.backends.push_back(stein_backend(conditional));
    p.default_backend = "rbf";
    return p;
}

// --- SIR ----------------------------------------------------------------------

SirTrajectory sir_solve(double infection_rate, double recovery_rate, double population, double i0,
                        double horizon_days, double dt) {
    if (!(infection_rate >= 0.0) || !(recovery_rate >= 0.0)) throw std::invalid_argument("sir_solve: negative rate");
    if (!(dt > 0.0)) throw std::invalid_argument("sir_solve: dt must be positive");
    if (!(i0 > 0.0) || !(i0 < population)) throw std::invalid_argument("sir_solve: i0 must be in (0, population)");

    const int steps = static_cast<int>(std::ceil(horizon_days / dt - 1e-12));
    SirTrajectory traj;
    traj.dt = dt;
    traj.susceptible.resize(steps + 1);
    traj.infected.resize(steps + 1);
    traj.recovered.resize(steps + 1);

    // contact term is normalised by the population so the infection rate is a
    // per-day rate comparable with the recovery rate
    const double beta = infection_rate / population;
    auto deriv = [beta, recovery_rate](const Eigen::Vector3d& y) {
        const double inf = beta * y(0) * y(1);
        return Eigen::Vector3d(-inf, inf - recovery_rate * y(1), recovery_rate * y(1));
    };

    Eigen::Vector3d y(population - i0, i0, 0.0);
    traj.susceptible(0) = y(0);
    traj.infected(0) = y(1);
    traj.recovered(0) = y(2);
    for (int s = 1; s <= steps; ++s) {
        const Eigen::Vector3d k1 = deriv(y);
        const Eigen::Vector3d k2 = deriv(y + 0.5 * dt * k1);
        const Eigen::Vector3d k3 = deriv(y + 0.5 * dt * k2);
        const Eigen::Vector3d k4 = deriv(y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite()) throw std::runtime_error("sir_solve: state blew up");
        traj.susceptible(s) = y(0);
        traj.infected(s) = y(1);
        traj.recovered(s) = y(2);
    }
    return traj;
}

double sir_peak(const SirTrajectory& trajectory) { return trajectory.infected.maxCoeff(); }

Problem sir_problem(const SirConfig& config) {
    Problem p;
    p.id = "sir";
    p.dim_x = 1;
    p.dim_theta = 1;
    p.config_key = "sir,xi=" + std::to_string(config.xi) + ",gamma=" + std::to_string(config.gamma) +
                   ",pop=" + std::to_string(config.population) + ",i0=" + std::to_string(config.i0) +
                   ",horizon=" + std::to_string(config.horizon_days) + ",dt=" + std::to_string(config.dt) +
                   ",gt=" + std::to_string(config.truth_samples);
    p.sample_theta = [config](Rng& rng) {
        Eigen::VectorXd t(1);
        t << rng.uniform(config.theta_lo, config.theta_hi);
        return t;
    };
    p.conditional_measure = [config](const Eigen::VectorXd& theta) {
        return Measure::gamma(theta(0), config.xi);
    };
    p.log_density = [config](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        return Measure::gamma(theta(0), config.xi).log_density(x);
    };

    ProblemOutput out;
    out.name = "peak_infected";
    out.integrand = [config](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        return sir_peak(sir_solve(x(0), config.gamma, config.population, config.i0, config.horizon_days,
                                  config.dt));
    };
    p.outputs.push_back(std::move(out));

    p.uses_pseudo_truth = true;
    p.pseudo_truth = [config](const Eigen::MatrixXd& thetas, std::uint64_t seed) {
        Eigen::VectorXd truth(thetas.rows());
        for (Eigen::Index j = 0; j < thetas.rows(); ++j) {
            Rng rng(hash64(seed, static_cast<std::uint64_t>(j)));
            double acc = 0.0;
            for (int s = 0; s < config.truth_samples; ++s) {
                const double x = rng.gamma(thetas(j, 0), config.xi);
                acc += sir_peak(sir_solve(x, config.gamma, config.population, config.i0, config.horizon_days,
                                          config.dt));
            }
            truth(j) = acc / config.truth_samples;
        }
        return truth;
    };

    p.backends.push_back(stein_backend(p.conditional_measure));
    p.default_backend = "stein";
    return p;
}

// --- finance --------------------------------------------------------------------

double butterfly_payoff(double price, double k1, double k2) {
    return std::max(price - k1, 0.0) + std::max(price - k2, 0.0) - 2.0 * std::max(price - 0.5 * (k1 + k2), 0.0);
}

double finance_integrand(double x, double shock, double k1, double k2) {
    return butterfly_payoff(x, k1, k2) - butterfly_payoff((1.0 + shock) * x, k1, k2);
}

double lognormal_call_price(double log_mean, double log_var, double strike) {
    const double sd = std::sqrt(log_var);
    const double mean = std::exp(log_mean + 0.5 * log_var);
    if (!(strike > 0.0)) return mean;
    const double d1 = (log_mean + log_var - std::log(strike)) / sd;
    return mean * normal_cdf(d1) - strike * normal_cdf(d1 - sd);
}

namespace {

double expected_butterfly(double log_mean, double log_var, double k1, double k2) {
    return lognormal_call_price(log_mean, log_var, k1) + lognormal_call_price(log_mean, log_var, k2) -
           2.0 * lognormal_call_price(log_mean, log_var, 0.5 * (k1 + k2));
}

double finance_truth(double theta, const FinanceConfig& c) {
    const double s2 = c.sigma * c.sigma * (c.zeta_time - c.eta_time);
    const double m = std::log(theta) - 0.5 * s2;
    // (1+s) X is lognormal with the log-mean shifted by log(1+s)
    return expected_butterfly(m, s2, c.k1, c.k2) - expected_butterfly(m + std::log1p(c.shock), s2, c.k1, c.k2);
}

}  // namespace

Problem finance_problem(const FinanceConfig& config) {
    if (!(config.zeta_time > config.eta_time))
        throw std::invalid_argument("finance_problem: maturity must come after the shock");
    Problem p;
    p.id = "finance";
    p.dim_x = 1;
    p.dim_theta = 1;
    p.config_key = "finance,s0=" + std::to_string(config.s0) + ",sigma=" + std::to_string(config.sigma) +
                   ",k1=" + std::to_string(config.k1) + ",k2=" + std::to_string(config.k2) +
                   ",s=" + std::to_string(config.shock);
    const double q_var = config.sigma * config.sigma * config.eta_time;
    const Measure q_measure = Measure::lognormal(std::log(config.s0) - 0.5 * q_var, q_var);
    p.sample_theta = [q_measure](Rng& rng) {
        return Eigen::VectorXd(sample_measure(q_measure, rng, 1).row(0).transpose());
    };
    const double p_var = config.sigma * config.sigma * (config.zeta_time - config.eta_time);
    p.conditional_measure = [p_var](const Eigen::VectorXd& theta) {
        if (!(theta(0) > 0.0)) throw std::invalid_argument("finance: theta must be positive");
        return Measure::lognormal(std::log(theta(0)) - 0.5 * p_var, p_var);
    };
    p.log_density = [cond = p.conditional_measure](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        return cond(theta).log_density(x);
    };

    ProblemOutput out;
    out.name = "shock_loss";
    out.integrand = [config](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        return finance_integrand(x(0), config.shock, config.k1, config.k2);
    };
    out.exact_truth = [config](const Eigen::VectorXd& theta) { return finance_truth(theta(0), config); };
    p.outputs.push_back(std::move(out));

    BqBackend lg;
    lg.name = "log-gaussian";
    lg.make_kernel = [](double l, double A, double, const Eigen::VectorXd&) { return Kernel::log_gaussian(l, A); };
    lg.make_embedding = [cond = p.conditional_measure](const Kernel& k, const Eigen::VectorXd& theta) {
        return EmbeddingPair::make(k, cond(theta));
    };
    p.backends.push_back(std::move(lg));
    p.backends.push_back(stein_backend(p.conditional_measure));
    p.default_backend = "log-gaussian";
    return p;
}

double finance_expected_loss(const FinanceConfig& config, int n_draws, Rng& rng) {
    const double q_var = config.sigma * config.sigma * config.eta_time;
    const Measure q_measure = Measure::lognormal(std::log(config.s0) - 0.5 * q_var, q_var);
    double acc = 0.0;
    for (int i = 0; i < n_draws; ++i) {
        const double theta = sample_measure(q_measure, rng, 1)(0, 0);
        acc += std::max(finance_truth(theta, config), 0.0);
    }
    return acc / n_draws;
}

// --- health economics -------------------------------------------------------------

Measure gaussian_condition(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           const std::vector<int>& observed_idx, const Eigen::VectorXd& observed_vals) {
    const int n = static_cast<int>(mean.size());
    const int k = static_cast<int>(observed_idx.size());
    if (static_cast<int>(observed_vals.size()) != k)
        throw std::invalid_argument("gaussian_condition: index/value count mismatch");
    std::vector<bool> is_obs(n, false);
    for (int idx : observed_idx) {
        if (idx < 0 || idx >= n) throw std::invalid_argument("gaussian_condition: index out of range");
        is_obs[static_cast<std::size_t>(idx)] = true;
    }
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
        if (!is_obs[static_cast<std::size_t>(i)]) free_idx.push_back(i);
    const int f = static_cast<int>(free_idx.size());

    Eigen::VectorXd mu_f(f), mu_o(k);
    Eigen::MatrixXd s_ff(f, f), s_fo(f, k), s_oo(k, k);
    for (int i = 0; i < f; ++i) mu_f(i) = mean(free_idx[i]);
    for (int i = 0; i < k; ++i) mu_o(i) = mean(observed_idx[i]);
    for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j) s_ff(i, j) = cov(free_idx[i], free_idx[j]);
    for (int i = 0; i < f; ++i)
        for (int j = 0; j < k; ++j) s_fo(i, j) = cov(free_idx[i], observed_idx[j]);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) s_oo(i, j) = cov(observed_idx[i], observed_idx[j]);

    const Eigen::LLT<Eigen::MatrixXd> llt(s_oo);
    if (llt.info() != Eigen::Success) throw std::runtime_error("gaussian_condition: observed block not SPD");
    const Eigen::MatrixXd gain = llt.solve(s_fo.transpose()).transpose();  // S_fo S_oo^{-1}
    Eigen::MatrixXd cond_cov = s_ff - gain * s_fo.transpose();
    cond_cov = 0.5 * (cond_cov + cond_cov.transpose()).eval();
    return Measure::gaussian(mu_f + gain * (observed_vals - mu_o), cond_cov);
}

namespace {

struct HealthTables {
    Eigen::VectorXd mean;  // 19: x1..x17, theta1, theta2
    Eigen::MatrixXd cov;
    Eigen::VectorXd mean_x, mean_theta;
    Eigen::MatrixXd cov_theta;
    Eigen::MatrixXd gain;      // Sigma_xtheta Sigma_theta^{-1} (17 x 2)
    Eigen::MatrixXd cond_cov;  // conditional covariance of x given theta
};

HealthTables health_tables() {
    HealthTables t;
    t.mean.resize(19);
    t.mean << 1000, 0.1, 5.2, 400, 0.3, 3.0, 0.25, -0.1, 0.5, 1500, 0.08, 6.1, 0.3, 3.0, 0.2, -0.1, 0.5, 0.7, 0.8;
    Eigen::VectorXd sd(19);
    sd << 1.0, 0.02, 1.0, 200, 0.1, 0.5, 0.1, 0.02, 0.2, 1.0, 0.02, 1.0, 0.05, 1.0, 0.05, 0.02, 0.2, 0.1, 0.1;
    t.cov = Eigen::MatrixXd::Zero(19, 19);
    for (int i = 0; i < 19; ++i) t.cov(i, i) = sd(i) * sd(i);
    // theta1, theta2, x6, x14 are pairwise correlated with coefficient 0.6
    const int corr[4] = {17, 18, 5, 13};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (a != b) t.cov(corr[a], corr[b]) = 0.6 * sd(corr[a]) * sd(corr[b]);

    t.mean_x = t.mean.head(17);
    t.mean_theta = t.mean.tail(2);
    t.cov_theta = t.cov.bottomRightCorner(2, 2);
    const Eigen::MatrixXd cov_xtheta = t.cov.topRightCorner(17, 2);
    t.gain = t.cov_theta.llt().solve(cov_xtheta.transpose()).transpose();
    Eigen::MatrixXd cc = t.cov.topLeftCorner(17, 17) - t.gain * cov_xtheta.transpose();
    t.cond_cov = 0.5 * (cc + cc.transpose());
    return t;
}

double health_arm_value(int arm, const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
    // one-based variable names from the model: arm 0 uses x5 x6, x7 x8 x9,
    // x1 + x2 x3 x4; arm 1 uses x13 x14, x15 x16 x17, x10 + x11 x12 x4
    if (arm == 0)
        return 1e4 * (theta(0) * x(4) * x(5) + x(6) * x(7) * x(8)) - (x(0) + x(1) * x(2) * x(3));
    return 1e4 * (theta(1) * x(12) * x(13) + x(14) * x(15) * x(16)) - (x(9) + x(10) * x(11) * x(3));
}

}  // namespace

HealthProblem health_problem() {
    const HealthTables t = health_tables();

    HealthProblem hp;
    hp.joint_mean = t.mean;
    hp.joint_cov = t.cov;
    hp.theta_marginal = Measure::gaussian(t.mean_theta, t.cov_theta);

    auto conditional = [t](const Eigen::VectorXd& theta) {
        return Measure::gaussian(t.mean_x + t.gain * (theta - t.mean_theta), t.cond_cov);
    };

    // All products in the arms split over conditionally independent factors,
    // so the conditional expectation only needs the conditional means.
    hp.conditional_value = [t](int arm, const Eigen::VectorXd& theta) {
        const Eigen::VectorXd mx = t.mean_x + t.gain * (theta - t.mean_theta);
        return health_arm_value(arm, mx, theta);
    };

    Problem p;
    p.id = "health";
    p.dim_x = 17;
    p.dim_theta = 2;
    p.config_key = "health";
    p.theta_dependent_integrand = true;
    const Measure q = hp.theta_marginal;
    p.sample_theta = [q](Rng& rng) {
        return Eigen::VectorXd(sample_measure(q, rng, 1).row(0).transpose());
    };
    p.conditional_measure = conditional;

    for (int arm = 0; arm < 2; ++arm) {
        ProblemOutput out;
        out.name = arm == 0 ? "arm1" : "arm2";
        out.integrand = [arm](const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
            return health_arm_value(arm, x, theta);
        };
        out.exact_truth = [arm, cv = hp.conditional_value](const Eigen::VectorXd& theta) {
            return cv(arm, theta);
        };
        p.outputs.push_back(std::move(out));
    }

    p.backends.push_back(matern_whitened_backend(17, conditional));
    p.backends.push_back(rbf_gaussian_backend(conditional));
    p.default_backend = "matern-it";
    hp.problem = std::move(p);
    return hp;
}

double HealthProblem::evppi_truth(long n_draws, std::uint64_t seed) const {
    Rng rng(seed);
    double mean_max = 0.0;
    double mean1 = 0.0, mean2 = 0.0;
    for (long i = 0; i < n_draws; ++i) {
        const Eigen::VectorXd theta = sample_measure(theta_marginal, rng, 1).row(0).transpose();
        const double v1 = conditional_value(0, theta);
        const double v2 = conditional_value(1, theta);
        mean_max += std::max(v1, v2);
        mean1 += v1;
        mean2 += v2;
    }
    const double n = static_cast<double>(n_draws);
    return mean_max / n - std::max(mean1 / n, mean2 / n);
}

double evppi_estimate(const std::vector<std::function<double(const Eigen::VectorXd&)>>& arm_values,
                      const std::function<Eigen::VectorXd(Rng&)>& sample_theta, int t_outer, Rng& rng) {
    if (arm_values.size() < 2) throw std::invalid_argument("evppi_estimate: need at least two arms");
    if (t_outer < 1) throw std::invalid_argument("evppi_estimate: need at least one outer draw");
    Eigen::VectorXd arm_means = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arm_values.size()));
    double mean_max = 0.0;
    for (int i = 0; i < t_outer; ++i) {
        const Eigen::VectorXd theta = sample_theta(rng);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < arm_values.size(); ++c) {
            const double v = arm_values[c](theta);
            arm_means(static_cast<Eigen::Index>(c)) += v;
            best = std::max(best, v);
        }
        mean_max += best;
    }
    arm_means /= static_cast<double>(t_outer);
    return mean_max / static_cast<double>(t_outer) - arm_means.maxCoeff();
}

Problem make_problem(const std::string& id, int d, std::uint64_t data_seed, const SirConfig& sir,
                     const FinanceConfig& finance, double linear_eta, LinearIntegrand linear_kind) {
    if (id == "linear") return linear_bayes_problem(d, linear_eta, make_linear_bayes_data(d, data_seed), linear_kind);
    if (id == "sir") return sir_problem(sir);
    if (id == "finance") return finance_problem(finance);
    if (id == "health") return health_problem().problem;
    throw std::invalid_argument("unknown problem '" + id + "' (expected linear, sir, finance or health)");
}

}  // namespace cbq
