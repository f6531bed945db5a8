#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbq/embeddings.hpp"
#include "cbq/kernels.hpp"
#include "cbq/measures.hpp"
#include "cbq/rng.hpp"

namespace cbq {

// Stage-1 ingredients a problem offers to BQ-based estimators: how to build
// the k_x kernel (Stein kernels depend on theta through the score), how to
// map raw samples into the coordinates the embedding lives in, and the
// embedding itself.
struct BqBackend {
    std::string name;
    bool is_stein = false;
    std::function<Kernel(double lengthscale, double amplitude, double constant, const Eigen::VectorXd& theta)>
        make_kernel;
    // identity when null
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd& samples, const Eigen::VectorXd& theta)> transform;
    std::function<EmbeddingPair(const Kernel& kernel, const Eigen::VectorXd& theta)> make_embedding;

    Eigen::MatrixXd apply_transform(const Eigen::MatrixXd& samples, const Eigen::VectorXd& theta) const {
        return transform ? transform(samples, theta) : samples;
    }
};

struct ProblemOutput {
    std::string name;
    std::function<double(const Eigen::VectorXd& x, const Eigen::VectorXd& theta)> integrand;
    std::function<double(const Eigen::VectorXd& theta)> exact_truth;  // null for pseudo-truth problems
};

// A conditional-expectation benchmark: theta sampler, conditional measure,
// integrand(s), ground truth (exact map or seed-pinned pseudo truth) and the
// stage-1 backends it supports.
struct Problem {
    std::string id;
    int dim_x = 1;
    int dim_theta = 1;
    std::function<Eigen::VectorXd(Rng&)> sample_theta;
    std::function<Measure(const Eigen::VectorXd& theta)> conditional_measure;
    std::vector<ProblemOutput> outputs;
    bool theta_dependent_integrand = false;
    std::function<double(const Eigen::VectorXd& theta, const Eigen::VectorXd& x)> log_density;

    bool uses_pseudo_truth = false;
    // per-theta pseudo ground truth (seed-pinned); null for exact problems
    std::function<Eigen::VectorXd(const Eigen::MatrixXd& thetas, std::uint64_t seed)> pseudo_truth;
    std::string config_key;  // cache-key material describing the configuration

    std::vector<BqBackend> backends;
    std::string default_backend;

    const BqBackend& backend(const std::string& name) const;  // "auto" resolves the default
    Eigen::VectorXd truth_at(const Eigen::MatrixXd& thetas, int output) const;  // exact path only
};

// --- Bayesian sensitivity for linear models -------------------------------

enum class LinearIntegrand { SecondMoment, PredictiveMean };

struct LinearBayesData {
    Eigen::MatrixXd design;      // m x d
    Eigen::VectorXd responses;   // m
    Eigen::VectorXd new_point;   // d, used by the predictive-mean integrand
};

// m = 10 d rows, standard-normal design and weights, unit observation noise.
LinearBayesData make_linear_bayes_data(int d, std::uint64_t seed);

// Conjugate posterior N(m, S) with S^{-1} = diag(1/theta) + eta Y^T Y and
// m = eta S Y^T Z; theta ranges over (1, 3)^d with a uniform Q.
Problem linear_bayes_problem(int d, double eta, const LinearBayesData& data,
                             LinearIntegrand kind = LinearIntegrand::SecondMoment);

// --- SIR epidemic ----------------------------------------------------------

struct SirConfig {
    double xi = 10.0;          // Gamma rate of the prior on the infection rate
    double gamma = 0.05;       // recovery rate
    double population = 1e6;
    double i0 = 10.0;          // initially infected
    double horizon_days = 150.0;
    double dt = 0.1;
    int truth_samples = 5000;  // pseudo ground-truth MC budget per theta
    double theta_lo = 2.0, theta_hi = 9.0;
};

struct SirTrajectory {
    Eigen::VectorXd susceptible, infected, recovered;
    double dt = 0.0;
};

// Fixed-step RK4 for dS = -x S I / P, dI = x S I / P - g I, dR = g I.
SirTrajectory sir_solve(double infection_rate, double recovery_rate, double population, double i0,
                        double horizon_days, double dt);
double sir_peak(const SirTrajectory& trajectory);

Problem sir_problem(const SirConfig& config = {});

// --- Butterfly option under Black-Scholes ----------------------------------

struct FinanceConfig {
    double s0 = 100.0;
    double sigma = 0.3;
    double k1 = 50.0, k2 = 150.0;
    double shock = 0.2;      // price multiplier is 1 + shock
    double eta_time = 1.0;   // shock time
    double zeta_time = 2.0;  // maturity
};

double butterfly_payoff(double price, double k1, double k2);
double finance_integrand(double x, double shock, double k1, double k2);
// E[max(X - K, 0)] for X ~ Lognormal(log_mean, log_var)
double lognormal_call_price(double log_mean, double log_var, double strike);

Problem finance_problem(const FinanceConfig& config = {});
// L = E_Q[max(I(theta), 0)] by outer Monte Carlo over the exact I.
double finance_expected_loss(const FinanceConfig& config, int n_draws, Rng& rng);

// --- Health economics / EVPPI ----------------------------------------------

// Conditional Gaussian of the unobserved coordinates given the observed ones.
Measure gaussian_condition(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           const std::vector<int>& observed_idx, const Eigen::VectorXd& observed_vals);

struct HealthProblem {
    Problem problem;  // two outputs, one per treatment arm
    Eigen::VectorXd joint_mean;  // 19 entries: x1..x17 then theta1, theta2
    Eigen::MatrixXd joint_cov;
    Measure theta_marginal = Measure::gaussian(0.0, 1.0);
    // analytic conditional expectation of arm c (0 or 1) at theta
    std::function<double(int arm, const Eigen::VectorXd& theta)> conditional_value;
    // pseudo truth: Monte Carlo over n_draws theta draws with the analytic arms
    double evppi_truth(long n_draws, std::uint64_t seed) const;
};

HealthProblem health_problem();

// EVPPI = E[max_c I_c(theta)] - max_c E[I_c(theta)] with the conditional
// values supplied by fitted estimators (or exact maps) and the outer
// expectations by Monte Carlo over t_outer draws.
double evppi_estimate(const std::vector<std::function<double(const Eigen::VectorXd&)>>& arm_values,
                      const std::function<Eigen::VectorXd(Rng&)>& sample_theta, int t_outer, Rng& rng);

Problem make_problem(const std::string& id, int d, std::uint64_t data_seed, const SirConfig& sir = {},
                     const FinanceConfig& finance = {}, double linear_eta = 1.0,
                     LinearIntegrand linear_kind = LinearIntegrand::SecondMoment);

}  // namespace cbq
