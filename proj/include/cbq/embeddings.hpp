#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "cbq/kernels.hpp"
#include "cbq/measures.hpp"

namespace cbq {

// A (kernel, measure) pair with a closed-form kernel mean embedding
// mu(x) = E_{X~P}[k(X, x)] and initial error E_{X,X'~P}[k(X, X')].
//
// Supported pairs:
//   GaussianRbf            x  Gaussian(m, S)
//   LogGaussian            x  Lognormal(m, s2)
//   Stein(base, score, c)  x  the score's own measure  (mu == c)
//   Matern32 tensor-product x Gaussian(0, Id)          (per-dimension
//                             Gauss-Hermite integrals, 64 nodes)
class EmbeddingPair {
public:
    static EmbeddingPair make(const Kernel& kernel, const Measure& measure);

    // Lognormal pairs with the initial error replaced by the empirical
    // average of mu over the given samples (kept for fidelity experiments;
    // make() uses the exact log-space value).
    static EmbeddingPair make_empirical(const Kernel& kernel, const Measure& measure,
                                        const Eigen::VectorXd& samples);

    double kme(const Eigen::VectorXd& x) const { return mu_(x); }
    Eigen::VectorXd kme_all(const Eigen::MatrixXd& X) const;
    double initial_error() const { return initial_error_; }

    const Kernel& kernel() const { return kernel_; }
    const Measure& measure() const { return measure_; }

private:
    EmbeddingPair(Kernel k, Measure m) : kernel_(std::move(k)), measure_(std::move(m)) {}

    Kernel kernel_;
    Measure measure_;
    std::function<double(const Eigen::VectorXd&)> mu_;
    double initial_error_ = 0.0;
};

double kme(const EmbeddingPair& pair, const Eigen::VectorXd& x);
double initial_error(const EmbeddingPair& pair);

// x = m + L u with L the lower Cholesky factor of the covariance, mapping
// u ~ N(0, Id) to N(m, S).
Eigen::VectorXd inverse_transform(const Measure& gaussian_measure, const Eigen::VectorXd& u);

// g(x) = f(x) p(x) / q(x) so that E_Q[g] = E_P[f]; the returned integrand
// throws if q vanishes at an evaluation point.
std::function<double(const Eigen::VectorXd&)> reweight_integrand(
    std::function<double(const Eigen::VectorXd&)> f, std::function<double(const Eigen::VectorXd&)> p_density,
    std::function<double(const Eigen::VectorXd&)> q_density);

struct OracleEstimate {
    double value = 0.0;
    double error = 0.0;  // quadrature error bound, or Monte Carlo standard error
    bool monte_carlo = false;
};

// Brute-force E_{X~P}[h(X)] for test oracles: adaptive Gauss-Kronrod for
// d <= 2 smooth cases, Monte Carlo (>= 10^6 draws) otherwise.
OracleEstimate integrate_measure(const std::function<double(const Eigen::VectorXd&)>& h, const Measure& measure,
                                 double tol, std::uint64_t mc_seed = 0x9c0ffeeULL,
                                 bool force_monte_carlo = false);

// Oracle for mu(x) = E_{X~P}[k(X, x)]; Stein kernels always take the Monte
// Carlo path (their integrand involves the score, which is unbounded at the
// support boundary for Gamma/Lognormal measures).
OracleEstimate numeric_kme_oracle(const Kernel& kernel, const Measure& measure, const Eigen::VectorXd& x,
                                  double tol, std::uint64_t mc_seed = 0x9c0ffeeULL);

}  // namespace cbq
