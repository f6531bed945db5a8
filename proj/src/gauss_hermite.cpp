#include "cbq/gauss_hermite.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cbq {

GaussHermite gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = std::sqrt(0.5 * k);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussHermite rule;
    rule.nodes = es.eigenvalues();
    rule.weights.resize(n);
    const double mu0 = std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        rule.weights(i) = mu0 * v0 * v0;
    }
    return rule;
}

namespace {
const GaussHermite& cached_rule(int n) {
    static std::map<int, GaussHermite> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_hermite(n)).first;
    return it->second;
}
}  // namespace

double gauss_hermite_expectation(const std::function<double(double)>& h, double mean, double sd, int n) {
    const GaussHermite& rule = cached_rule(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += rule.weights(i) * h(mean + M_SQRT2 * sd * rule.nodes(i));
    return acc / std::sqrt(M_PI);
}

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussLegendre rule;
    rule.nodes = es.eigenvalues();
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        rule.weights(i) = 2.0 * v0 * v0;
    }
    return rule;
}

namespace {
const GaussLegendre& cached_gl(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
    return it->second;
}
}  // namespace

double gauss_legendre_integrate(const std::function<double(double)>& h, double lo, double hi, int n) {
    if (!(hi > lo)) return 0.0;
    const GaussLegendre& rule = cached_gl(n);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += rule.weights(i) * h(mid + half * rule.nodes(i));
    return half * acc;
}

double normal_expectation_with_kink(const std::function<double(double)>& h, double mean, double sd, double kink,
                                    int n) {
    const double lo = mean - 9.5 * sd, hi = mean + 9.5 * sd;
    const double inv_norm = 1.0 / (sd * std::sqrt(2.0 * M_PI));
    auto weighted = [&](double z) {
        const double u = (z - mean) / sd;
        return h(z) * inv_norm * std::exp(-0.5 * u * u);
    };
    if (kink <= lo || kink >= hi) return gauss_legendre_integrate(weighted, lo, hi, n);
    return gauss_legendre_integrate(weighted, lo, kink, n) + gauss_legendre_integrate(weighted, kink, hi, n);
}

}  // namespace cbq
