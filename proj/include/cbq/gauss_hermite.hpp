#pragma once

#include <functional>

#include <Eigen/Dense>

namespace cbq {

// Gauss-Hermite rule for the weight e^{-z^2} on the real line, computed by
// Golub-Welsch from the Jacobi matrix of the Hermite recurrence.
struct GaussHermite {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

GaussHermite gauss_hermite(int n);

// E_{Z ~ N(mean, sd^2)}[h(Z)] with an n-node rule.
double gauss_hermite_expectation(const std::function<double(double)>& h, double mean, double sd, int n = 64);

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

GaussLegendre gauss_legendre(int n);

double gauss_legendre_integrate(const std::function<double(double)>& h, double lo, double hi, int n = 80);

// E_{Z ~ N(mean, sd^2)}[h(Z)] for h smooth except for one kink: the domain is
// truncated at +-9.5 sd and split at the kink so each piece is integrated by
// a spectral-accuracy Legendre rule.
double normal_expectation_with_kink(const std::function<double(double)>& h, double mean, double sd, double kink,
                                    int n = 80);

}  // namespace cbq
