#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbq/baselines.hpp"
#include "cbq/hyperopt.hpp"
#include "cbq/problems.hpp"

namespace cbq {

// Training data for one experiment cell: T parameter draws, N conditional
// samples per draw and the integrand values for every problem output.
struct CellData {
    Eigen::MatrixXd thetas;                        // T x p
    std::vector<Eigen::MatrixXd> samples;          // per t: N x d
    std::vector<std::vector<Eigen::VectorXd>> f;   // [output][t], length N
    int n = 0;
};

CellData draw_cell_data(const Problem& problem, int n, int t, Rng& rng);

struct PipelineOptions {
    std::string backend = "auto";
    std::string theta_kernel = "matern32";      // matern32 | rbf
    std::optional<double> lambda_theta;         // empty -> empirical-Bayes grid
    double lambda_x = 0.0;
    HyperGrid grid;
    int mobq_max_points = 3000;
    double validation_fraction = 0.2;           // held-out share for LSMC/KLSMC
};

// Fitted conditional estimator: one predictor per problem output returning
// (mean, variance); variance is zero for the point estimators.
struct MethodFit {
    std::vector<std::function<std::pair<double, double>(const Eigen::VectorXd&)>> predictors;
    std::string hypers;
    int jitter_events = 0;
    bool has_posterior = false;
};

MethodFit fit_cbq(const Problem& problem, const CellData& data, const PipelineOptions& options);
MethodFit fit_klsmc(const Problem& problem, const CellData& data, const PipelineOptions& options);
MethodFit fit_lsmc(const Problem& problem, const CellData& data, const PipelineOptions& options);
MethodFit fit_is(const Problem& problem, const CellData& data, const PipelineOptions& options);
MethodFit fit_mobq(const Problem& problem, const CellData& data, const PipelineOptions& options);

// method in {cbq, is, lsmc, klsmc, mobq}; mc is handled separately because it
// cannot predict at unseen parameter values.
MethodFit fit_method(const std::string& method, const Problem& problem, const CellData& data,
                     const PipelineOptions& options);

Eigen::VectorXd mc_training_estimates(const CellData& data, int output);

}  // namespace cbq
