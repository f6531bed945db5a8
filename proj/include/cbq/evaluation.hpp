#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbq/pipelines.hpp"
#include "cbq/problems.hpp"

namespace cbq {

double rmse(const Eigen::VectorXd& estimates, const Eigen::VectorXd& truths);

// Fraction of (posterior, truth) pairs whose central credible interval
// mean +- z_{(1+level)/2} sd contains the truth, one entry per level.
std::vector<double> calibration_coverage(const std::vector<std::pair<double, double>>& posteriors,
                                         const Eigen::VectorXd& truths, const std::vector<double>& levels);

// Least-squares slope of log(rmse) against log(budget); needs >= 3 points.
double convergence_slope(const std::vector<std::pair<double, double>>& budget_rmse);

struct RunConfig {
    std::string problem = "linear";
    std::vector<std::string> methods{"cbq"};
    std::vector<int> n_list{10};
    std::vector<int> t_list{10};
    int d = 2;
    int seeds = 20;
    std::uint64_t master_seed = 0;
    std::string kernel_x = "auto";
    std::string kernel_theta = "matern32";
    std::string lambda_theta = "auto";  // "auto" or a number
    int t_test = 100;
    int threads = 1;
    bool live_timing = false;  // live wall-clock in the CSV breaks byte-for-byte determinism
    std::string cache_dir;     // empty: $CBQ_CACHE_DIR or ./cbq_cache
    std::uint64_t gt_seed = 20240901;
    SirConfig sir;
    FinanceConfig finance;
    double linear_eta = 1.0;
    LinearIntegrand linear_kind = LinearIntegrand::SecondMoment;
};

struct ResultRow {
    std::string problem;
    std::string method;
    int d = 0;
    int n = 0;
    int t = 0;
    std::uint64_t seed = 0;
    double rmse = 0.0;
    double time_ms = 0.0;
    std::string hypers;
    int jitter_events = 0;
    std::string error;
};

// One row per (method, N, T, seed) cell.  All methods in a cell share the
// same draws; per-cell streams are hash64(master_seed, data_cell_index), so
// the output is independent of the worker-thread count.
std::vector<ResultRow> run_experiment(const RunConfig& config);

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool live_timing);

struct CalibrationCurve {
    std::vector<double> levels;
    std::vector<double> coverage;
};

// CBQ coverage across `seeds` repetitions x t_test test points.
CalibrationCurve run_calibration(const RunConfig& config, const std::vector<double>& levels);

std::string resolve_cache_dir(const std::string& flag_value);

// Ground truth at the test points: exact when available, otherwise the
// seed-pinned pseudo truth, cached under cache_dir keyed by the problem
// configuration (one file per key; a second call is a cache hit).
Eigen::MatrixXd ground_truth_table(const Problem& problem, const Eigen::MatrixXd& test_thetas,
                                   const std::string& cache_dir, std::uint64_t gt_seed, bool* cache_hit = nullptr);

Eigen::MatrixXd draw_test_thetas(const Problem& problem, int t_test, std::uint64_t master_seed);

}  // namespace cbq
