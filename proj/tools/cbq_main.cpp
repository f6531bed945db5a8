#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cbq/evaluation.hpp"
#include "cbq/stats.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<int> split_ints(const std::string& csv) {
    std::vector<int> out;
    for (const auto& s : split_list(csv)) out.push_back(std::stoi(s));
    return out;
}

std::vector<double> split_doubles(const std::string& csv) {
    std::vector<double> out;
    for (const auto& s : split_list(csv)) out.push_back(std::stod(s));
    return out;
}

struct CliValues {
    std::string problem = "linear";
    std::string methods = "cbq";
    std::string n = "10";
    std::string t = "10";
    int d = 2;
    int seeds = 20;
    std::uint64_t master_seed = 0;
    std::string lambda_theta = "auto";
    std::string kernel_x = "auto";
    std::string kernel_theta = "matern32";
    int t_test = 100;
    int threads = 1;
    std::string timing = "fixed";
    std::string out;
    std::string cache_dir;
    double dt = 0.1;
    double sir_xi = 10.0, sir_gamma = 0.05, sir_population = 1e6, sir_i0 = 10.0;
    double eta = 1.0;
    std::string linear_integrand = "second_moment";
    double k1 = 50.0, k2 = 150.0, shock = 0.2, s0 = 100.0, sigma = 0.3;
    std::string levels = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    bool dump_config = false;
};

void add_common_options(CLI::App* cmd, CliValues& v) {
    cmd->add_option("--problem", v.problem, "problem id: linear, sir, finance, health");
    cmd->add_option("--methods", v.methods, "comma-separated: cbq,mc,is,lsmc,klsmc,mobq");
    cmd->add_option("--n", v.n, "comma-separated per-parameter sample budgets");
    cmd->add_option("--t", v.t, "comma-separated parameter counts");
    cmd->add_option("--d", v.d, "dimension (linear problem)");
    cmd->add_option("--seeds", v.seeds, "number of repetitions");
    cmd->add_option("--master-seed", v.master_seed, "64-bit master seed");
    cmd->add_option("--lambda-theta", v.lambda_theta, "stage-2 regulariser: 'auto' or a number");
    cmd->add_option("--kernel-x", v.kernel_x, "stage-1 backend: auto, rbf, matern-it, stein, log-gaussian");
    cmd->add_option("--kernel-theta", v.kernel_theta, "stage-2 kernel: matern32 or rbf");
    cmd->add_option("--t-test", v.t_test, "test parameters per cell");
    cmd->add_option("--threads", v.threads, "worker threads");
    cmd->add_option("--timing", v.timing, "time_ms column: 'fixed' (deterministic output) or 'live'")
        ->check(CLI::IsMember({"fixed", "live"}));
    cmd->add_option("--out", v.out, "output CSV path (stdout when omitted)");
    cmd->add_option("--cache-dir", v.cache_dir, "pseudo-truth cache directory (default $CBQ_CACHE_DIR or ./cbq_cache)");
    cmd->add_option("--dt", v.dt, "SIR integrator step, days");
    cmd->add_option("--sir-xi", v.sir_xi, "Gamma rate of the SIR prior");
    cmd->add_option("--sir-gamma", v.sir_gamma, "SIR recovery rate");
    cmd->add_option("--sir-population", v.sir_population, "SIR population");
    cmd->add_option("--sir-i0", v.sir_i0, "initially infected");
    cmd->add_option("--eta", v.eta, "linear-model observation precision");
    cmd->add_option("--linear-integrand", v.linear_integrand, "second_moment or predictive_mean")
        ->check(CLI::IsMember({"second_moment", "predictive_mean"}));
    cmd->add_option("--k1", v.k1, "lower strike");
    cmd->add_option("--k2", v.k2, "upper strike");
    cmd->add_option("--shock", v.shock, "shock multiplier minus one");
    cmd->add_option("--s0", v.s0, "initial price");
    cmd->add_option("--sigma", v.sigma, "volatility");
    cmd->add_flag("--dump-config", v.dump_config, "print the effective configuration and exit");
    cmd->set_config("--config", "", "flat key = value configuration file");
    cmd->allow_config_extras(false);
}

cbq::RunConfig to_run_config(const CliValues& v) {
    cbq::RunConfig c;
    c.problem = v.problem;
    c.methods = split_list(v.methods);
    c.n_list = split_ints(v.n);
    c.t_list = split_ints(v.t);
    c.d = v.d;
    c.seeds = v.seeds;
    c.master_seed = v.master_seed;
    c.lambda_theta = v.lambda_theta;
    c.kernel_x = v.kernel_x;
    c.kernel_theta = v.kernel_theta;
    c.t_test = v.t_test;
    c.threads = v.threads;
    c.live_timing = v.timing == "live";
    c.cache_dir = v.cache_dir;
    c.sir.dt = v.dt;
    c.sir.xi = v.sir_xi;
    c.sir.gamma = v.sir_gamma;
    c.sir.population = v.sir_population;
    c.sir.i0 = v.sir_i0;
    c.linear_eta = v.eta;
    c.linear_kind = v.linear_integrand == "predictive_mean" ? cbq::LinearIntegrand::PredictiveMean
                                                            : cbq::LinearIntegrand::SecondMoment;
    c.finance.k1 = v.k1;
    c.finance.k2 = v.k2;
    c.finance.shock = v.shock;
    c.finance.s0 = v.s0;
    c.finance.sigma = v.sigma;
    return c;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file " + path);
    return file;
}

int dump_effective_config(const CLI::App& cmd) {
    std::cout << cmd.config_to_str(true, false);
    return 0;
}

int cmd_run(const CLI::App& cmd, const CliValues& v) {
    if (v.dump_config) return dump_effective_config(cmd);
    const cbq::RunConfig config = to_run_config(v);
    const auto rows = cbq::run_experiment(config);
    std::ofstream file;
    cbq::write_results_csv(open_output(v.out, file), rows, config.live_timing);
    for (const auto& row : rows)
        if (!row.error.empty()) {
            std::cerr << "cell failures occurred (see the error column)\n";
            return 2;
        }
    return 0;
}

int cmd_calibrate(const CLI::App& cmd, const CliValues& v) {
    if (v.dump_config) return dump_effective_config(cmd);
    const cbq::RunConfig config = to_run_config(v);
    const auto curve = cbq::run_calibration(config, split_doubles(v.levels));
    std::ofstream file;
    std::ostream& os = open_output(v.out, file);
    os << "level,coverage\n";
    char buf[32];
    for (std::size_t i = 0; i < curve.levels.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g", curve.levels[i], curve.coverage[i]);
        os << buf << "\n";
    }
    return 0;
}

int cmd_converge(const CLI::App& cmd, const CliValues& v) {
    if (v.dump_config) return dump_effective_config(cmd);
    cbq::RunConfig config = to_run_config(v);
    if (config.methods.size() != 1)
        throw CLI::ValidationError("--methods", "converge expects exactly one method");
    const auto rows = cbq::run_experiment(config);
    // median RMSE per N budget (T fixed by the first entry of --t)
    std::vector<std::pair<double, double>> points;
    for (int n : config.n_list) {
        std::vector<double> errs;
        for (const auto& row : rows)
            if (row.n == n && row.error.empty()) errs.push_back(row.rmse);
        points.emplace_back(static_cast<double>(n), cbq::median(errs));
    }
    const double slope = cbq::convergence_slope(points);
    std::ofstream file;
    std::ostream& os = open_output(v.out, file);
    os << "budget,median_rmse,slope\n";
    char buf[64];
    for (const auto& [budget, err] : points) {
        std::snprintf(buf, sizeof(buf), "%g,%.17g,%.6g", budget, err, slope);
        os << buf << "\n";
    }
    return 0;
}

int cmd_ground_truth(const CLI::App& cmd, const CliValues& v) {
    if (v.dump_config) return dump_effective_config(cmd);
    const cbq::RunConfig config = to_run_config(v);
    const cbq::Problem problem = cbq::make_problem(config.problem, config.d,
                                                   cbq::hash64(config.master_seed, 0xd0d0), config.sir,
                                                   config.finance, config.linear_eta, config.linear_kind);
    if (!problem.uses_pseudo_truth) {
        std::cout << "problem '" << problem.id << "' has exact ground truth; nothing to cache\n";
        return 0;
    }
    const Eigen::MatrixXd test_thetas = cbq::draw_test_thetas(problem, config.t_test, config.master_seed);
    bool hit = false;
    cbq::ground_truth_table(problem, test_thetas, cbq::resolve_cache_dir(config.cache_dir), config.gt_seed, &hit);
    std::cout << (hit ? "cache hit\n" : "cache built\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional Bayesian quadrature benchmark"};
    app.require_subcommand(1);

    CliValues run_v, cal_v, conv_v, gt_v;
    CLI::App* run = app.add_subcommand("run", "RMSE sweep over (N, T, seed) cells, CSV output");
    add_common_options(run, run_v);
    CLI::App* calibrate = app.add_subcommand("calibrate", "CBQ credible-interval coverage curve");
    add_common_options(calibrate, cal_v);
    calibrate->add_option("--levels", cal_v.levels, "comma-separated credible levels in (0,1)");
    CLI::App* converge = app.add_subcommand("converge", "median RMSE against N with a log-log slope fit");
    add_common_options(converge, conv_v);
    CLI::App* ground_truth = app.add_subcommand("ground-truth", "build the pseudo-ground-truth cache");
    add_common_options(ground_truth, gt_v);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(*run, run_v);
        if (calibrate->parsed()) return cmd_calibrate(*calibrate, cal_v);
        if (converge->parsed()) return cmd_converge(*converge, conv_v);
        if (ground_truth->parsed()) return cmd_ground_truth(*ground_truth, gt_v);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
