#include "cbq/evaluation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cbq/stats.hpp"

namespace cbq {

double rmse(const Eigen::VectorXd& estimates, const Eigen::VectorXd& truths) {
    if (estimates.size() != truths.size() || estimates.size() == 0)
        throw std::invalid_argument("rmse: size mismatch");
    return std::sqrt((estimates - truths).squaredNorm() / static_cast<double>(estimates.size()));
}

std::vector<double> calibration_coverage(const std::vector<std::pair<double, double>>& posteriors,
                                         const Eigen::VectorXd& truths, const std::vector<double>& levels) {
    if (static_cast<Eigen::Index>(posteriors.size()) != truths.size() || posteriors.empty())
        throw std::invalid_argument("calibration_coverage: size mismatch");
    std::vector<double> coverage(levels.size(), 0.0);
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const double level = levels[li];
        if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("calibration_coverage: level out of range");
        const double z = normal_quantile(0.5 * (1.0 + level));
        long hits = 0;
        for (std::size_t i = 0; i < posteriors.size(); ++i) {
            const auto& [mean, sd] = posteriors[i];
            if (!(sd >= 0.0)) throw std::invalid_argument("calibration_coverage: negative sd");
            if (std::abs(truths(static_cast<Eigen::Index>(i)) - mean) <= z * sd) ++hits;
        }
        coverage[li] = static_cast<double>(hits) / static_cast<double>(posteriors.size());
    }
    return coverage;
}

double convergence_slope(const std::vector<std::pair<double, double>>& budget_rmse) {
    if (budget_rmse.size() < 3) throw std::invalid_argument("convergence_slope: need at least three points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [budget, err] : budget_rmse) {
        if (!(budget > 0.0) || !(err > 0.0))
            throw std::invalid_argument("convergence_slope: budgets and errors must be positive");
        const double x = std::log(budget), y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(budget_rmse.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string resolve_cache_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("CBQ_CACHE_DIR"); env && *env) return env;
    return "cbq_cache";
}

Eigen::MatrixXd draw_test_thetas(const Problem& problem, int t_test, std::uint64_t master_seed) {
    Rng rng(hash64(master_seed, 0x7e57));
    Eigen::MatrixXd thetas(t_test, problem.dim_theta);
    for (int i = 0; i < t_test; ++i) thetas.row(i) = problem.sample_theta(rng).transpose();
    return thetas;
}

namespace {

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

std::string cache_key(const Problem& problem, int t_test, std::uint64_t master_seed, std::uint64_t gt_seed) {
    std::ostringstream os;
    os << problem.config_key << ",t_test=" << t_test << ",master=" << master_seed << ",gt=" << gt_seed;
    return os.str();
}

std::string cache_path(const std::string& dir, const Problem& problem, const std::string& key) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << dir << "/" << problem.id << "_" << std::hex << h << ".csv";
    return os.str();
}

bool load_cache(const std::string& path, const std::string& key, Eigen::Index rows, Eigen::Index cols,
                Eigen::MatrixXd* out) {
    std::ifstream in(path);
    if (!in) return false;
    std::string header;
    if (!std::getline(in, header) || header != "# cbq-cache v1 " + key) return false;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        std::string line;
        if (!std::getline(in, line)) return false;
        std::istringstream ls(line);
        std::string field;
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (!std::getline(ls, field, ',')) return false;
            m(i, j) = std::strtod(field.c_str(), nullptr);
        }
    }
    *out = std::move(m);
    return true;
}

void store_cache(const std::string& path, const std::string& key, const Eigen::MatrixXd& table) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write cache file " + path);
    out << "# cbq-cache v1 " << key << "\n";
    char buf[32];
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", table(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

}  // namespace

Eigen::MatrixXd ground_truth_table(const Problem& problem, const Eigen::MatrixXd& test_thetas,
                                   const std::string& cache_dir, std::uint64_t gt_seed, bool* cache_hit) {
    const Eigen::Index s = test_thetas.rows();
    const Eigen::Index outputs = static_cast<Eigen::Index>(problem.outputs.size());
    if (cache_hit) *cache_hit = false;
    if (!problem.uses_pseudo_truth) {
        Eigen::MatrixXd truth(s, outputs);
        for (Eigen::Index out = 0; out < outputs; ++out)
            truth.col(out) = problem.truth_at(test_thetas, static_cast<int>(out));
        return truth;
    }
    const std::string key = cache_key(problem, static_cast<int>(s), 0, gt_seed) + ",thetas=" + [&] {
        // the key ties the cache to the exact test points
        std::uint64_t h = 0;
        for (Eigen::Index i = 0; i < test_thetas.size(); ++i)
            h = hash64(h, static_cast<std::uint64_t>(std::llround(test_thetas(i) * 1e12)));
        std::ostringstream os;
        os << std::hex << h;
        return os.str();
    }();
    const std::string path = cache_path(cache_dir, problem, key);
    Eigen::MatrixXd cached;
    if (load_cache(path, key, s, static_cast<Eigen::Index>(test_thetas.cols()) + outputs, &cached)) {
        if (cache_hit) *cache_hit = true;
        return cached.rightCols(outputs);
    }
    Eigen::MatrixXd truth(s, outputs);
    for (Eigen::Index out = 0; out < outputs; ++out) {
        if (problem.pseudo_truth)
            truth.col(out) = problem.pseudo_truth(test_thetas, gt_seed + static_cast<std::uint64_t>(out));
        else
            throw std::logic_error("problem declares pseudo truth but provides no generator");
    }
    Eigen::MatrixXd table(s, test_thetas.cols() + outputs);
    table << test_thetas, truth;
    store_cache(path, key, table);
    return truth;
}

namespace {

PipelineOptions pipeline_options(const RunConfig& config) {
    PipelineOptions options;
    options.backend = config.kernel_x;
    options.theta_kernel = config.kernel_theta;
    if (config.lambda_theta != "auto") options.lambda_theta = std::stod(config.lambda_theta);
    return options;
}

Problem build_problem(const RunConfig& config) {
    return make_problem(config.problem, config.d, hash64(config.master_seed, 0xd0d0), config.sir, config.finance,
                        config.linear_eta, config.linear_kind);
}

struct CellTask {
    int n = 0, t = 0;
    int seed = 0;
    std::size_t index = 0;  // data-cell stream index
};

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace

std::vector<ResultRow> run_experiment(const RunConfig& config) {
    if (config.n_list.empty() || config.t_list.empty() || config.seeds < 1)
        throw std::invalid_argument("run_experiment: budget lists and seed count must be nonempty");
    for (int v : config.n_list)
        if (v < 1) throw std::invalid_argument("run_experiment: N must be positive");
    for (int v : config.t_list)
        if (v < 1) throw std::invalid_argument("run_experiment: T must be positive");

    const Problem problem = build_problem(config);
    const PipelineOptions options = pipeline_options(config);
    // fail early on unusable combinations (e.g. IS with theta-dependent f)
    for (const auto& method : config.methods) {
        if (method == "mc") {
            if (problem.uses_pseudo_truth)
                throw std::invalid_argument(
                    "method 'mc' needs exact ground truth at the training parameters; problem '" + problem.id +
                    "' only has a pseudo truth at the test points");
            continue;
        }
        if (method == "is" && problem.theta_dependent_integrand)
            throw std::invalid_argument(
                "importance sampling is not applicable to problem '" + problem.id +
                "': its integrand depends on theta, so density reweighting cannot transfer samples");
        if (method != "cbq" && method != "is" && method != "lsmc" && method != "klsmc" && method != "mobq")
            throw std::invalid_argument("unknown method '" + method + "'");
        problem.backend(method == "cbq" || method == "mobq" ? options.backend : "auto");
    }

    const Eigen::MatrixXd test_thetas = draw_test_thetas(problem, config.t_test, config.master_seed);
    const std::string cache_dir = resolve_cache_dir(config.cache_dir);
    const Eigen::MatrixXd truth = ground_truth_table(problem, test_thetas, cache_dir, config.gt_seed);
    Eigen::VectorXd truth_flat(truth.size());
    for (Eigen::Index out = 0; out < truth.cols(); ++out)
        truth_flat.segment(out * truth.rows(), truth.rows()) = truth.col(out);

    std::vector<CellTask> cells;
    std::size_t index = 0;
    for (int n : config.n_list)
        for (int t : config.t_list)
            for (int seed = 0; seed < config.seeds; ++seed) cells.push_back({n, t, seed, index++});

    std::vector<std::vector<ResultRow>> per_cell(cells.size());
    parallel_for(cells.size(), config.threads, [&](std::size_t ci) {
        const CellTask& cell = cells[ci];
        Rng rng(hash64(config.master_seed, cell.index));
        CellData data;
        std::string data_error;
        try {
            data = draw_cell_data(problem, cell.n, cell.t, rng);
        } catch (const std::exception& e) {
            data_error = e.what();
        }
        for (const auto& method : config.methods) {
            ResultRow row;
            row.problem = problem.id;
            row.method = method;
            row.d = problem.dim_x;
            row.n = cell.n;
            row.t = cell.t;
            row.seed = static_cast<std::uint64_t>(cell.seed);
            row.rmse = std::numeric_limits<double>::quiet_NaN();
            if (!data_error.empty()) {
                row.error = sanitize(data_error);
                per_cell[ci].push_back(std::move(row));
                continue;
            }
            try {
                const auto t0 = std::chrono::steady_clock::now();
                if (method == "mc") {
                    // MC cannot estimate at unseen parameters: it is scored at
                    // the training points against the exact truth.
                    Eigen::VectorXd est(cell.t * static_cast<int>(problem.outputs.size()));
                    Eigen::VectorXd tru(est.size());
                    for (std::size_t out = 0; out < problem.outputs.size(); ++out) {
                        est.segment(static_cast<Eigen::Index>(out) * cell.t, cell.t) =
                            mc_training_estimates(data, static_cast<int>(out));
                        tru.segment(static_cast<Eigen::Index>(out) * cell.t, cell.t) =
                            problem.truth_at(data.thetas, static_cast<int>(out));
                    }
                    row.rmse = rmse(est, tru);
                    row.hypers = "none";
                } else {
                    const MethodFit fit = fit_method(method, problem, data, options);
                    Eigen::VectorXd est(truth_flat.size());
                    for (std::size_t out = 0; out < fit.predictors.size(); ++out)
                        for (Eigen::Index i = 0; i < test_thetas.rows(); ++i)
                            est(static_cast<Eigen::Index>(out) * test_thetas.rows() + i) =
                                fit.predictors[out](test_thetas.row(i).transpose()).first;
                    row.rmse = rmse(est, truth_flat);
                    row.hypers = fit.hypers;
                    row.jitter_events = fit.jitter_events;
                }
                const auto t1 = std::chrono::steady_clock::now();
                row.time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            } catch (const std::exception& e) {
                row.error = sanitize(e.what());
                row.rmse = std::numeric_limits<double>::quiet_NaN();
            }
            per_cell[ci].push_back(std::move(row));
        }
    });

    std::vector<ResultRow> rows;
    rows.reserve(cells.size() * config.methods.size());
    for (auto& group : per_cell)
        for (auto& row : group) rows.push_back(std::move(row));
    return rows;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool live_timing) {
    os << "problem,method,d,N,T,seed,rmse,time_ms,hypers,jitter_events,error\n";
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.rmse);
        os << row.problem << ',' << row.method << ',' << row.d << ',' << row.n << ',' << row.t << ',' << row.seed
           << ',' << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.3f", live_timing ? row.time_ms : 1.0);
        os << buf << ',' << row.hypers << ',' << row.jitter_events << ',' << row.error << '\n';
    }
}

CalibrationCurve run_calibration(const RunConfig& config, const std::vector<double>& levels) {
    const Problem problem = build_problem(config);
    const PipelineOptions options = pipeline_options(config);
    const Eigen::MatrixXd test_thetas = draw_test_thetas(problem, config.t_test, config.master_seed);
    const std::string cache_dir = resolve_cache_dir(config.cache_dir);
    const Eigen::MatrixXd truth = ground_truth_table(problem, test_thetas, cache_dir, config.gt_seed);

    const int n = config.n_list.front();
    const int t = config.t_list.front();
    std::vector<std::vector<std::pair<double, double>>> per_rep(static_cast<std::size_t>(config.seeds));
    parallel_for(static_cast<std::size_t>(config.seeds), config.threads, [&](std::size_t rep) {
        Rng rng(hash64(config.master_seed, rep));
        const CellData data = draw_cell_data(problem, n, t, rng);
        const MethodFit fit = fit_cbq(problem, data, options);
        auto& sink = per_rep[rep];
        for (std::size_t out = 0; out < fit.predictors.size(); ++out)
            for (Eigen::Index i = 0; i < test_thetas.rows(); ++i) {
                const auto [mean, var] = fit.predictors[out](test_thetas.row(i).transpose());
                sink.emplace_back(mean, std::sqrt(std::max(var, 0.0)));
            }
    });

    std::vector<std::pair<double, double>> posteriors;
    Eigen::VectorXd truths(static_cast<Eigen::Index>(config.seeds) * truth.size());
    Eigen::Index at = 0;
    for (std::size_t rep = 0; rep < per_rep.size(); ++rep) {
        for (const auto& p : per_rep[rep]) posteriors.push_back(p);
        for (Eigen::Index out = 0; out < truth.cols(); ++out)
            for (Eigen::Index i = 0; i < truth.rows(); ++i) truths(at++) = truth(i, out);
    }
    CalibrationCurve curve;
    curve.levels = levels;
    curve.coverage = calibration_coverage(posteriors, truths, levels);
    return curve;
}

}  // namespace cbq
