#include "cbq/pipelines.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "cbq/cbq.hpp"
#include "cbq/stats.hpp"

namespace cbq {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

Kernel make_theta_kernel(const std::string& family, double l, double A) {
    if (family == "matern32") return Kernel::matern32(l, A);
    if (family == "rbf") return Kernel::gaussian_rbf(l, A);
    throw std::invalid_argument("unknown stage-2 kernel family '" + family + "'");
}

bool constant_values(const Eigen::VectorXd& v) {
    if (v.size() < 2) return true;
    const double sd = std::sqrt((v.array() - v.mean()).square().mean());
    return !(sd > 1e-12 * (1.0 + std::abs(v.mean())));
}

std::function<std::pair<double, double>(const Eigen::VectorXd&)> constant_predictor(double value) {
    return [value](const Eigen::VectorXd&) { return std::make_pair(value, 0.0); };
}

// Deterministic tail split used for the validation RMSE of LSMC/KLSMC.
Eigen::Index validation_count(Eigen::Index t, double fraction) {
    const Eigen::Index v = static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(t)));
    return std::min(std::max<Eigen::Index>(v, 2), t - 1);
}

struct SplitData {
    Eigen::MatrixXd train_thetas, valid_thetas;
    Eigen::VectorXd train_targets, valid_targets;
};

SplitData tail_split(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& targets, double fraction) {
    const Eigen::Index t = thetas.rows();
    const Eigen::Index v = validation_count(t, fraction);
    SplitData s;
    s.train_thetas = thetas.topRows(t - v);
    s.valid_thetas = thetas.bottomRows(v);
    s.train_targets = targets.head(t - v);
    s.valid_targets = targets.tail(v);
    return s;
}

double validation_rmse(const std::function<double(const Eigen::VectorXd&)>& predict,
                       const Eigen::MatrixXd& thetas, const Eigen::VectorXd& targets) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < thetas.rows(); ++i) {
        const double e = predict(thetas.row(i).transpose()) - targets(i);
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(thetas.rows()));
}

}  // namespace

CellData draw_cell_data(const Problem& problem, int n, int t, Rng& rng) {
    if (n < 1 || t < 1) throw std::invalid_argument("draw_cell_data: budgets must be positive");
    CellData data;
    data.n = n;
    data.thetas.resize(t, problem.dim_theta);
    data.samples.resize(static_cast<std::size_t>(t));
    data.f.assign(problem.outputs.size(), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(t)));
    for (int j = 0; j < t; ++j) {
        const Eigen::VectorXd theta = problem.sample_theta(rng);
        data.thetas.row(j) = theta.transpose();
        const Measure m = problem.conditional_measure(theta);
        data.samples[static_cast<std::size_t>(j)] = sample_measure(m, rng, n);
        for (std::size_t out = 0; out < problem.outputs.size(); ++out) {
            Eigen::VectorXd vals(n);
            for (int i = 0; i < n; ++i)
                vals(i) = problem.outputs[out].integrand(
                    data.samples[static_cast<std::size_t>(j)].row(i).transpose(), theta);
            data.f[out][static_cast<std::size_t>(j)] = std::move(vals);
        }
    }
    return data;
}

Eigen::VectorXd mc_training_estimates(const CellData& data, int output) {
    const auto& groups = data.f.at(static_cast<std::size_t>(output));
    Eigen::VectorXd means(static_cast<Eigen::Index>(groups.size()));
    for (std::size_t j = 0; j < groups.size(); ++j)
        means(static_cast<Eigen::Index>(j)) = mc_estimate(groups[j]);
    return means;
}

MethodFit fit_cbq(const Problem& problem, const CellData& data, const PipelineOptions& options) {
    const BqBackend& backend = problem.backend(options.backend);
    const Eigen::Index t = data.thetas.rows();
    MethodFit fit;
    std::ostringstream hypers;

    for (std::size_t out = 0; out < problem.outputs.size(); ++out) {
        // Stage-1 hyperparameters are selected on the first parameter point
        // with non-degenerate targets and reused for all T integrals.
        double lx = 1.0, ax = 1.0, cx = 0.0;
        bool selected = false;
        for (Eigen::Index j = 0; j < t && !selected; ++j) {
            const Eigen::VectorXd& raw = data.f[out][static_cast<std::size_t>(j)];
            if (constant_values(raw)) continue;
            const Standardization s = standardize(raw);
            const Eigen::VectorXd theta = data.thetas.row(j).transpose();
            const Eigen::MatrixXd coords = backend.apply_transform(data.samples[static_cast<std::size_t>(j)], theta);
            if (backend.is_stein) {
                const auto r = stein_c_descent(
                    [&](double c, double l, double A) { return backend.make_kernel(l, A, c, theta); }, coords,
                    s.values, options.lambda_x);
                cx = r.constant;
                lx = r.lengthscale;
                ax = r.amplitude;
            } else {
                const auto r = grid_search_stage1(
                    coords, s.values, [&](double l, double A) { return backend.make_kernel(l, A, 0.0, theta); },
                    options.lambda_x, options.grid);
                lx = r.lengthscale;
                ax = r.amplitude;
            }
            selected = true;
        }

        Eigen::VectorXd means(t), vars(t);
        for (Eigen::Index j = 0; j < t; ++j) {
            const Eigen::VectorXd& raw = data.f[out][static_cast<std::size_t>(j)];
            if (constant_values(raw)) {
                // a constant integrand integrates to that constant
                means(j) = raw(0);
                vars(j) = 0.0;
                continue;
            }
            const Standardization s = standardize(raw);
            const Eigen::VectorXd theta = data.thetas.row(j).transpose();
            const Kernel k = backend.make_kernel(lx, ax, cx, theta);
            const EmbeddingPair pair = backend.make_embedding(k, theta);
            const Eigen::MatrixXd coords = backend.apply_transform(data.samples[static_cast<std::size_t>(j)], theta);
            const BqPosterior post = bq_fit(k, pair, coords, s.values, options.lambda_x);
            if (post.jitter_used > 0.0) ++fit.jitter_events;
            means(j) = s.mean + s.stddev * post.mean;
            vars(j) = s.stddev * s.stddev * post.variance;
        }

        if (out > 0) hypers << "|";
        hypers << "lx=" << fmt(lx) << ";Ax=" << fmt(ax);
        if (backend.is_stein) hypers << ";cx=" << fmt(cx);

        if (constant_values(means)) {
            fit.predictors.push_back(constant_predictor(means(0)));
            hypers << ";lt=na";
            continue;
        }

        double lt = 1.0, at = 1.0;
        double lambda_theta = options.lambda_theta.value_or(0.0);
        if (options.lambda_theta) {
            const Standardization s2 = standardize(means);
            const auto r = grid_search_stage2(
                data.thetas, s2.values, Eigen::VectorXd(vars / (s2.stddev * s2.stddev)),
                [&](double l, double A) { return make_theta_kernel(options.theta_kernel, l, A); },
                HyperGrid{options.grid.amplitudes, options.grid.lengthscales, {*options.lambda_theta}});
            lt = r.lengthscale;
            at = r.amplitude;
        } else {
            const Standardization s2 = standardize(means);
            const auto r = grid_search_stage2(
                data.thetas, s2.values, Eigen::VectorXd(vars / (s2.stddev * s2.stddev)),
                [&](double l, double A) { return make_theta_kernel(options.theta_kernel, l, A); }, options.grid);
            lt = r.lengthscale;
            at = r.amplitude;
            lambda_theta = r.lambda_theta;
        }

        auto model = std::make_shared<CbqModel>(
            CbqModel::fit(data.thetas, means, vars, make_theta_kernel(options.theta_kernel, lt, at), lambda_theta));
        if (model->jitter() > 0.0) ++fit.jitter_events;
        fit.predictors.push_back(
            [model](const Eigen::VectorXd& theta_star) { return model->predict(theta_star); });
        hypers << ";lt=" << fmt(lt) << ";At=" << fmt(at) << ";lam=" << fmt(lambda_theta);
    }
    fit.hypers = hypers.str();
    fit.has_posterior = true;
    return fit;
}

MethodFit fit_klsmc(const Problem& problem, const CellData& data, const PipelineOptions& options) {
    MethodFit fit;
    std::ostringstream hypers;
    for (std::size_t out = 0; out < problem.outputs.size(); ++out) {
        const Eigen::VectorXd means = mc_training_estimates(data, static_cast<int>(out));
        if (out > 0) hypers << "|";
        if (constant_values(means)) {
            fit.predictors.push_back(constant_predictor(means(0)));
            hypers << "lt=na";
            continue;
        }
        const SplitData split = tail_split(data.thetas, means, options.validation_fraction);
        double best_rmse = std::numeric_limits<double>::infinity();
        double lt = 1.0, at = 1.0, lam = options.grid.lambdas_theta.front();
        for (double l : options.grid.lengthscales)
            for (double A : options.grid.amplitudes)
                for (double cand_lam : options.grid.lambdas_theta) {
                    if (options.lambda_theta && cand_lam != *options.lambda_theta) continue;
                    try {
                        const CbqModel m = klsmc_fit(split.train_thetas, split.train_targets,
                                                     make_theta_kernel(options.theta_kernel, l, A), cand_lam);
                        const double r = validation_rmse(
                            [&m](const Eigen::VectorXd& th) { return m.predict(th).first; }, split.valid_thetas,
                            split.valid_targets);
                        if (std::isfinite(r) && r < best_rmse) {
                            best_rmse = r;
                            lt = l;
                            at = A;
                            lam = cand_lam;
                        }
                    } catch (const std::exception&) {
                    }
                }
        auto model = std::make_shared<CbqModel>(
            klsmc_fit(data.thetas, means, make_theta_kernel(options.theta_kernel, lt, at), lam));
        if (model->jitter() > 0.0) ++fit.jitter_events;
        fit.predictors.push_back([model](const Eigen::VectorXd& theta_star) {
            return std::make_pair(model->predict(theta_star).first, 0.0);
        });
        hypers << "lt=" << fmt(lt) << ";At=" << fmt(at) << ";lam=" << fmt(lam);
    }
    fit.hypers = hypers.str();
    return fit;
}

MethodFit fit_lsmc(const Problem& problem, const CellData& data, const PipelineOptions& options) {
    MethodFit fit;
    std::ostringstream hypers;
    std::vector<double> ridge_grid{0.0};
    ridge_grid.insert(ridge_grid.end(), options.grid.lambdas_theta.begin(), options.grid.lambdas_theta.end());
    for (std::size_t out = 0; out < problem.outputs.size(); ++out) {
        const Eigen::VectorXd means = mc_training_estimates(data, static_cast<int>(out));
        if (out > 0) hypers << "|";
        if (constant_values(means)) {
            fit.predictors.push_back(constant_predictor(means(0)));
            hypers << "p=na";
            continue;
        }
        const SplitData split = tail_split(data.thetas, means, options.validation_fraction);
        double best_rmse = std::numeric_limits<double>::infinity();
        int best_p = 1;
        double best_lam = ridge_grid.front();
        for (int p = 1; p <= 4; ++p)
            for (double lam : ridge_grid) {
                try {
                    const PolynomialModel m = lsmc_fit(split.train_thetas, split.train_targets, p, lam);
                    const double r =
                        validation_rmse([&m](const Eigen::VectorXd& th) { return m.predict(th); },
                                        split.valid_thetas, split.valid_targets);
                    if (std::isfinite(r) && r < best_rmse) {
                        best_rmse = r;
                        best_p = p;
                        best_lam = lam;
                    }
                } catch (const std::exception&) {
                    // orders the training split cannot support are skipped
                }
            }
        auto model = std::make_shared<PolynomialModel>(lsmc_fit(data.thetas, means, best_p, best_lam));
        fit.predictors.push_back([model](const Eigen::VectorXd& theta_star) {
            return std::make_pair(model->predict(theta_star), 0.0);
        });
        hypers << "p=" << best_p << ";lam=" << fmt(best_lam);
    }
    fit.hypers = hypers.str();
    return fit;
}

MethodFit fit_is(const Problem& problem, const CellData& data, const PipelineOptions&) {
    if (problem.theta_dependent_integrand)
        throw std::invalid_argument("importance sampling needs an integrand that depends on x only; problem '" +
                                    problem.id + "' has a theta-dependent integrand");
    if (!problem.log_density)
        throw std::invalid_argument("importance sampling needs conditional densities for problem '" + problem.id +
                                    "'");
    MethodFit fit;
    for (std::size_t out = 0; out < problem.outputs.size(); ++out) {
        auto dataset = std::make_shared<IsDataset>();
        dataset->thetas = data.thetas;
        dataset->samples = data.samples;
        dataset->f_vals = data.f[out];
        auto density = problem.log_density;
        fit.predictors.push_back([dataset, density](const Eigen::VectorXd& theta_star) {
            return std::make_pair(is_estimate(*dataset, density, theta_star, IsNormalization::PerSample), 0.0);
        });
    }
    fit.hypers = "none";
    return fit;
}

MethodFit fit_mobq(const Problem& problem, const CellData& data, const PipelineOptions& options) {
    const BqBackend& backend = problem.backend(options.backend);
    if (backend.is_stein)
        throw std::invalid_argument("mobq: Stein backends are not supported (hyperparameter selection would "
                                    "need a dense solve per descent step)");
    if (backend.transform && !problem.theta_dependent_integrand)
        throw std::invalid_argument("mobq: backend '" + backend.name + "' does not embed raw samples");
    const bool xtheta = problem.theta_dependent_integrand;
    const BqBackend& emb_backend = xtheta ? problem.backend("rbf") : backend;

    MethodFit fit;
    std::ostringstream hypers;
    MobqOptions mobq_options;
    mobq_options.lambda_x = options.lambda_x;
    mobq_options.max_points = options.mobq_max_points;

    for (std::size_t out = 0; out < problem.outputs.size(); ++out) {
        Eigen::Index total = 0;
        for (const auto& s : data.samples) total += s.rows();
        Eigen::VectorXd all_f(total);
        Eigen::Index at = 0;
        for (const auto& v : data.f[out]) {
            all_f.segment(at, v.size()) = v;
            at += v.size();
        }
        if (out > 0) hypers << "|";
        if (constant_values(all_f)) {
            fit.predictors.push_back(constant_predictor(all_f(0)));
            hypers << "lx=na";
            continue;
        }
        const Standardization s = standardize(all_f);
        std::vector<Eigen::VectorXd> f_std(data.f[out].size());
        at = 0;
        for (std::size_t j = 0; j < f_std.size(); ++j) {
            f_std[j] = s.values.segment(at, data.f[out][j].size());
            at += data.f[out][j].size();
        }

        // empirical Bayes on the concatenated system, one grid per kernel
        Eigen::MatrixXd all_x(total, data.samples.front().cols());
        at = 0;
        for (const auto& smp : data.samples) {
            all_x.middleRows(at, smp.rows()) = smp;
            at += smp.rows();
        }
        double lx = 1.0, ax = 1.0;
        {
            const auto r = grid_search_stage1(
                all_x, s.values,
                [&](double l, double A) { return emb_backend.make_kernel(l, A, 0.0, data.thetas.row(0).transpose()); },
                options.lambda_x, options.grid);
            lx = r.lengthscale;
            ax = r.amplitude;
        }
        const Kernel k_x = emb_backend.make_kernel(lx, ax, 0.0, data.thetas.row(0).transpose());

        std::shared_ptr<MobqModel> model;
        double lt = 1.0, at_amp = 1.0;
        if (xtheta) {
            // select k_theta on the pooled system with k_x fixed
            Eigen::MatrixXd theta_rep(total, data.thetas.cols());
            Eigen::Index row = 0;
            for (Eigen::Index j = 0; j < data.thetas.rows(); ++j)
                for (Eigen::Index i = 0; i < data.samples[static_cast<std::size_t>(j)].rows(); ++i)
                    theta_rep.row(row++) = data.thetas.row(j);
            const Eigen::MatrixXd kx_gram = k_x.gram(all_x, all_x);
            double best = -std::numeric_limits<double>::infinity();
            for (double l : options.grid.lengthscales)
                for (double A : options.grid.amplitudes) {
                    const Kernel kt = make_theta_kernel(options.theta_kernel, l, A);
                    try {
                        const Eigen::MatrixXd K = kx_gram.cwiseProduct(kt.gram(theta_rep, theta_rep));
                        PsdSolver solver(K, options.lambda_x);
                        const double n = static_cast<double>(K.rows());
                        const double val = -0.5 * solver.log_det() - 0.5 * n * std::log(2.0 * M_PI) -
                                           0.5 * s.values.dot(solver.solve(s.values));
                        if (std::isfinite(val) && val > best) {
                            best = val;
                            lt = l;
                            at_amp = A;
                        }
                    } catch (const std::exception&) {
                    }
                }
            model = std::make_shared<MobqModel>(MobqModel::fit_xtheta(
                data.samples, f_std, k_x, make_theta_kernel(options.theta_kernel, lt, at_amp), data.thetas,
                mobq_options));
        } else {
            model = std::make_shared<MobqModel>(MobqModel::fit(data.samples, f_std, k_x, mobq_options));
        }
        if (model->jitter() > 0.0) ++fit.jitter_events;

        auto embed = emb_backend.make_embedding;
        const double shift = s.mean, scale = s.stddev;
        fit.predictors.push_back([model, embed, k_x, shift, scale, xtheta](const Eigen::VectorXd& theta_star) {
            const EmbeddingPair pair = embed(k_x, theta_star);
            const double v = xtheta ? model->predict(pair, theta_star) : model->predict(pair);
            return std::make_pair(shift + scale * v, 0.0);
        });
        hypers << "lx=" << fmt(lx) << ";Ax=" << fmt(ax);
        if (xtheta) hypers << ";lt=" << fmt(lt) << ";At=" << fmt(at_amp);
    }
    fit.hypers = hypers.str();
    return fit;
}

MethodFit fit_method(const std::string& method, const Problem& problem, const CellData& data,
                     const PipelineOptions& options) {
    if (method == "cbq") return fit_cbq(problem, data, options);
    if (method == "klsmc") return fit_klsmc(problem, data, options);
    if (method == "lsmc") return fit_lsmc(problem, data, options);
    if (method == "is") return fit_is(problem, data, options);
    if (method == "mobq") return fit_mobq(problem, data, options);
    throw std::invalid_argument("unknown method '" + method + "'");
}

}  // namespace cbq
