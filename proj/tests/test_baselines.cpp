#include <doctest.h>

#include <cmath>

#include "cbq/baselines.hpp"
#include "cbq/pipelines.hpp"
#include "cbq/problems.hpp"
#include "cbq/stats.hpp"

using namespace cbq;

namespace {

Eigen::VectorXd vec1(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

IsDataset make_is_dataset(const Problem& problem, int n, int t, std::uint64_t seed) {
    Rng rng(seed);
    const CellData data = draw_cell_data(problem, n, t, rng);
    IsDataset ds;
    ds.thetas = data.thetas;
    ds.samples = data.samples;
    ds.f_vals = data.f[0];
    return ds;
}

}  // namespace

TEST_CASE("monte carlo mean") {
    CHECK(mc_estimate(Eigen::VectorXd::Ones(3)) == 1.0);
    Eigen::VectorXd v(2);
    v << 0.0, 2.0;
    CHECK(mc_estimate(v) == 1.0);
    CHECK_THROWS_AS(mc_estimate(Eigen::VectorXd(0)), std::invalid_argument);

    Rng rng(2);
    const Eigen::MatrixXd draws = sample_measure(Measure::gaussian(0.0, 1.0), rng, 100000);
    std::vector<double> sq(static_cast<std::size_t>(draws.rows()));
    for (Eigen::Index i = 0; i < draws.rows(); ++i) sq[static_cast<std::size_t>(i)] = draws(i, 0) * draws(i, 0);
    const auto [mean, se] = mean_and_se(sq);
    CHECK(std::abs(mc_estimate(draws.array().square().matrix().col(0)) - 1.0) <= 3.0 * se);
    CHECK(mean == doctest::Approx(mc_estimate(draws.array().square().matrix().col(0))));
}

TEST_CASE("importance sampling: weight identities") {
    // identical proposal and target thetas make all weights one
    auto log_density = [](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        return Measure::gaussian(theta(0), 1.0).log_density(x);
    };
    IsDataset ds;
    const int t = 3, n = 4;
    ds.thetas = Eigen::MatrixXd::Constant(t, 1, 0.7);
    double total = 0.0;
    Rng rng(4);
    for (int j = 0; j < t; ++j) {
        Eigen::MatrixXd x(n, 1);
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = rng.normal();
            f(i) = std::sin(x(i, 0));
            total += f(i);
        }
        ds.samples.push_back(x);
        ds.f_vals.push_back(f);
    }
    const double verbatim = is_estimate(ds, log_density, vec1(0.7), IsNormalization::Verbatim);
    CHECK(verbatim == doctest::Approx(total / t).epsilon(1e-12));

    // constant integrand with self-weights: the verbatim form returns kappa*N,
    // the per-sample normalization returns kappa
    for (auto& f : ds.f_vals) f.setConstant(2.5);
    CHECK(is_estimate(ds, log_density, vec1(0.7), IsNormalization::Verbatim) ==
          doctest::Approx(2.5 * n).epsilon(1e-12));
    CHECK(is_estimate(ds, log_density, vec1(0.7), IsNormalization::PerSample) ==
          doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("importance sampling with one group equals N times the MC mean") {
    auto log_density = [](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        return Measure::gaussian(theta(0), 1.0).log_density(x);
    };
    IsDataset ds;
    ds.thetas = Eigen::MatrixXd::Constant(1, 1, 1.3);
    Rng rng(9);
    Eigen::MatrixXd x(6, 1);
    Eigen::VectorXd f(6);
    for (int i = 0; i < 6; ++i) {
        x(i, 0) = 1.3 + rng.normal();
        f(i) = x(i, 0) * x(i, 0);
    }
    ds.samples.push_back(x);
    ds.f_vals.push_back(f);
    const double verbatim = is_estimate(ds, log_density, vec1(1.3), IsNormalization::Verbatim);
    CHECK(verbatim == doctest::Approx(6.0 * mc_estimate(f)).epsilon(1e-12));
}

TEST_CASE("importance sampling is reproducible bit for bit under a fixed seed") {
    const Problem problem = linear_bayes_problem(1, 1.0, make_linear_bayes_data(1, 99));
    const IsDataset ds = make_is_dataset(problem, 50, 50, 1234);
    const double a = is_estimate(ds, problem.log_density, vec1(2.0), IsNormalization::PerSample);
    const double b = is_estimate(make_is_dataset(problem, 50, 50, 1234), problem.log_density, vec1(2.0),
                                 IsNormalization::PerSample);
    CHECK(a == b);
    CHECK(std::isfinite(a));
}

TEST_CASE("polynomial regression: exact recovery and anchors") {
    Rng rng(12);
    Eigen::MatrixXd thetas(25, 2);
    Eigen::VectorXd y(25);
    for (int i = 0; i < 25; ++i) {
        thetas.row(i) = rng.normal_vector(2).transpose();
        const double a = thetas(i, 0), b = thetas(i, 1);
        y(i) = 1.5 - 0.7 * a + 0.2 * b + 0.9 * a * a - 1.1 * a * b + 0.4 * b * b;
    }
    const PolynomialModel quad = lsmc_fit(thetas, y, 2, 0.0);
    for (int q = 0; q < 5; ++q) {
        const Eigen::VectorXd p = rng.normal_vector(2);
        const double truth =
            1.5 - 0.7 * p(0) + 0.2 * p(1) + 0.9 * p(0) * p(0) - 1.1 * p(0) * p(1) + 0.4 * p(1) * p(1);
        CHECK(quad.predict(p) == doctest::Approx(truth).epsilon(1e-8));
    }

    // constant data, order 1: zero slope, intercept equal to the mean
    Eigen::MatrixXd t1(5, 1);
    t1 << 0.0, 1.0, 2.0, 3.0, 4.0;
    const PolynomialModel flat = lsmc_fit(t1, Eigen::VectorXd::Constant(5, 3.25), 1, 0.0);
    CHECK(flat.predict(vec1(-10.0)) == doctest::Approx(3.25).epsilon(1e-10));
    CHECK(flat.predict(vec1(10.0)) == doctest::Approx(3.25).epsilon(1e-10));

    CHECK_THROWS_AS(lsmc_fit(t1, Eigen::VectorXd::Constant(5, 1.0), 0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lsmc_fit(t1, Eigen::VectorXd::Constant(5, 1.0), 5, 0.0), std::invalid_argument);
    // 5 points cannot identify the 15 coefficients of a quartic in 2 variables
    Eigen::MatrixXd t2(5, 2);
    t2.setRandom();
    CHECK_THROWS_AS(lsmc_fit(t2, Eigen::VectorXd::Constant(5, 1.0), 4, 0.0), std::invalid_argument);
}

TEST_CASE("polynomial regression matches a plain normal-equations solve") {
    Rng rng(14);
    const Problem problem = linear_bayes_problem(2, 1.0, make_linear_bayes_data(2, 7));
    Eigen::MatrixXd thetas(40, 2);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) {
        const Eigen::VectorXd theta = problem.sample_theta(rng);
        thetas.row(i) = theta.transpose();
        y(i) = problem.outputs[0].exact_truth(theta) + 0.05 * rng.normal();
    }
    const PolynomialModel model = lsmc_fit(thetas, y, 2, 0.0);

    // independent path: raw monomials, plain normal equations, no scaling
    Eigen::MatrixXd Phi(40, 6);
    for (int i = 0; i < 40; ++i) {
        const double a = thetas(i, 0), b = thetas(i, 1);
        Phi.row(i) << 1.0, b, b * b, a, a * b, a * a;
    }
    const Eigen::VectorXd beta = (Phi.transpose() * Phi).ldlt().solve(Phi.transpose() * y);
    for (int q = 0; q < 8; ++q) {
        const Eigen::VectorXd p = problem.sample_theta(rng);
        Eigen::VectorXd row(6);
        row << 1.0, p(1), p(1) * p(1), p(0), p(0) * p(1), p(0) * p(0);
        CHECK(model.predict(p) == doctest::Approx(row.dot(beta)).epsilon(1e-8));
    }
}

TEST_CASE("polynomial fit is invariant to affine reparameterization at zero ridge") {
    Rng rng(15);
    Eigen::MatrixXd thetas(30, 1);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) {
        thetas(i, 0) = rng.uniform(1.0, 3.0);
        y(i) = std::sin(2.0 * thetas(i, 0));
    }
    const PolynomialModel direct = lsmc_fit(thetas, y, 3, 0.0);
    const Eigen::MatrixXd shifted = 2.0 * thetas.array() - 5.0;
    const PolynomialModel re = lsmc_fit(shifted, y, 3, 0.0);
    for (double q : {1.2, 1.9, 2.6}) {
        CHECK(direct.predict(vec1(q)) == doctest::Approx(re.predict(vec1(2.0 * q - 5.0))).epsilon(1e-8));
    }
}

TEST_CASE("kernel ridge coincides with the stage-2 model at zero variances") {
    Rng rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        const int t = 6 + trial;
        Eigen::MatrixXd thetas(t, 1);
        Eigen::VectorXd y(t);
        for (int i = 0; i < t; ++i) {
            thetas(i, 0) = rng.uniform(0.0, 3.0);
            y(i) = std::sin(thetas(i, 0)) + 0.1 * rng.normal();
        }
        const Kernel k = Kernel::matern32(0.8, 1.2);
        const double lambda = 0.05 * (trial + 1);
        const CbqModel ridge = klsmc_fit(thetas, y, k, lambda);
        const CbqModel stage2 = CbqModel::fit(thetas, y, Eigen::VectorXd::Zero(t), k, lambda);
        for (double q : {0.4, 1.5, 2.8}) {
            CHECK(klsmc_predict(ridge, vec1(q)) == doctest::Approx(stage2.predict(vec1(q)).first).epsilon(1e-10));
        }
    }
}

TEST_CASE("kernel ridge reverts to the target mean for huge regularizers") {
    Eigen::MatrixXd thetas(6, 1);
    thetas << 0.0, 0.5, 1.0, 1.5, 2.0, 2.5;
    Eigen::VectorXd y(6);
    y << 3.0, 4.0, 5.0, 4.5, 3.5, 4.2;
    const CbqModel model = klsmc_fit(thetas, y, Kernel::matern32(1.0, 1.0), 1e9);
    CHECK(klsmc_predict(model, vec1(1.2)) == doctest::Approx(y.mean()).epsilon(1e-6));
}

TEST_CASE("kernel ridge beats a linear polynomial on sin targets") {
    Rng rng(17);
    const int t = 40;
    Eigen::MatrixXd thetas(t, 1);
    Eigen::VectorXd y(t);
    for (int i = 0; i < t; ++i) {
        thetas(i, 0) = rng.uniform(0.0, 6.0);
        y(i) = std::sin(thetas(i, 0));
    }
    const CbqModel kr = klsmc_fit(thetas, y, Kernel::matern32(1.0, 1.0), 0.01);
    const PolynomialModel lin = lsmc_fit(thetas, y, 1, 0.0);
    double err_kr = 0.0, err_lin = 0.0;
    for (int q = 0; q < 50; ++q) {
        const double p = rng.uniform(0.0, 6.0);
        err_kr += std::pow(klsmc_predict(kr, vec1(p)) - std::sin(p), 2);
        err_lin += std::pow(lin.predict(vec1(p)) - std::sin(p), 2);
    }
    CHECK(err_kr < err_lin);
}

TEST_CASE("multi-output BQ with one group equals plain BQ") {
    const Kernel k = Kernel::gaussian_rbf(1.0, 1.0);
    const Measure m = Measure::gaussian(0.3, 1.5);
    const EmbeddingPair pair = EmbeddingPair::make(k, m);
    Rng rng(19);
    const Eigen::MatrixXd x = sample_measure(m, rng, 25);
    Eigen::VectorXd f(25);
    for (int i = 0; i < 25; ++i) f(i) = std::tanh(x(i, 0));
    const double bq = bq_fit(k, pair, x, f, 0.0).mean;
    const double mo = mobq_estimate({x}, {f}, k, pair);
    CHECK(mo == doctest::Approx(bq).epsilon(1e-10));

    // zero integrand values give a zero estimate
    CHECK(mobq_estimate({x}, {Eigen::VectorXd::Zero(25)}, k, pair) == 0.0);
}

TEST_CASE("multi-output BQ rejects oversized systems") {
    const Kernel k = Kernel::gaussian_rbf(1.0, 1.0);
    const Measure m = Measure::gaussian(0.0, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k, m);
    Rng rng(20);
    const Eigen::MatrixXd x = sample_measure(m, rng, 40);
    MobqOptions options;
    options.max_points = 30;
    CHECK_THROWS_AS(mobq_estimate({x}, {Eigen::VectorXd::Zero(40)}, k, pair, options), std::invalid_argument);
}

TEST_CASE("the (x,theta) product form reduces to the x-only form for flat theta kernels") {
    const Kernel k_x = Kernel::gaussian_rbf(1.0, 1.0);
    Rng rng(21);
    std::vector<Eigen::MatrixXd> xs;
    std::vector<Eigen::VectorXd> fs;
    Eigen::MatrixXd thetas(3, 1);
    const Measure m = Measure::gaussian(0.0, 1.0);
    for (int t = 0; t < 3; ++t) {
        thetas(t, 0) = rng.uniform(0.0, 1.0);
        xs.push_back(sample_measure(m, rng, 8));
        Eigen::VectorXd f(8);
        for (int i = 0; i < 8; ++i) f(i) = std::sin(xs.back()(i, 0));
        fs.push_back(f);
    }
    const EmbeddingPair pair = EmbeddingPair::make(k_x, m);
    const MobqModel x_only = MobqModel::fit(xs, fs, k_x);
    // a Matern over theta with an enormous lengthscale is numerically the
    // constant 1, so the product kernel collapses to k_x
    const MobqModel product = MobqModel::fit_xtheta(xs, fs, k_x, Kernel::matern32(1e9, 1.0), thetas);
    const double a = x_only.predict(pair);
    const double b = product.predict(pair, vec1(0.5));
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
}
