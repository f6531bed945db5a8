#include <doctest.h>

#include <cmath>

#include "cbq/kernels.hpp"
#include "cbq/measures.hpp"
#include "cbq/rng.hpp"
#include "cbq/stats.hpp"

using namespace cbq;

namespace {

Eigen::VectorXd vec1(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

// Langevin-Stein value assembled purely from finite differences of the base
// kernel, independent of the analytic derivatives inside stein_eval.
double stein_by_finite_differences(const Kernel& base, const ScoreFn& score, double c, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y, double h = 1e-4) {
    const int d = static_cast<int>(x.size());
    const Eigen::VectorXd sx = score(x), sy = score(y);
    double value = sx.dot(sy) * base(x, y) + c;
    for (int i = 0; i < d; ++i) {
        Eigen::VectorXd yp = y, ym = y;
        yp(i) += h;
        ym(i) -= h;
        value += sx(i) * (base(x, yp) - base(x, ym)) / (2.0 * h);
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        value += sy(i) * (base(xp, y) - base(xm, y)) / (2.0 * h);
        value += (base(xp, yp) - base(xp, ym) - base(xm, yp) + base(xm, ym)) / (4.0 * h * h);
    }
    return value;
}

}  // namespace

TEST_CASE("kernel evaluation matches the closed forms") {
    const Kernel rbf1 = Kernel::gaussian_rbf(1.0, 1.0);
    Eigen::VectorXd z2 = Eigen::VectorXd::Zero(2);
    CHECK(rbf1(z2, z2) == doctest::Approx(1.0).epsilon(1e-14));

    const Kernel rbf2 = Kernel::gaussian_rbf(1.0, 2.0);
    CHECK(rbf2(vec1(0.0), vec1(1.0)) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-12));

    const Kernel m32 = Kernel::matern32(1.0, 1.0);
    const double s3 = std::sqrt(3.0);
    CHECK(m32(vec1(0.0), vec1(1.0)) == doctest::Approx((1.0 + s3) * std::exp(-s3)).epsilon(1e-12));

    const Kernel lg = Kernel::log_gaussian(1.0, 1.0);
    CHECK(lg(vec1(1.0), vec1(1.0)) == doctest::Approx(1.0));
    CHECK(lg(vec1(1.0), vec1(std::exp(1.0))) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("gram matrices compose evaluations and stay symmetric") {
    const Kernel rbf = Kernel::gaussian_rbf(1.0, 1.0);
    Eigen::MatrixXd single(1, 1);
    single << 0.7;
    const Eigen::MatrixXd g1 = rbf.gram(single, single);
    CHECK(g1.rows() == 1);
    CHECK(g1(0, 0) == doctest::Approx(1.0));

    Eigen::MatrixXd X(2, 1);
    X << 0.0, 1.0;
    const Eigen::MatrixXd g2 = rbf.gram(X, X);
    CHECK(g2(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(g2(1, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(g2(0, 0) == doctest::Approx(1.0));

    Rng rng(42);
    Eigen::MatrixXd P(10, 2);
    for (int i = 0; i < 10; ++i) {
        P(i, 0) = rng.uniform();
        P(i, 1) = rng.uniform();
    }
    const Eigen::MatrixXd g3 = Kernel::matern32(0.5, 2.0).gram(P, P);
    CHECK((g3 - g3.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetry and positive semidefiniteness on random inputs") {
    Rng rng(7);
    const Measure std_normal = Measure::gaussian(0.0, 1.0);
    std::vector<Kernel> kernels{
        Kernel::gaussian_rbf(0.7, 3.0), Kernel::matern32(1.3, 2.0),
        Kernel::matern32(0.9, 1.5, Kernel::Metric::TensorProduct), Kernel::log_gaussian(1.1, 2.5),
        Kernel::stein(Kernel::matern32(1.0, 2.0), score_of(std_normal), 0.4)};
    for (const auto& k : kernels) {
        const bool positive_only = k.family() == Kernel::Family::LogGaussian;
        for (int trial = 0; trial < 30; ++trial) {
            Eigen::VectorXd x = vec1(positive_only ? std::exp(rng.normal()) : 2.0 * rng.normal());
            Eigen::VectorXd y = vec1(positive_only ? std::exp(rng.normal()) : 2.0 * rng.normal());
            CHECK(std::abs(k(x, y) - k(y, x)) <= 1e-12 * k.amplitude());
        }
        Eigen::MatrixXd X(25, 1);
        for (int i = 0; i < 25; ++i) X(i, 0) = positive_only ? std::exp(rng.normal()) : rng.normal();
        const Eigen::MatrixXd G = k.gram(X, X);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8 * k.amplitude());
    }
}

TEST_CASE("stein evaluation: closed-form special cases") {
    // zero score leaves only the cross-derivative term, A / l^2 for the RBF
    ScoreFn zero;
    zero.dim = 1;
    zero.source = "zero";
    zero.eval = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Zero(x.size()); };
    const double v = stein_eval(Kernel::gaussian_rbf(0.5, 2.0), zero, 0.0, vec1(0.0), vec1(0.0));
    CHECK(v == doctest::Approx(2.0 / 0.25).epsilon(1e-12));

    // Matern-3/2 cross-derivative limit at coincident points is 3 A / l^2
    const ScoreFn normal_score = score_of(Measure::gaussian(0.0, 1.0));
    const double w = stein_eval(Kernel::matern32(1.0, 1.0), normal_score, 5.0, vec1(0.0), vec1(0.0));
    CHECK(w == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("stein evaluation is exactly symmetric and matches finite differences") {
    Rng rng(11);
    const ScoreFn score = score_of(Measure::gaussian(0.4, 2.0));
    for (const auto& base : {Kernel::gaussian_rbf(0.8, 1.7), Kernel::matern32(1.1, 0.9),
                             Kernel::matern32(0.7, 1.3, Kernel::Metric::TensorProduct)}) {
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::VectorXd x = vec1(2.0 * rng.normal());
            Eigen::VectorXd y = vec1(2.0 * rng.normal());
            if (std::abs(x(0) - y(0)) < 0.02) y(0) += 0.05;
            const double a = stein_eval(base, score, 1.3, x, y);
            const double b = stein_eval(base, score, 1.3, y, x);
            CHECK(std::abs(a - b) <= 1e-12);
            const double fd = stein_by_finite_differences(base, score, 1.3, x, y);
            CHECK(a == doctest::Approx(fd).epsilon(1e-4));
        }
    }
    // multivariate check against finite differences
    const ScoreFn score2 = score_of(Measure::gaussian(Eigen::VectorXd::Zero(2),
                                                      (Eigen::MatrixXd(2, 2) << 1.0, 0.3, 0.3, 0.8).finished()));
    for (const auto& base :
         {Kernel::gaussian_rbf(0.9, 1.2), Kernel::matern32(1.2, 2.0, Kernel::Metric::TensorProduct)}) {
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::VectorXd x = rng.normal_vector(2);
            Eigen::VectorXd y = rng.normal_vector(2);
            for (int i = 0; i < 2; ++i)
                if (std::abs(x(i) - y(i)) < 0.02) y(i) += 0.05;
            const double a = stein_eval(base, score2, 0.0, x, y);
            CHECK(a == doctest::Approx(stein_by_finite_differences(base, score2, 0.0, x, y)).epsilon(1e-4));
        }
    }
}

TEST_CASE("stein kernel has zero mean under its measure") {
    const Measure normal = Measure::gaussian(0.0, 1.0);
    const Kernel k = Kernel::stein(Kernel::matern32(1.0, 1.0), score_of(normal), 0.0);
    Rng rng(123);
    const Eigen::MatrixXd draws = sample_measure(normal, rng, 100000);
    for (double yv : {-1.5, -0.3, 0.0, 0.8, 2.1}) {
        const Eigen::VectorXd y = vec1(yv);
        std::vector<double> vals(static_cast<std::size_t>(draws.rows()));
        for (Eigen::Index i = 0; i < draws.rows(); ++i)
            vals[static_cast<std::size_t>(i)] = k(draws.row(i).transpose(), y);
        const auto [mean, se] = mean_and_se(vals);
        CHECK(std::abs(mean) <= 3.0 * se);
    }
}

TEST_CASE("score functions match finite differences of the log-density") {
    const std::vector<std::pair<Measure, double>> cases{
        {Measure::gaussian(0.5, 2.0), 0.7},
        {Measure::lognormal(0.2, 0.8), 1.4},
        {Measure::gamma(3.0, 10.0), 0.5},
    };
    for (const auto& [measure, point] : cases) {
        const ScoreFn s = score_of(measure);
        const double h = 1e-6 * (1.0 + std::abs(point));
        const double fd =
            (measure.log_density(vec1(point + h)) - measure.log_density(vec1(point - h))) / (2.0 * h);
        CHECK(s(vec1(point))(0) == doctest::Approx(fd).epsilon(1e-5));
    }
    const Measure g2 = Measure::gaussian(Eigen::VectorXd::Ones(2),
                                         (Eigen::MatrixXd(2, 2) << 2.0, 0.6, 0.6, 1.0).finished());
    const ScoreFn s2 = score_of(g2);
    const Eigen::VectorXd p = (Eigen::VectorXd(2) << 0.3, -0.4).finished();
    for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd pp = p, pm = p;
        pp(i) += 1e-6;
        pm(i) -= 1e-6;
        const double fd = (g2.log_density(pp) - g2.log_density(pm)) / 2e-6;
        CHECK(s2(p)(i) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("kernel construction rejects invalid specs") {
    CHECK_THROWS_AS(Kernel::gaussian_rbf(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::gaussian_rbf(1.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::matern32(std::numeric_limits<double>::quiet_NaN(), 1.0), std::invalid_argument);

    const ScoreFn s = score_of(Measure::gaussian(0.0, 1.0));
    const Kernel stein = Kernel::stein(Kernel::matern32(1.0, 1.0), s, 0.0);
    CHECK_THROWS_AS(Kernel::stein(stein, s, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::stein(Kernel::log_gaussian(1.0, 1.0), s, 0.0), std::invalid_argument);

    const Kernel rbf = Kernel::gaussian_rbf(1.0, 1.0);
    CHECK_THROWS_AS(rbf(vec1(0.0), Eigen::VectorXd::Zero(2)), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::log_gaussian(1.0, 1.0)(vec1(-1.0), vec1(1.0)), std::invalid_argument);
}
