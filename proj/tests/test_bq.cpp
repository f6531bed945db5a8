#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cbq/bq.hpp"
#include "cbq/linalg.hpp"
#include "cbq/measures.hpp"
#include "cbq/stats.hpp"

using namespace cbq;

namespace {

Eigen::MatrixXd column(const Eigen::VectorXd& v) {
    Eigen::MatrixXd m(v.size(), 1);
    m.col(0) = v;
    return m;
}

}  // namespace

TEST_CASE("regularized cholesky solve") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd b(3);
    b << 1.0, -2.0, 0.5;
    CHECK((regularized_cholesky_solve(id, 0.0, b) - b).cwiseAbs().maxCoeff() <= 1e-14);

    Eigen::MatrixXd k2 = 2.0 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd b2(2);
    b2 << 4.0, 4.0;
    const Eigen::MatrixXd x2 = regularized_cholesky_solve(k2, 2.0, b2);
    CHECK(x2(0, 0) == doctest::Approx(1.0));
    CHECK(x2(1, 0) == doctest::Approx(1.0));

    Rng rng(3);
    Eigen::MatrixXd a(20, 20);
    for (int i = 0; i < 20; ++i) a.row(i) = rng.normal_vector(20).transpose();
    const Eigen::MatrixXd spd = a * a.transpose() + Eigen::MatrixXd::Identity(20, 20);
    Eigen::VectorXd rhs = rng.normal_vector(20);
    const double reg = 0.3;
    const Eigen::MatrixXd sol = regularized_cholesky_solve(spd, reg, rhs);
    const Eigen::VectorXd residual = (spd + reg * Eigen::MatrixXd::Identity(20, 20)) * sol - rhs;
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8 * rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("jitter escalates on singular matrices and is reported") {
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
    double jitter = -1.0;
    const Eigen::MatrixXd sol = regularized_cholesky_solve(ones, 0.0, Eigen::MatrixXd::Identity(4, 4), &jitter);
    CHECK(jitter > 0.0);
    CHECK(sol.allFinite());

    // a matrix that is negative definite cannot be rescued by the ladder
    const Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(PsdSolver(bad, 0.0), std::runtime_error);
}

TEST_CASE("solver log-determinant matches the dense computation") {
    Rng rng(5);
    Eigen::MatrixXd a(8, 8);
    for (int i = 0; i < 8; ++i) a.row(i) = rng.normal_vector(8).transpose();
    const Eigen::MatrixXd spd = a * a.transpose() + 2.0 * Eigen::MatrixXd::Identity(8, 8);
    PsdSolver solver(spd, 0.5);
    const Eigen::MatrixXd reg = spd + 0.5 * Eigen::MatrixXd::Identity(8, 8);
    CHECK(solver.log_det() == doctest::Approx(std::log(reg.determinant())).epsilon(1e-10));
}

TEST_CASE("single-sample posterior reduces to scalar arithmetic") {
    const Kernel k = Kernel::gaussian_rbf(1.0, 2.0);
    const Measure m = Measure::gaussian(0.0, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k, m);
    Eigen::MatrixXd x(1, 1);
    x << 0.4;
    Eigen::VectorXd f(1);
    f << 1.7;
    const BqPosterior post = bq_fit(k, pair, x, f, 0.0);
    const double mu = pair.kme(x.row(0).transpose());
    const double kxx = k(x.row(0).transpose(), x.row(0).transpose());
    CHECK(post.mean == doctest::Approx(mu * f(0) / kxx).epsilon(1e-12));
    CHECK(post.variance == doctest::Approx(pair.initial_error() - mu * mu / kxx).epsilon(1e-12));
}

TEST_CASE("posterior mean is linear in the observations and variance ignores them") {
    const Kernel k = Kernel::gaussian_rbf(0.8, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k, Measure::gaussian(0.0, 1.0));
    Rng rng(8);
    const Eigen::MatrixXd x = column(rng.normal_vector(12));
    const BqPosterior zero = bq_fit(k, pair, x, Eigen::VectorXd::Zero(12), 0.0);
    CHECK(zero.mean == 0.0);
    const BqPosterior other = bq_fit(k, pair, x, rng.normal_vector(12), 0.0);
    CHECK(zero.variance == other.variance);
}

TEST_CASE("x^2 integrand under the standard normal converges to 1") {
    const Kernel k = Kernel::gaussian_rbf(1.0, 1.0);
    const Measure m = Measure::gaussian(0.0, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k, m);
    Rng rng(101);
    const Eigen::MatrixXd x = sample_measure(m, rng, 200);
    Eigen::VectorXd f(200);
    for (int i = 0; i < 200; ++i) f(i) = x(i, 0) * x(i, 0);
    const BqPosterior post = bq_fit(k, pair, x, f, 0.0);
    CHECK(std::abs(post.mean - 1.0) <= 0.02);
    CHECK(post.variance >= 0.0);
    CHECK(post.variance <= pair.initial_error());
}

TEST_CASE("convergence in N is monotone in the median over seeds") {
    const Kernel k = Kernel::gaussian_rbf(1.0, 1.0);
    const Measure m = Measure::gaussian(0.0, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k, m);
    std::vector<double> med;
    for (int n : {10, 50, 200}) {
        std::vector<double> errs;
        for (int seed = 0; seed < 20; ++seed) {
            Rng rng(hash64(55, static_cast<std::uint64_t>(seed)));
            const Eigen::MatrixXd x = sample_measure(m, rng, n);
            Eigen::VectorXd f(n);
            for (int i = 0; i < n; ++i) f(i) = x(i, 0) * x(i, 0);
            errs.push_back(std::abs(bq_fit(k, pair, x, f, 0.0).mean - 1.0));
        }
        med.push_back(median(errs));
    }
    CHECK(med[1] <= med[0]);
    CHECK(med[2] <= med[1]);
}

TEST_CASE("exactness on the kernel span") {
    const Kernel k = Kernel::gaussian_rbf(1.0, 1.0);
    const Measure m = Measure::gaussian(0.0, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k, m);
    Rng rng(13);
    const int n = 8;
    Eigen::MatrixXd x(n, 1);
    for (int i = 0; i < n; ++i) x(i, 0) = -2.0 + 4.0 * i / (n - 1.0) + 0.05 * rng.normal();
    // f = sum_j a_j k(., z_j) with z_j = first three sample points
    Eigen::VectorXd a(3);
    a << 0.7, -0.4, 1.1;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    double exact = 0.0;
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < n; ++i) f(i) += a(j) * k(x.row(i).transpose(), x.row(j).transpose());
        exact += a(j) * pair.kme(x.row(j).transpose());
    }
    const BqPosterior post = bq_fit(k, pair, x, f, 0.0);
    CHECK(post.mean == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("posterior variance contracts under nested samples") {
    const Kernel k = Kernel::gaussian_rbf(1.0, 1.0);
    const Measure m = Measure::gaussian(0.0, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k, m);
    Rng rng(21);
    const Eigen::MatrixXd x = sample_measure(m, rng, 40);
    double previous = pair.initial_error();
    for (int n : {5, 10, 20, 40}) {
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i) f(i) = std::sin(x(i, 0));
        const BqPosterior post = bq_fit(k, pair, x.topRows(n), f, 0.0);
        CHECK(post.variance <= previous + 1e-10);
        previous = post.variance;
    }
}

TEST_CASE("posterior is invariant to sample ordering") {
    // Matern Gram matrices stay well conditioned, so the permutation noise is
    // genuinely at roundoff level rather than amplified by the solve
    const Kernel k = Kernel::matern32(0.9, 1.4, Kernel::Metric::TensorProduct);
    const Measure m = Measure::gaussian(0.0, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k, m);
    Rng rng(34);
    const int n = 15;
    const Eigen::MatrixXd x = sample_measure(m, rng, n);
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f(i) = std::cos(1.3 * x(i, 0));
    const BqPosterior a = bq_fit(k, pair, x, f, 0.0);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[2], perm[7]);
    Eigen::MatrixXd xp(n, 1);
    Eigen::VectorXd fp(n);
    for (int i = 0; i < n; ++i) {
        xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
        fp(i) = f(perm[static_cast<std::size_t>(i)]);
    }
    const BqPosterior b = bq_fit(k, pair, xp, fp, 0.0);
    CHECK(std::abs(a.mean - b.mean) <= 1e-12 * (1.0 + std::abs(a.mean)));
    CHECK(std::abs(a.variance - b.variance) <= 1e-12);
}

TEST_CASE("embedding built for another kernel is rejected") {
    const Kernel k1 = Kernel::gaussian_rbf(1.0, 1.0);
    const Kernel k2 = Kernel::gaussian_rbf(2.0, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k1, Measure::gaussian(0.0, 1.0));
    Eigen::MatrixXd x(2, 1);
    x << 0.0, 1.0;
    Eigen::VectorXd f(2);
    f << 1.0, 2.0;
    CHECK_THROWS_AS(bq_fit(k2, pair, x, f, 0.0), std::invalid_argument);
}

TEST_CASE("constant prior mean enters both terms") {
    const Kernel k = Kernel::gaussian_rbf(1.0, 1.0);
    const Measure m = Measure::gaussian(0.0, 1.0);
    const EmbeddingPair pair = EmbeddingPair::make(k, m);
    Rng rng(77);
    const Eigen::MatrixXd x = sample_measure(m, rng, 10);
    Eigen::VectorXd f(10);
    for (int i = 0; i < 10; ++i) f(i) = 2.5 + std::sin(x(i, 0));
    BqOptions options;
    options.prior_mean = 2.5;
    const BqPosterior with_mean = bq_fit(k, pair, x, f, 0.0, options);
    const BqPosterior shifted = bq_fit(k, pair, x, Eigen::VectorXd(f.array() - 2.5), 0.0);
    CHECK(with_mean.mean == doctest::Approx(2.5 + shifted.mean).epsilon(1e-12));
    CHECK(with_mean.variance == doctest::Approx(shifted.variance).epsilon(1e-12));
}
