#include "cbq/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "cbq/linalg.hpp"

namespace cbq {

double mc_estimate(const Eigen::VectorXd& f_vals) {
    if (f_vals.size() == 0) throw std::invalid_argument("mc_estimate: empty input");
    return f_vals.mean();
}

double is_estimate(const IsDataset& data,
                   const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& log_density,
                   const Eigen::VectorXd& theta_star, IsNormalization normalization) {
    const std::size_t T = data.samples.size();
    if (T == 0 || data.f_vals.size() != T || data.thetas.rows() != static_cast<Eigen::Index>(T))
        throw std::invalid_argument("is_estimate: malformed dataset");
    double acc = 0.0;
    long total = 0;
    for (std::size_t t = 0; t < T; ++t) {
        const Eigen::MatrixXd& X = data.samples[t];
        const Eigen::VectorXd& f = data.f_vals[t];
        const Eigen::VectorXd theta_t = data.thetas.row(static_cast<Eigen::Index>(t)).transpose();
        if (X.rows() != f.size()) throw std::invalid_argument("is_estimate: sample/value count mismatch");
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const Eigen::VectorXd x = X.row(i).transpose();
            const double lp_star = log_density(theta_star, x);
            const double lp_t = log_density(theta_t, x);
            if (!std::isfinite(lp_t)) throw std::runtime_error("is_estimate: proposal density vanishes at a sample");
            acc += std::exp(lp_star - lp_t) * f(i);
            ++total;
        }
    }
    const double norm = normalization == IsNormalization::Verbatim ? static_cast<double>(T)
                                                                   : static_cast<double>(total);
    return acc / norm;
}

int PolynomialModel::monomial_count(int order, int dim) {
    // C(order + dim, dim)
    long num = 1;
    for (int i = 1; i <= dim; ++i) num = num * (order + i) / i;
    return static_cast<int>(num);
}

namespace {

void enumerate_exponents(int dim, int order, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == dim) {
        out.push_back(cur);
        return;
    }
    int used = 0;
    for (int e : cur) used += e;
    for (int e = 0; e <= order - used; ++e) {
        cur.push_back(e);
        enumerate_exponents(dim, order, cur, out);
        cur.pop_back();
    }
}

double eval_monomial(const std::vector<int>& expo, const Eigen::VectorXd& theta) {
    double v = 1.0;
    for (std::size_t j = 0; j < expo.size(); ++j)
        for (int k = 0; k < expo[j]; ++k) v *= theta(static_cast<Eigen::Index>(j));
    return v;
}

}  // namespace

PolynomialModel PolynomialModel::fit(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& targets, int order,
                                     double ridge) {
    if (order < 1 || order > 4) throw std::invalid_argument("lsmc_fit: order must be in {1,2,3,4}");
    if (!(ridge >= 0.0)) throw std::invalid_argument("lsmc_fit: ridge must be nonnegative");
    const Eigen::Index T = thetas.rows();
    if (T != targets.size()) throw std::invalid_argument("lsmc_fit: size mismatch");
    const int dim = static_cast<int>(thetas.cols());

    PolynomialModel model;
    model.order_ = order;
    std::vector<int> cur;
    enumerate_exponents(dim, order, cur, model.exponents_);
    const Eigen::Index cols = static_cast<Eigen::Index>(model.exponents_.size());
    if (ridge == 0.0 && T <= cols) throw std::invalid_argument("lsmc_fit: not enough points for the chosen order");

    Eigen::MatrixXd Phi(T, cols);
    for (Eigen::Index i = 0; i < T; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            Phi(i, j) = eval_monomial(model.exponents_[static_cast<std::size_t>(j)], thetas.row(i).transpose());

    // unit-variance column scaling; constant columns are left alone
    model.col_scale_ = Eigen::VectorXd::Ones(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double m = Phi.col(j).mean();
        const double sd = std::sqrt((Phi.col(j).array() - m).square().mean());
        if (sd > 1e-12) model.col_scale_(j) = sd;
        Phi.col(j) /= model.col_scale_(j);
    }

    if (ridge == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Phi);
        if (qr.rank() < cols) throw std::runtime_error("lsmc_fit: rank-deficient design at zero ridge");
        model.coef_ = qr.solve(targets);
    } else {
        Eigen::MatrixXd G = Phi.transpose() * Phi;
        for (Eigen::Index j = 0; j < cols; ++j) {
            bool constant = true;
            for (int e : model.exponents_[static_cast<std::size_t>(j)]) constant = constant && e == 0;
            if (!constant) G(j, j) += ridge;  // intercept is not penalised
        }
        model.coef_ = Eigen::LDLT<Eigen::MatrixXd>(G).solve(Phi.transpose() * targets);
    }
    return model;
}

double PolynomialModel::predict(const Eigen::VectorXd& theta) const {
    if (static_cast<std::size_t>(theta.size()) != exponents_.front().size())
        throw std::invalid_argument("lsmc_predict: dimension mismatch");
    double v = 0.0;
    for (Eigen::Index j = 0; j < coef_.size(); ++j)
        v += coef_(j) * eval_monomial(exponents_[static_cast<std::size_t>(j)], theta) / col_scale_(j);
    return v;
}

PolynomialModel lsmc_fit(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& mc_means, int order, double ridge) {
    return PolynomialModel::fit(thetas, mc_means, order, ridge);
}

double lsmc_predict(const PolynomialModel& model, const Eigen::VectorXd& theta) { return model.predict(theta); }

CbqModel klsmc_fit(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& mc_means, const Kernel& k_theta,
                   double lambda_theta, const CbqOptions& options) {
    return CbqModel::fit(thetas, mc_means, Eigen::VectorXd::Zero(mc_means.size()), k_theta, lambda_theta, options);
}

double klsmc_predict(const CbqModel& model, const Eigen::VectorXd& theta) { return model.predict(theta).first; }

namespace {

Eigen::MatrixXd concatenate(const std::vector<Eigen::MatrixXd>& samples) {
    if (samples.empty()) throw std::invalid_argument("mobq: empty dataset");
    Eigen::Index total = 0;
    for (const auto& s : samples) total += s.rows();
    Eigen::MatrixXd all(total, samples.front().cols());
    Eigen::Index at = 0;
    for (const auto& s : samples) {
        all.middleRows(at, s.rows()) = s;
        at += s.rows();
    }
    return all;
}

Eigen::VectorXd concatenate(const std::vector<Eigen::VectorXd>& vals) {
    Eigen::Index total = 0;
    for (const auto& v : vals) total += v.size();
    Eigen::VectorXd all(total);
    Eigen::Index at = 0;
    for (const auto& v : vals) {
        all.segment(at, v.size()) = v;
        at += v.size();
    }
    return all;
}

}  // namespace

MobqModel MobqModel::fit(const std::vector<Eigen::MatrixXd>& samples, const std::vector<Eigen::VectorXd>& f_vals,
                         const Kernel& k_x, const MobqOptions& options) {
    MobqModel m;
    m.all_samples_ = concatenate(samples);
    if (m.all_samples_.rows() > options.max_points)
        throw std::invalid_argument("mobq: point count exceeds the configured cap");
    const Eigen::VectorXd f = concatenate(f_vals);
    if (f.size() != m.all_samples_.rows()) throw std::invalid_argument("mobq: sample/value count mismatch");
    const Eigen::MatrixXd K = k_x.gram(m.all_samples_, m.all_samples_);
    PsdSolver solver(K, options.lambda_x);
    m.weights_ = solver.solve(f);
    m.jitter_ = solver.jitter();
    return m;
}

MobqModel MobqModel::fit_xtheta(const std::vector<Eigen::MatrixXd>& samples,
                                const std::vector<Eigen::VectorXd>& f_vals, const Kernel& k_x,
                                const Kernel& k_theta, const Eigen::MatrixXd& thetas, const MobqOptions& options) {
    if (thetas.rows() != static_cast<Eigen::Index>(samples.size()))
        throw std::invalid_argument("mobq: one theta per sample group required");
    MobqModel m;
    m.all_samples_ = concatenate(samples);
    if (m.all_samples_.rows() > options.max_points)
        throw std::invalid_argument("mobq: point count exceeds the configured cap");
    const Eigen::VectorXd f = concatenate(f_vals);
    if (f.size() != m.all_samples_.rows()) throw std::invalid_argument("mobq: sample/value count mismatch");

    m.all_thetas_.resize(m.all_samples_.rows(), thetas.cols());
    Eigen::Index at = 0;
    for (std::size_t t = 0; t < samples.size(); ++t) {
        for (Eigen::Index i = 0; i < samples[t].rows(); ++i) m.all_thetas_.row(at++) = thetas.row(static_cast<Eigen::Index>(t));
    }
    const Eigen::MatrixXd K =
        k_x.gram(m.all_samples_, m.all_samples_).cwiseProduct(k_theta.gram(m.all_thetas_, m.all_thetas_));
    PsdSolver solver(K, options.lambda_x);
    m.weights_ = solver.solve(f);
    m.jitter_ = solver.jitter();
    m.k_theta_ = k_theta;
    m.has_theta_ = true;
    return m;
}

double MobqModel::predict(const EmbeddingPair& pair_at_theta_star) const {
    if (has_theta_) throw std::logic_error("mobq: this model needs a theta* for prediction");
    return pair_at_theta_star.kme_all(all_samples_).dot(weights_);
}

double MobqModel::predict(const EmbeddingPair& pair_at_theta_star, const Eigen::VectorXd& theta_star) const {
    if (!has_theta_) return predict(pair_at_theta_star);
    Eigen::VectorXd mu = pair_at_theta_star.kme_all(all_samples_);
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        mu(i) *= k_theta_(theta_star, all_thetas_.row(i).transpose());
    return mu.dot(weights_);
}

double mobq_estimate(const std::vector<Eigen::MatrixXd>& samples, const std::vector<Eigen::VectorXd>& f_vals,
                     const Kernel& k_x, const EmbeddingPair& pair_at_theta_star, const MobqOptions& options) {
    return MobqModel::fit(samples, f_vals, k_x, options).predict(pair_at_theta_star);
}

}  // namespace cbq
