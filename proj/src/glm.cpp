#include "lolo/glm.hpp"

#include <Eigen/QR>
#include <fmt/format.h>

#include <cmath>
#include <numeric>

#include "lolo/error.hpp"
#include "lolo/kernels.hpp"

namespace lolo {
namespace {

void check_sizes(Eigen::Index rows, std::size_t n_y) {
    if (static_cast<std::size_t>(rows) != n_y)
        throw InputError(fmt::format("design has {} rows but response has {}", rows, n_y));
}

// Greedy, order-preserving rank detection: keep a column when it is not
// (numerically) in the span of the intercept and the columns kept so far.
std::vector<Eigen::Index> independent_columns(const Eigen::Ref<const Eigen::MatrixXd>& x, double tol) {
    const Eigen::Index n = x.rows();
    std::vector<Eigen::VectorXd> basis;
    basis.push_back(Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        Eigen::VectorXd v = x.col(j);
        const double norm0 = v.norm();
        if (norm0 == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (const Eigen::VectorXd& q : basis) v -= q.dot(v) * q;
        const double norm = v.norm();
        if (norm <= tol * norm0) continue;
        basis.push_back(v / norm);
        kept.push_back(j);
    }
    return kept;
}

double gradient_max_norm(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
    return (a.transpose() * (y - mu)).cwiseAbs().maxCoeff();
}

}  // namespace

Coefficients to_original(const Coefficients& c, std::span<const Standardization> scaling) {
    if (c.frame == Frame::original) return c;
    Coefficients out{c.intercept, c.beta, Frame::original};
    for (Eigen::Index j = 0; j < c.beta.size(); ++j) {
        const Standardization& s = scaling[static_cast<std::size_t>(j)];
        out.beta[j] = c.beta[j] / s.scale;
        out.intercept -= out.beta[j] * s.center;
    }
    return out;
}

Coefficients to_standardized(const Coefficients& c, std::span<const Standardization> scaling) {
    if (c.frame == Frame::standardized) return c;
    Coefficients out{c.intercept, c.beta, Frame::standardized};
    for (Eigen::Index j = 0; j < c.beta.size(); ++j) {
        const Standardization& s = scaling[static_cast<std::size_t>(j)];
        out.beta[j] = c.beta[j] * s.scale;
        out.intercept += c.beta[j] * s.center;
    }
    return out;
}

Eigen::VectorXd linear_predictor(double intercept, const Eigen::VectorXd& beta,
                                 const Eigen::Ref<const Eigen::MatrixXd>& x) {
    if (beta.size() != x.cols())
        throw InputError(fmt::format("{} coefficients for {} design columns", beta.size(), x.cols()));
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(x.rows(), intercept);
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        if (beta[j] != 0.0)
            kernels::axpy(beta[j], {x.col(j).data(), static_cast<std::size_t>(x.rows())},
                          {eta.data(), static_cast<std::size_t>(eta.size())});
    return eta;
}

double log_likelihood(double intercept, const Eigen::VectorXd& beta,
                      const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y) {
    check_sizes(x.rows(), y.size());
    const Eigen::VectorXd eta = linear_predictor(intercept, beta, x);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double mu = std::exp(eta[i]);
        if (!std::isfinite(eta[i]) || !std::isfinite(mu))
            throw NumericalError(fmt::format("non-finite linear predictor at row {}", i + 1));
        const double yi = y[static_cast<std::size_t>(i)];
        ll += yi * eta[i] - mu - std::lgamma(yi + 1.0);
    }
    return ll;
}

double log_likelihood(const Coefficients& c, const DesignMatrix& design, std::span<const double> y) {
    const Eigen::MatrixXd& x = c.frame == Frame::standardized ? design.values : design.raw;
    return log_likelihood(c.intercept, c.beta, x, y);
}

Eigen::VectorXd score(double intercept, const Eigen::VectorXd& beta,
                      const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y) {
    check_sizes(x.rows(), y.size());
    const Eigen::VectorXd eta = linear_predictor(intercept, beta, x);
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = y[static_cast<std::size_t>(i)] - std::exp(eta[i]);
    Eigen::VectorXd g(x.cols() + 1);
    g[0] = resid.sum();
    g.tail(x.cols()) = x.transpose() * resid;
    return g;
}

std::vector<double> predict_mu(const Coefficients& c, const DesignMatrix& design) {
    const Eigen::MatrixXd& x = c.frame == Frame::standardized ? design.values : design.raw;
    const Eigen::VectorXd eta = linear_predictor(c.intercept, c.beta, x);
    std::vector<double> mu(static_cast<std::size_t>(eta.size()));
    for (Eigen::Index i = 0; i < eta.size(); ++i) mu[static_cast<std::size_t>(i)] = std::exp(eta[i]);
    return mu;
}

double saturated_log_likelihood(std::span<const double> y) {
    double ll = 0.0;
    for (double yi : y)
        if (yi > 0) ll += yi * std::log(yi) - yi - std::lgamma(yi + 1.0);
    return ll;
}

double deviance(std::span<const double> y, std::span<const double> mu) {
    if (y.size() != mu.size())
        throw InputError(fmt::format("deviance: {} responses vs {} means", y.size(), mu.size()));
    double d = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(mu[i] > 0.0)) throw InputError(fmt::format("deviance: nonpositive mean at row {}", i));
        const double term = y[i] > 0 ? y[i] * std::log(y[i] / mu[i]) : 0.0;
        d += term - (y[i] - mu[i]);
    }
    return std::max(0.0, 2.0 * d);
}

FitResult fit_irls(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y,
                   const IrlsOptions& options) {
    check_sizes(x.rows(), y.size());
    const Eigen::Index n = x.rows();
    const std::vector<Eigen::Index> kept = independent_columns(x, options.rank_tol);
    const auto k = static_cast<Eigen::Index>(kept.size());
    if (n <= k + 1)
        throw NumericalError(fmt::format("{} observations for {} parameters", n, k + 1));

    FitResult result;
    std::vector<bool> is_kept(static_cast<std::size_t>(x.cols()), false);
    for (Eigen::Index j : kept) is_kept[static_cast<std::size_t>(j)] = true;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        if (!is_kept[static_cast<std::size_t>(j)]) result.dropped_columns.push_back(static_cast<std::size_t>(j));

    Eigen::MatrixXd a(n, k + 1);
    a.col(0).setOnes();
    for (Eigen::Index c = 0; c < k; ++c) a.col(c + 1) = x.col(kept[static_cast<std::size_t>(c)]);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

    const double ybar = n > 0 ? yv.mean() : 0.0;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(k + 1);
    theta[0] = std::log(ybar + 0.1);
    Eigen::VectorXd eta = a * theta;
    Eigen::VectorXd mu = eta.array().exp();
    double dev = deviance(y, {mu.data(), static_cast<std::size_t>(n)});

    int iter = 0;
    bool converged = false;
    while (iter < options.max_iterations) {
        ++iter;
        const Eigen::VectorXd w = mu;
        if (!w.allFinite()) throw NumericalError("IRLS diverged: non-finite working weights");
        const Eigen::VectorXd z = eta + ((yv - mu).array() / mu.array()).matrix();
        const Eigen::VectorXd sw = w.array().sqrt();
        const Eigen::MatrixXd wa = a.array().colwise() * sw.array();
        Eigen::VectorXd proposal = Eigen::HouseholderQR<Eigen::MatrixXd>(wa).solve(
            (z.array() * sw.array()).matrix());
        if (!proposal.allFinite()) throw NumericalError("IRLS diverged: non-finite update");

        // Step halving keeps the deviance from increasing.
        Eigen::VectorXd step = proposal - theta;
        double new_dev = 0.0;
        Eigen::VectorXd new_eta, new_mu;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving) {
            const Eigen::VectorXd cand = theta + step;
            new_eta = a * cand;
            new_mu = new_eta.array().exp();
            if (new_mu.allFinite() && (new_mu.array() > 0).all()) {
                new_dev = deviance(y, {new_mu.data(), static_cast<std::size_t>(n)});
                if (new_dev <= dev * (1 + 1e-12) + 1e-12) {
                    theta = cand;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No decrease possible from here: at the optimum up to rounding.
            converged = gradient_max_norm(a, yv, mu) < 1e-6;
            break;
        }
        const double change = std::abs(new_dev - dev) / (std::abs(new_dev) + 0.1);
        eta = new_eta;
        mu = new_mu;
        dev = new_dev;
        const double grad = gradient_max_norm(a, yv, mu);
        if (grad < options.gradient_tol || (change < options.deviance_tol && grad < 1e-6)) {
            converged = true;
            break;
        }
    }

    result.coefficients.intercept = theta[0];
    result.coefficients.beta = Eigen::VectorXd::Zero(x.cols());
    for (Eigen::Index c = 0; c < k; ++c) result.coefficients.beta[kept[static_cast<std::size_t>(c)]] = theta[c + 1];
    result.coefficients.frame = Frame::standardized;
    result.deviance = dev;
    result.log_likelihood = saturated_log_likelihood(y) - dev / 2.0;
    result.iterations = iter;
    result.converged = converged;
    return result;
}

FitResult fit_irls(const DesignMatrix& design, std::span<const double> y,
                   std::optional<std::span<const std::size_t>> columns, const IrlsOptions& options) {
    if (!columns) return fit_irls(design.values, y, options);
    const auto n = design.values.rows();
    Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(columns->size()));
    for (std::size_t c = 0; c < columns->size(); ++c) {
        const std::size_t j = (*columns)[c];
        if (j >= design.cols()) throw InputError(fmt::format("column {} out of range", j));
        sub.col(static_cast<Eigen::Index>(c)) = design.values.col(static_cast<Eigen::Index>(j));
    }
    FitResult sub_fit = fit_irls(sub, y, options);
    FitResult out = sub_fit;
    out.coefficients.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(design.cols()));
    for (std::size_t c = 0; c < columns->size(); ++c)
        out.coefficients.beta[static_cast<Eigen::Index>((*columns)[c])] =
            sub_fit.coefficients.beta[static_cast<Eigen::Index>(c)];
    out.dropped_columns.clear();
    for (std::size_t c : sub_fit.dropped_columns) out.dropped_columns.push_back((*columns)[c]);
    return out;
}

}  // namespace lolo
