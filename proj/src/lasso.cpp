#include "lolo/lasso.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lolo/error.hpp"
#include "lolo/kernels.hpp"
#include "lolo/log.hpp"
#include "lolo/text.hpp"

namespace lolo {
namespace {

using Span = std::span<const double>;

constexpr double kFirstPolish = 1e-3;

Span column(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Index j) {
    return {x.col(j).data(), static_cast<std::size_t>(x.rows())};
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double mean(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v;
    return s / static_cast<double>(y.size());
}

// -(1/n) loglik without the ln y! term, from a linear predictor.
double loss_from_eta(const std::vector<double>& eta, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) s += std::exp(eta[i]) - y[i] * eta[i];
    return s / static_cast<double>(eta.size());
}

double l1(const Eigen::VectorXd& beta) { return beta.cwiseAbs().sum(); }

double kkt_from_eta(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y, double lambda,
                    const Eigen::VectorXd& beta, const std::vector<double>& eta, std::vector<double>& resid,
                    std::vector<double>* grad = nullptr) {
    const auto& k = kernels::active();
    const std::size_t n = eta.size();
    for (std::size_t i = 0; i < n; ++i) resid[i] = std::exp(eta[i]) - y[i];
    const double inv_n = 1.0 / static_cast<double>(n);
    double worst = std::abs(k.sum(resid.data(), n) * inv_n);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double g = k.dot(x.col(j).data(), resid.data(), n) * inv_n;
        if (grad != nullptr) (*grad)[static_cast<std::size_t>(j)] = g;
        const double v = beta[j] == 0.0 ? std::max(0.0, std::abs(g) - lambda)
                                        : std::abs(g + lambda * (beta[j] > 0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace

double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y) {
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw InputError(fmt::format("design has {} rows but response has {}", x.rows(), y.size()));
    if (y.size() < 2) throw InputError("lambda_max needs at least two observations");
    const double ybar = mean(y);
    if (ybar == 0.0) throw NumericalError("response is identically zero: degenerate lasso path");
    std::vector<double> centered(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) centered[i] = y[i] - ybar;
    double best = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        best = std::max(best, std::abs(kernels::dot(column(x, j), centered)));
    return best / static_cast<double>(y.size());
}

LambdaGrid build_grid(double lmax, std::size_t count, double min_ratio) {
    if (!(lmax > 0.0) || !std::isfinite(lmax))
        throw InputError(fmt::format("lambda_max must be positive, got {}", lmax));
    if (count < 2) throw InputError("lambda grid needs at least two points");
    if (!(min_ratio > 0.0 && min_ratio < 1.0))
        throw InputError(fmt::format("min_ratio must lie in (0, 1), got {}", min_ratio));
    LambdaGrid grid{{}, lmax, count, min_ratio};
    const double log_hi = std::log(lmax);
    const double step = std::log(min_ratio) / static_cast<double>(count - 1);
    grid.values.reserve(count);
    for (std::size_t i = 0; i < count; ++i) grid.values.push_back(std::exp(log_hi + step * static_cast<double>(i)));
    grid.values.front() = lmax;
    grid.values.back() = lmax * min_ratio;
    return grid;
}

double default_min_ratio(std::size_t n, std::size_t p) { return n > p ? 0.01 : 0.05; }

double penalized_objective(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y,
                           double lambda, double intercept, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = linear_predictor(intercept, beta, x);
    const std::vector<double> e(eta.data(), eta.data() + eta.size());
    return loss_from_eta(e, y) + lambda * l1(beta);
}

double kkt_violation(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y, double lambda,
                     const Coefficients& c) {
    const Eigen::VectorXd eta = linear_predictor(c.intercept, c.beta, x);
    const std::vector<double> e(eta.data(), eta.data() + eta.size());
    std::vector<double> resid(e.size());
    return kkt_from_eta(x, y, lambda, c.beta, e, resid);
}

PenalizedFit fit_penalized(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y,
                           double lambda, const Coefficients* warm_start, const LassoOptions& opt) {
    const std::size_t n = y.size();
    const Eigen::Index p = x.cols();
    if (static_cast<std::size_t>(x.rows()) != n)
        throw InputError(fmt::format("design has {} rows but response has {}", x.rows(), n));
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InputError(fmt::format("lambda must be finite and >= 0, got {}", lambda));

    const double ybar = mean(y);
    const double lmax = lambda_max(x, y);
    PenalizedFit fit;
    if (lambda >= lmax) {
        fit.coefficients = {std::log(ybar), Eigen::VectorXd::Zero(p), Frame::standardized};
        fit.kkt_violation = kkt_violation(x, y, lambda, fit.coefficients);
        return fit;
    }

    const auto& k = kernels::active();
    const double inv_n = 1.0 / static_cast<double>(n);
    double b0 = std::log(ybar);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (warm_start != nullptr) {
        if (warm_start->beta.size() != p || warm_start->frame != Frame::standardized)
            throw InputError("warm start does not match the design");
        b0 = warm_start->intercept;
        beta = warm_start->beta;
    }

    std::vector<double> eta(n), w(n), z(n), r(n), scratch(n), trial_eta(n);
    {
        const Eigen::VectorXd e = linear_predictor(b0, beta, x);
        std::copy(e.data(), e.data() + n, eta.begin());
    }
    double objective = loss_from_eta(eta, y) + lambda * l1(beta);
    std::vector<double> xwx(static_cast<std::size_t>(p));
    std::vector<double> grad(static_cast<std::size_t>(p));
    std::vector<Eigen::Index> working, active;
    double inner_tol = opt.inner_tol;
    const double target = 0.5 * opt.kkt_tol;
    double violation = kkt_from_eta(x, y, lambda, beta, eta, scratch, &grad);
    bool warned_clamp = false;

    for (int outer = 0; outer < opt.max_outer && violation > target; ++outer) {
        fit.outer_iterations = outer + 1;
        std::size_t clamped = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = eta[i];
            if (e > opt.eta_clamp || e < -opt.eta_clamp) {
                e = std::clamp(e, -opt.eta_clamp, opt.eta_clamp);
                ++clamped;
            }
            const double mu = std::exp(e);
            w[i] = std::max(mu, opt.weight_floor);
            r[i] = (y[i] - mu) / w[i];
            z[i] = eta[i] + r[i];
        }
        if (clamped > 0 && !warned_clamp) {
            log().warn("lasso: clamped {} linear predictor values to +/-{}", clamped, opt.eta_clamp);
            warned_clamp = true;
        }
        const double wsum = k.sum(w.data(), n);
        // Coordinate descent runs over nonzero coefficients and columns near
        // the KKT boundary; the full check after each update catches the rest.
        working.clear();
        for (Eigen::Index j = 0; j < p; ++j)
            if (beta[j] != 0.0 || std::abs(grad[static_cast<std::size_t>(j)]) >= 0.9 * lambda) working.push_back(j);
        for (Eigen::Index j : working) xwx[static_cast<std::size_t>(j)] =
            k.weighted_sumsq(w.data(), x.col(j).data(), n) * inv_n;

        double nb0 = b0;
        Eigen::VectorXd nbeta = beta;
        const auto update_intercept = [&] {
            const double d = k.dot(w.data(), r.data(), n) / wsum;
            if (d != 0.0) {
                nb0 += d;
                for (std::size_t i = 0; i < n; ++i) r[i] -= d;
            }
            return std::abs(d);
        };
        const auto update = [&](Eigen::Index j) {
            const double h = xwx[static_cast<std::size_t>(j)];
            if (h <= 0.0) return 0.0;
            const double old = nbeta[j];
            const double g = k.weighted_dot(w.data(), x.col(j).data(), r.data(), n) * inv_n + h * old;
            const double next = soft_threshold(g, lambda) / h;
            const double d = next - old;
            if (d != 0.0) {
                k.axpy(-d, x.col(j).data(), r.data(), n);
                nbeta[j] = next;
            }
            return std::abs(d);
        };

        // Active-set step on the quadratic model: solve for the minimizer
        // with the current signs fixed; if a sign would flip, move to the
        // first zero crossing, drop that coordinate and solve again. Every
        // move lowers the model objective. Coordinate descent then resumes.
        const auto polish = [&] {
            std::vector<Eigen::Index> set = active;
            const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(n));
            const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(n));
            bool moved_any = false;
            while (!set.empty()) {
                const auto m = static_cast<Eigen::Index>(set.size()) + 1;
                Eigen::MatrixXd xa(static_cast<Eigen::Index>(n), m);
                xa.col(0).setOnes();
                Eigen::VectorXd cur(m);
                cur[0] = nb0;
                for (Eigen::Index c = 1; c < m; ++c) {
                    xa.col(c) = x.col(set[static_cast<std::size_t>(c - 1)]);
                    cur[c] = nbeta[set[static_cast<std::size_t>(c - 1)]];
                }
                const Eigen::MatrixXd wxa = xa.array().colwise() * wv.array();
                const Eigen::MatrixXd h = (xa.transpose() * wxa) * inv_n;
                Eigen::VectorXd rhs = (wxa.transpose() * zv) * inv_n;
                for (Eigen::Index c = 1; c < m; ++c) rhs[c] -= lambda * (cur[c] > 0 ? 1.0 : -1.0);
                const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
                if (ldlt.info() != Eigen::Success) break;
                const Eigen::VectorXd theta = ldlt.solve(rhs);
                if (!theta.allFinite() || (h * theta - rhs).norm() > 1e-8 * (rhs.norm() + 1.0)) break;
                double t = 1.0;
                Eigen::Index hit = 0;
                for (Eigen::Index c = 1; c < m; ++c) {
                    if (theta[c] * cur[c] <= 0.0) {
                        const double tc = cur[c] / (cur[c] - theta[c]);
                        if (tc < t) {
                            t = tc;
                            hit = c;
                        }
                    }
                }
                const Eigen::VectorXd next = cur + t * (theta - cur);
                nb0 = next[0];
                for (Eigen::Index c = 1; c < m; ++c) nbeta[set[static_cast<std::size_t>(c - 1)]] = next[c];
                moved_any = true;
                if (hit == 0) break;
                nbeta[set[static_cast<std::size_t>(hit - 1)]] = 0.0;
                set.erase(set.begin() + (hit - 1));
            }
            if (!moved_any) return;
            Eigen::VectorXd fitted = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), nb0);
            for (Eigen::Index j : active)
                if (nbeta[j] != 0.0) fitted += nbeta[j] * x.col(j);
            for (std::size_t i = 0; i < n; ++i) r[i] = z[i] - fitted[static_cast<Eigen::Index>(i)];
        };

        int cycles = 0;
        double polish_at = kFirstPolish;
        while (cycles < opt.max_inner) {
            double change = update_intercept();
            for (Eigen::Index j : working) change = std::max(change, update(j));
            ++cycles;
            if (change < inner_tol) break;
            active.clear();
            for (Eigen::Index j : working)
                if (nbeta[j] != 0.0) active.push_back(j);
            while (cycles < opt.max_inner) {
                double c = update_intercept();
                for (Eigen::Index j : active) c = std::max(c, update(j));
                ++cycles;
                if (c < inner_tol) break;
                if (c < polish_at && !active.empty()) {
                    polish_at = c * 0.1;
                    polish();
                }
            }
        }
        fit.inner_cycles += cycles;

        // Candidate linear predictor: eta' = z - r.
        for (std::size_t i = 0; i < n; ++i) trial_eta[i] = z[i] - r[i];
        double next_objective = loss_from_eta(trial_eta, y) + lambda * l1(nbeta);
        double step = 1.0;
        while (!(next_objective <= objective + 1e-15 * std::abs(objective)) && step > 1e-9) {
            step *= 0.5;
            for (std::size_t i = 0; i < n; ++i) trial_eta[i] = eta[i] + step * (z[i] - r[i] - eta[i]);
            const Eigen::VectorXd cand = beta + step * (nbeta - beta);
            next_objective = loss_from_eta(trial_eta, y) + lambda * l1(cand);
        }
        if (!(next_objective <= objective + 1e-15 * std::abs(objective))) {
            // No descent available along the Newton direction; tighten and retry.
            inner_tol = std::max(inner_tol * 0.1, 1e-16);
            continue;
        }
        const double moved = std::max(std::abs(nb0 - b0) * step, (nbeta - beta).cwiseAbs().maxCoeff() * step);
        if (step == 1.0) {
            b0 = nb0;
            beta = nbeta;
        } else {
            b0 += step * (nb0 - b0);
            beta += step * (nbeta - beta);
        }
        eta.swap(trial_eta);
        objective = next_objective;
        violation = kkt_from_eta(x, y, lambda, beta, eta, scratch, &grad);
        if (moved < 10 * inner_tol) inner_tol = std::max(inner_tol * 0.1, 1e-16);
    }

    fit.coefficients = {b0, beta, Frame::standardized};
    fit.kkt_violation = violation;
    if (violation > opt.kkt_tol)
        throw NumericalError(fmt::format("lasso did not converge at lambda={} (KKT violation {:.3g})",
                                         lambda, violation));
    return fit;
}

std::vector<std::size_t> active_groups(const DesignMatrix& design, const Eigen::VectorXd& beta) {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < design.groups.size(); ++g) {
        const Group& grp = design.groups[g];
        for (std::size_t j = grp.first; j < grp.first + grp.count; ++j) {
            if (beta[static_cast<Eigen::Index>(j)] != 0.0) {
                out.push_back(g);
                break;
            }
        }
    }
    return out;
}

LassoPath fit_path(const DesignMatrix& design, std::span<const double> y, const LambdaGrid& grid,
                   const LassoOptions& options, PathFailure on_failure) {
    LassoPath path;
    path.grid = grid;
    path.coefficients.reserve(grid.values.size());
    const Coefficients* warm = nullptr;
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        PenalizedFit fit;
        try {
            fit = fit_penalized(design.values, y, grid.values[i], warm, options);
        } catch (const NumericalError& e) {
            if (on_failure == PathFailure::truncate && i > 0) {
                log().warn("path truncated at point {} of {}: {}", i, grid.values.size(), e.what());
                path.failed_at = i;
                return path;
            }
            throw NumericalError(fmt::format("path point {}: {}", i, e.what()));
        }
        path.active_sets.push_back(active_groups(design, fit.coefficients.beta));
        const std::vector<double> mu = predict_mu(fit.coefficients, design);
        path.train_deviance.push_back(deviance(y, mu));
        path.coefficients.push_back(std::move(fit.coefficients));
        warm = &path.coefficients.back();
    }
    return path;
}

void write_path(std::ostream& out, const DesignMatrix& design, const LassoPath& path) {
    out << "lambda,group,coefficient_norm\n";
    for (std::size_t i = 0; i < path.grid.values.size(); ++i) {
        const Eigen::VectorXd& beta = path.coefficients[i].beta;
        for (const Group& g : design.groups) {
            const double norm = beta.segment(static_cast<Eigen::Index>(g.first),
                                             static_cast<Eigen::Index>(g.count)).norm();
            out << text::format_double(path.grid.values[i]) << ',' << g.name << ','
                << text::format_double(norm) << '\n';
        }
    }
}

}  // namespace lolo
