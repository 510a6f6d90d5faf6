#include "lolo/cv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "lolo/error.hpp"
#include "lolo/log.hpp"
#include "lolo/parallel.hpp"
#include "lolo/text.hpp"

namespace lolo {

std::vector<std::size_t> FoldPlan::members(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] != fold) out.push_back(i);
    return out;
}

std::size_t distinct_levels(const Dataset& data, std::string_view variable) {
    const VariableSpec& spec = data.spec(variable);
    if (spec.is_numeric()) throw InputError(fmt::format("level key '{}' must be nominal", variable));
    std::vector<bool> seen(spec.levels.size(), false);
    for (int l : data.column(variable).level) seen[static_cast<std::size_t>(l)] = true;
    return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
}

FoldPlan build_folds(const Dataset& data, const std::optional<std::string>& level_key, std::size_t folds,
                     std::uint64_t seed) {
    if (folds < 2) throw InputError(fmt::format("need at least 2 folds, got {}", folds));
    FoldPlan plan;
    plan.folds = folds;
    plan.level_key = level_key;
    plan.seed = seed;
    plan.assignment.assign(data.n, 0);
    std::mt19937_64 rng(seed);

    if (level_key) {
        const VariableSpec& spec = data.spec(*level_key);
        if (spec.is_numeric()) throw InputError(fmt::format("level key '{}' must be nominal", *level_key));
        const std::vector<int>& level = data.column(*level_key).level;
        std::vector<bool> seen(spec.levels.size(), false);
        for (int l : level) seen[static_cast<std::size_t>(l)] = true;
        std::vector<std::size_t> observed;
        for (std::size_t l = 0; l < seen.size(); ++l)
            if (seen[l]) observed.push_back(l);
        if (folds > observed.size())
            throw InputError(fmt::format("{} folds requested but '{}' has only {} levels", folds, *level_key,
                                         observed.size()));
        if (folds < observed.size()) std::shuffle(observed.begin(), observed.end(), rng);
        std::vector<std::size_t> fold_of_level(spec.levels.size(), 0);
        std::vector<std::vector<std::string>> names(folds);
        for (std::size_t i = 0; i < observed.size(); ++i) {
            fold_of_level[observed[i]] = i % folds;
            names[i % folds].push_back(spec.levels[observed[i]]);
        }
        for (std::size_t r = 0; r < data.n; ++r)
            plan.assignment[r] = fold_of_level[static_cast<std::size_t>(level[r])];
        for (auto& fold_names : names) {
            std::string joined;
            for (std::size_t i = 0; i < fold_names.size(); ++i) joined += (i ? "|" : "") + fold_names[i];
            plan.labels.push_back(std::move(joined));
        }
    } else {
        if (folds > data.n)
            throw InputError(fmt::format("{} folds requested for {} observations", folds, data.n));
        std::vector<std::size_t> rows(data.n);
        std::iota(rows.begin(), rows.end(), 0);
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t i = 0; i < rows.size(); ++i) plan.assignment[rows[i]] = i % folds;
        for (std::size_t f = 0; f < folds; ++f) plan.labels.push_back(fmt::format("fold{}", f + 1));
    }

    std::vector<std::size_t> sizes(folds, 0);
    for (std::size_t a : plan.assignment) ++sizes[a];
    for (std::size_t f = 0; f < folds; ++f)
        if (sizes[f] == 0) throw InputError(fmt::format("fold {} would be empty", f));
    return plan;
}

LambdaSelection select_lambda(std::span<const double> grid, std::span<const double> mean_score,
                              std::span<const double> score_se) {
    if (grid.size() != mean_score.size() || grid.size() != score_se.size())
        throw InputError("select_lambda: grid, score and se lengths differ");
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::size_t best = none;
    std::size_t best_literal = none;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(mean_score[i])) continue;
        if (best == none || mean_score[i] < mean_score[best]) best = i;
        const double se = std::isfinite(score_se[i]) ? score_se[i] : 0.0;
        if (best_literal == none ||
            mean_score[i] + se < mean_score[best_literal] + (std::isfinite(score_se[best_literal])
                                                                 ? score_se[best_literal]
                                                                 : 0.0))
            best_literal = i;
    }
    if (best == none) throw NumericalError("every cross-validation score is non-finite");
    const double bound = mean_score[best] + (std::isfinite(score_se[best]) ? score_se[best] : 0.0);
    std::size_t one_se = best;
    for (std::size_t i = 0; i < best; ++i) {
        if (std::isfinite(mean_score[i]) && mean_score[i] <= bound) {
            one_se = i;
            break;
        }
    }
    LambdaSelection s;
    s.index_min = best;
    s.index_1se = one_se;
    s.index_1se_literal = best_literal;
    s.lambda_min = grid[best];
    s.lambda_1se = grid[one_se];
    s.lambda_1se_literal = grid[best_literal];
    return s;
}

CvCurve cv_curve(const DesignMatrix& design, std::span<const double> y, const FoldPlan& folds,
                 const LambdaGrid& grid, const CvOptions& options) {
    if (folds.folds < 2) throw InputError("cross-validation needs at least 2 folds");
    if (folds.assignment.size() != y.size())
        throw InputError(fmt::format("fold plan covers {} rows, response has {}", folds.assignment.size(), y.size()));
    const std::size_t m = grid.values.size();
    CvCurve curve;
    curve.grid = grid;
    curve.fold_scores.assign(folds.folds, {});

    parallel_for(folds.folds, options.jobs, [&](std::size_t f) {
        const std::vector<std::size_t> train = folds.complement(f);
        const std::vector<std::size_t> test = folds.members(f);
        std::vector<double> y_train, y_test;
        for (std::size_t i : train) y_train.push_back(y[i]);
        for (std::size_t i : test) y_test.push_back(y[i]);
        if (std::all_of(y_train.begin(), y_train.end(), [](double v) { return v == 0.0; })) {
            log().warn("cv: fold {} skipped, training response is identically zero", f);
            return;
        }
        const DesignMatrix train_design = select_rows(design, train);
        const DesignMatrix test_design = select_rows(design, test);
        LassoPath path;
        try {
            path = fit_path(train_design, y_train, grid, options.lasso, PathFailure::truncate);
        } catch (const NumericalError& e) {
            throw NumericalError(fmt::format("cv fold {}: {}", f, e.what()));
        }
        std::vector<double> scores(m, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < path.coefficients.size(); ++i) {
            std::vector<double> mu = predict_mu(path.coefficients[i], test_design);
            for (double& v : mu) v = std::max(v, std::numeric_limits<double>::min());
            scores[i] = deviance(y_test, mu) / static_cast<double>(y_test.size());
        }
        curve.fold_scores[f] = std::move(scores);
    });

    std::vector<std::size_t> used;
    for (std::size_t f = 0; f < folds.folds; ++f)
        if (!curve.fold_scores[f].empty()) used.push_back(f);
    curve.n_effective = used.size();
    if (used.empty()) throw NumericalError("cross-validation: every fold was degenerate");
    if (used.size() < folds.folds)
        log().warn("cv: {} of {} folds usable", used.size(), folds.folds);

    const double k = static_cast<double>(used.size());
    curve.mean_score.assign(m, 0.0);
    curve.score_se.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t f : used) s += curve.fold_scores[f][i];
        const double mean = s / k;
        double ss = 0.0;
        for (std::size_t f : used) ss += (curve.fold_scores[f][i] - mean) * (curve.fold_scores[f][i] - mean);
        curve.mean_score[i] = mean;
        curve.score_se[i] = used.size() > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
    }
    curve.selection = select_lambda(grid.values, curve.mean_score, curve.score_se);
    return curve;
}

CvFit cross_validate(const DesignMatrix& design, std::span<const double> y, const FoldPlan& folds,
                     const LambdaGrid& grid, const CvOptions& options) {
    CvFit fit;
    fit.curve = cv_curve(design, y, folds, grid, options);
    fit.path = fit_path(design, y, grid, options.lasso, PathFailure::truncate);
    for (const auto& active : fit.path.active_sets) fit.curve.n_active.push_back(active.size());
    return fit;
}

void write_curve(std::ostream& out, const CvCurve& curve) {
    out << "lambda,mean_score,score_se,n_active\n";
    for (std::size_t i = 0; i < curve.grid.values.size(); ++i) {
        out << text::format_double(curve.grid.values[i]) << ',' << text::format_double(curve.mean_score[i]) << ','
            << text::format_double(curve.score_se[i]) << ',';
        if (i < curve.n_active.size()) out << curve.n_active[i];
        out << '\n';
    }
    out << "#selected,lambda_min=" << text::format_double(curve.selection.lambda_min)
        << ",lambda_1se=" << text::format_double(curve.selection.lambda_1se)
        << ",lambda_1se_literal=" << text::format_double(curve.selection.lambda_1se_literal)
        << ",folds_used=" << curve.n_effective << '\n';
}

}  // namespace lolo
