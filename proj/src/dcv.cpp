#include "lolo/dcv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lolo/error.hpp"
#include "lolo/io.hpp"
#include "lolo/log.hpp"
#include "lolo/parallel.hpp"
#include "lolo/text.hpp"

namespace lolo {
namespace {

struct FoldDesign {
    Dataset train;
    DesignMatrix design;
    DesignMatrix test_design;
    std::vector<double> y_train;
};

DesignMatrix main_and_interactions(const Dataset& prepared, Scenario scenario, bool interactions) {
    DesignMatrix d = encode_design(prepared, scenario);
    if (interactions && d.main_effect_count() >= 2) return expand_interactions(d);
    return d;
}

// Recoding edges, design recipes and standardization all come from the
// training rows; the held-out rows only pass through them.
FoldDesign build_fold_design(const Dataset& data, Scenario scenario, bool interactions,
                             std::span<const std::size_t> train_rows, std::span<const std::size_t> test_rows) {
    FoldDesign fd;
    fd.train = prepare_scenario(data.subset(train_rows), scenario);
    const Dataset test = apply_recoding(data.subset(test_rows), fd.train.schema);
    fd.design = main_and_interactions(fd.train, scenario, interactions);
    fd.test_design = encode_like(fd.design, test);
    fd.y_train = fd.train.response();
    return fd;
}

double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<std::string> group_names(const DesignMatrix& design, std::span<const std::size_t> groups) {
    std::vector<std::string> out;
    for (std::size_t g : groups) out.push_back(design.groups[g].name);
    return out;
}

std::string join(std::span<const std::string> items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::optional<std::string> inner_key_for(const DcvConfig& config, const std::string& outer_key) {
    if (config.inner_key == "none") return std::nullopt;
    return config.inner_key.empty() ? outer_key : config.inner_key;
}

void fill_rule(RuleOutcome& out, LambdaRule rule, const FoldDesign& fd, const CvFit& cv,
               const LassoOptions& lasso) {
    const LambdaSelection& sel = cv.curve.selection;
    out.lambda_index = rule == LambdaRule::min ? sel.index_min : sel.index_1se;
    out.lambda = cv.curve.grid.values[out.lambda_index];
    Coefficients beta;
    if (out.lambda_index < cv.path.coefficients.size()) {
        beta = cv.path.coefficients[out.lambda_index];
    } else {
        const Coefficients* warm = cv.path.coefficients.empty() ? nullptr : &cv.path.coefficients.back();
        beta = fit_penalized(fd.design.values, fd.y_train, out.lambda, warm, lasso).coefficients;
    }
    out.active = group_names(fd.design, active_groups(fd.design, beta.beta));
    const FitResult refit = debias_refit(fd.design, fd.y_train, out.active);
    out.debiased = refit.coefficients;
    for (std::size_t j : refit.dropped_columns) out.dropped.push_back(fd.design.columns[j].name);
    out.predictions = predict_mu(out.debiased, fd.test_design);
}

void fall_back(OuterFold& fold, std::string message) {
    fold.failed = true;
    fold.failure = std::move(message);
    log().warn("outer fold {} ({}) failed, predicting the training mean: {}", fold.index, fold.label, fold.failure);
    for (RuleOutcome* r : {&fold.at_min, &fold.at_1se}) {
        r->active.clear();
        r->dropped.clear();
        r->debiased = Coefficients{std::log(fold.fallback_mean), Eigen::VectorXd(), Frame::original};
        r->predictions.assign(fold.test_rows.size(), fold.fallback_mean);
    }
}

}  // namespace

std::string resolve_outer_key(const Dataset& data, const DcvConfig& config) {
    std::string key = config.outer_key;
    if (key.empty()) {
        if (data.find("village")) {
            key = "village";
        } else {
            for (const VariableSpec& v : data.schema)
                if (v.role == VariableRole::fixed_effect_group) {
                    key = v.name;
                    break;
                }
        }
    }
    if (key.empty()) throw InputError("no outer level key given and no village/fixed-effect-group variable found");
    if (!data.find(key)) throw InputError(fmt::format("outer level key '{}' is not in the dataset", key));
    if (data.spec(key).is_numeric()) throw InputError(fmt::format("outer level key '{}' must be nominal", key));
    return key;
}

FoldPlan outer_folds(const Dataset& data, const DcvConfig& config) {
    const std::string key = resolve_outer_key(data, config);
    const std::size_t levels = distinct_levels(data, key);
    if (levels < 3) throw InputError(fmt::format("outer level key '{}' has {} levels, need at least 3", key, levels));
    const std::size_t n = config.outer_folds == 0 ? levels : config.outer_folds;
    return build_folds(data, key, n, config.seed);
}

FitResult debias_refit(const DesignMatrix& design, std::span<const double> y, std::span<const std::string> active,
                       const IrlsOptions& options) {
    std::vector<std::size_t> columns;
    for (const std::string& name : active) {
        const auto g = design.find_group(name);
        if (!g) throw InputError(fmt::format("active group '{}' is not in the design", name));
        for (std::size_t c = 0; c < design.groups[*g].count; ++c) columns.push_back(design.groups[*g].first + c);
    }
    std::sort(columns.begin(), columns.end());
    std::vector<std::size_t> diverged;
    FitResult fit = fit_irls(design, y, std::span<const std::size_t>(columns), options);
    // Under (quasi-)separation the MLE is at infinity and IRLS stops wherever
    // the deviance flattens. Such directions are dropped one at a time.
    while (true) {
        std::size_t worst = columns.size();
        double worst_spread = kDivergenceSpread;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto j = static_cast<Eigen::Index>(columns[c]);
            const auto col = design.values.col(j);
            const double spread = std::abs(fit.coefficients.beta(j)) * (col.maxCoeff() - col.minCoeff());
            if (spread > worst_spread) {
                worst_spread = spread;
                worst = c;
            }
        }
        if (worst == columns.size()) break;
        log().info("debias refit: '{}' diverges (log-rate spread {:.3g}), dropped", design.columns[columns[worst]].name,
                   worst_spread);
        diverged.push_back(columns[worst]);
        columns.erase(columns.begin() + static_cast<std::ptrdiff_t>(worst));
        fit = fit_irls(design, y, std::span<const std::size_t>(columns), options);
    }
    fit.dropped_columns.insert(fit.dropped_columns.end(), diverged.begin(), diverged.end());
    std::sort(fit.dropped_columns.begin(), fit.dropped_columns.end());
    if (!fit.dropped_columns.empty())
        log().info("debias refit dropped {} column(s)", fit.dropped_columns.size());
    fit.coefficients = to_original(fit.coefficients, design.scaling);
    return fit;
}

OuterFold fit_outer_fold(const Dataset& data, Scenario scenario, const DcvConfig& config, const FoldPlan& outer,
                         std::size_t k, std::size_t inner_jobs) {
    OuterFold fold;
    fold.index = k;
    fold.label = k < outer.labels.size() ? outer.labels[k] : fmt::format("fold{}", k + 1);
    fold.test_rows = outer.members(k);
    const std::vector<std::size_t> train_rows = outer.complement(k);
    {
        const std::vector<double> y = data.response();
        std::vector<double> y_train;
        for (std::size_t i : train_rows) y_train.push_back(y[i]);
        fold.fallback_mean = mean_of(y_train);
    }
    try {
        const FoldDesign fd = build_fold_design(data, scenario, config.interactions, train_rows, fold.test_rows);
        fold.scaling = fd.design.scaling;
        for (std::size_t j = 0; j < fd.design.cols(); ++j) {
            fold.columns.push_back(fd.design.columns[j].name);
            fold.column_groups.push_back(fd.design.groups[fd.design.group_of(j)].name);
        }

        const double lmax = lambda_max(fd.design.values, fd.y_train);
        const double ratio = config.grid_min_ratio > 0.0 ? config.grid_min_ratio
                                                         : default_min_ratio(fd.design.rows(), fd.design.cols());
        const LambdaGrid grid = build_grid(lmax, config.grid_count, ratio);

        const std::optional<std::string> inner_key = inner_key_for(config, outer.level_key.value_or(""));
        std::size_t inner_n = config.inner_folds;
        if (inner_n == 0)
            inner_n = std::min<std::size_t>(9, inner_key ? distinct_levels(fd.train, *inner_key) : fd.train.n);
        const FoldPlan inner = build_folds(fd.train, inner_key, inner_n, config.seed + 1 + k);

        const CvFit cv = cross_validate(fd.design, fd.y_train, inner, grid, CvOptions{config.lasso, inner_jobs});
        fold.curve = cv.curve;
        fill_rule(fold.at_min, LambdaRule::min, fd, cv, config.lasso);
        fill_rule(fold.at_1se, LambdaRule::one_se, fd, cv, config.lasso);
    } catch (const NumericalError& e) {
        fall_back(fold, e.what());
    } catch (const InputError& e) {
        fall_back(fold, e.what());
    }
    return fold;
}

DcvResult run_lolo_dcv(const Dataset& data, Scenario scenario, const DcvConfig& config) {
    if (!(config.threshold >= 1.0 && config.threshold <= 100.0))
        throw InputError(fmt::format("threshold must lie in [1, 100], got {}", config.threshold));
    if (config.grid_count < 2) throw InputError("grid count must be at least 2");
    if (config.grid_min_ratio < 0.0 || config.grid_min_ratio >= 1.0)
        throw InputError(fmt::format("grid min ratio must lie in (0, 1), got {}", config.grid_min_ratio));
    if (!config.inner_key.empty() && config.inner_key != "none" && !data.find(config.inner_key))
        throw InputError(fmt::format("inner level key '{}' is not in the dataset", config.inner_key));

    DcvResult result;
    result.config = config;
    result.scenario = scenario;
    result.outer_key = resolve_outer_key(data, config);
    result.outer = outer_folds(data, config);
    result.y = data.response();

    // The full-data design fixes the presence columns (and rejects scenarios
    // that cannot be encoded before any fold work starts).
    const DesignMatrix full = main_and_interactions(prepare_scenario(data, scenario), scenario, config.interactions);

    const std::size_t k = result.outer.folds;
    const std::size_t inner_jobs = std::max<std::size_t>(1, config.jobs / k);
    result.folds.resize(k);
    parallel_for(k, config.jobs, [&](std::size_t f) {
        result.folds[f] = fit_outer_fold(data, scenario, config, result.outer, f, inner_jobs);
    });

    const std::size_t n = data.n;
    result.yhat_min.assign(n, std::nan(""));
    result.yhat_1se.assign(n, std::nan(""));
    result.fold_of_row.assign(n, k);
    for (const OuterFold& fold : result.folds) {
        for (std::size_t t = 0; t < fold.test_rows.size(); ++t) {
            const std::size_t row = fold.test_rows[t];
            if (result.fold_of_row[row] != k) throw NumericalError(fmt::format("row {} predicted twice", row));
            result.fold_of_row[row] = fold.index;
            result.yhat_min[row] = fold.at_min.predictions[t];
            result.yhat_1se[row] = fold.at_1se.predictions[t];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (result.fold_of_row[i] == k) throw NumericalError(fmt::format("row {} never held out", i));

    PresenceMatrix& pm = result.presence;
    for (const Group& g : full.groups) pm.groups.push_back(g.name);
    for (const OuterFold& fold : result.folds) {
        pm.fold_labels.push_back(fold.label);
        for (LambdaRule rule : {LambdaRule::min, LambdaRule::one_se}) {
            std::vector<std::uint8_t> row(pm.groups.size(), 0);
            for (const std::string& name : fold.outcome(rule).active) {
                const auto it = std::find(pm.groups.begin(), pm.groups.end(), name);
                if (it == pm.groups.end())
                    throw NumericalError(fmt::format("fold {} selected '{}', unknown to the full design", fold.index, name));
                row[static_cast<std::size_t>(it - pm.groups.begin())] = 1;
            }
            (rule == LambdaRule::min ? pm.at_min : pm.at_1se).push_back(std::move(row));
        }
    }
    return result;
}

std::vector<double> refit_predictions(const Dataset& data, Scenario scenario, const FoldPlan& outer,
                                      std::span<const std::string> groups, bool interactions, std::size_t jobs) {
    const std::vector<double> y = data.response();
    std::vector<double> out(data.n, std::nan(""));
    parallel_for(outer.folds, jobs, [&](std::size_t k) {
        const std::vector<std::size_t> test_rows = outer.members(k);
        const std::vector<std::size_t> train_rows = outer.complement(k);
        std::vector<double> preds;
        try {
            const FoldDesign fd = build_fold_design(data, scenario, interactions, train_rows, test_rows);
            std::vector<std::string> present;
            for (const std::string& g : groups)
                if (fd.design.find_group(g)) present.push_back(g);
            const FitResult fit = debias_refit(fd.design, fd.y_train, present);
            preds = predict_mu(fit.coefficients, fd.test_design);
        } catch (const NumericalError& e) {
            std::vector<double> y_train;
            for (std::size_t i : train_rows) y_train.push_back(y[i]);
            log().warn("refit on outer fold {} failed, predicting the training mean: {}", k, e.what());
            preds.assign(test_rows.size(), mean_of(y_train));
        }
        for (std::size_t t = 0; t < test_rows.size(); ++t) out[test_rows[t]] = preds[t];
    });
    return out;
}

std::vector<double> intercept_only_predictions(std::span<const double> y, const FoldPlan& outer) {
    if (outer.assignment.size() != y.size()) throw InputError("fold plan and response lengths differ");
    std::vector<double> out(y.size());
    for (std::size_t k = 0; k < outer.folds; ++k) {
        std::vector<double> y_train;
        for (std::size_t i : outer.complement(k)) y_train.push_back(y[i]);
        const double m = mean_of(y_train);
        for (std::size_t i : outer.members(k)) out[i] = m;
    }
    return out;
}

std::vector<QualityReport> dcv_reports(const Dataset& data, const DcvResult& result) {
    std::vector<QualityReport> reports;
    for (LambdaRule rule : {LambdaRule::min, LambdaRule::one_se}) {
        const std::vector<double>& yhat = result.predictions(rule);
        reports.push_back(quality_summary(result.y, yhat, holdout_deviance(result.y, yhat),
                                          fmt::format("LOLO DCV {}", to_string(rule))));
    }
    for (LambdaRule rule : {LambdaRule::min, LambdaRule::one_se}) {
        const FrequentVariableSet set = frequent_variables(result.presence, rule, result.config.threshold);
        const std::vector<double> yhat = refit_predictions(data, result.scenario, result.outer, set.members,
                                                           result.config.interactions, result.config.jobs);
        reports.push_back(quality_summary(result.y, yhat, holdout_deviance(result.y, yhat),
                                          fmt::format("Var freq {}", to_string(rule))));
    }
    return reports;
}

std::string describe_config(const DcvConfig& config, Scenario scenario, std::string_view outer_key) {
    std::string out;
    out += fmt::format("scenario={}\n", to_string(scenario));
    out += fmt::format("level-key={}\n", outer_key);
    out += fmt::format("folds={}\n", config.outer_folds);
    out += fmt::format("inner-level-key={}\n", config.inner_key);
    out += fmt::format("inner-folds={}\n", config.inner_folds);
    out += fmt::format("grid-count={}\n", config.grid_count);
    out += fmt::format("grid-min-ratio={}\n", text::format_double(config.grid_min_ratio));
    out += fmt::format("interactions={}\n", config.interactions ? "true" : "false");
    out += fmt::format("threshold={}\n", text::format_double(config.threshold));
    out += fmt::format("seed={}\n", config.seed);
    return out;
}

void write_dcv_result(const std::filesystem::path& dir, const DcvResult& result) {
    std::filesystem::create_directories(dir);
    const auto fmtd = [](double v) { return text::format_double(v); };

    std::string pred = "row,y,yhat_lambda_min,yhat_lambda_1se,fold,failed\n";
    for (std::size_t i = 0; i < result.y.size(); ++i) {
        const OuterFold& f = result.folds[result.fold_of_row[i]];
        pred += fmt::format("{},{},{},{},{},{}\n", i + 1, fmtd(result.y[i]), fmtd(result.yhat_min[i]),
                            fmtd(result.yhat_1se[i]), csv_field(f.label), f.failed ? 1 : 0);
    }

    std::string folds =
        "fold,label,n_test,failed,lambda_min,lambda_1se,lambda_1se_literal,score_lambda_min,se_lambda_min,"
        "score_lambda_1se,inner_folds_used,active_lambda_min,active_lambda_1se,dropped_lambda_min,"
        "dropped_lambda_1se,message\n";
    std::string curves = "fold,lambda,mean_score,score_se,n_active\n";
    std::string coefs = "fold,rule,group,column,coefficient\n";
    for (const OuterFold& f : result.folds) {
        const LambdaSelection& s = f.curve.selection;
        const bool has_curve = !f.curve.mean_score.empty();
        const auto score = [&](std::size_t i) { return has_curve ? fmtd(f.curve.mean_score[i]) : std::string(); };
        const auto se = [&](std::size_t i) { return has_curve ? fmtd(f.curve.score_se[i]) : std::string(); };
        folds += fmt::format(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", f.index, csv_field(f.label), f.test_rows.size(),
            f.failed ? 1 : 0, has_curve ? fmtd(s.lambda_min) : "", has_curve ? fmtd(s.lambda_1se) : "",
            has_curve ? fmtd(s.lambda_1se_literal) : "", score(s.index_min), se(s.index_min), score(s.index_1se),
            f.curve.n_effective, csv_field(join(f.at_min.active, '|')), csv_field(join(f.at_1se.active, '|')),
            csv_field(join(f.at_min.dropped, '|')), csv_field(join(f.at_1se.dropped, '|')), csv_field(f.failure));
        for (std::size_t i = 0; i < f.curve.mean_score.size(); ++i) {
            curves += fmt::format("{},{},{},{},{}\n", f.index, fmtd(f.curve.grid.values[i]),
                                  fmtd(f.curve.mean_score[i]), fmtd(f.curve.score_se[i]),
                                  i < f.curve.n_active.size() ? fmt::format("{}", f.curve.n_active[i]) : "");
        }
        for (LambdaRule rule : {LambdaRule::min, LambdaRule::one_se}) {
            const RuleOutcome& r = f.outcome(rule);
            coefs += fmt::format("{},{},(Intercept),(Intercept),{}\n", f.index, to_string(rule),
                                 fmtd(r.debiased.intercept));
            for (Eigen::Index j = 0; j < r.debiased.beta.size(); ++j) {
                if (r.debiased.beta[j] == 0.0) continue;
                const auto& name = f.columns[static_cast<std::size_t>(j)];
                const auto& group = f.column_groups[static_cast<std::size_t>(j)];
                coefs += fmt::format("{},{},{},{},{}\n", f.index, to_string(rule), csv_field(group), csv_field(name),
                                     fmtd(r.debiased.beta[j]));
            }
        }
    }

    std::string presence[2];
    for (LambdaRule rule : {LambdaRule::min, LambdaRule::one_se}) {
        std::string& out = presence[rule == LambdaRule::min ? 0 : 1];
        out = "fold,label";
        for (const std::string& g : result.presence.groups) out += "," + csv_field(g);
        out += '\n';
        const auto& rows = result.presence.rows(rule);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out += fmt::format("{},{}", r, csv_field(result.presence.fold_labels[r]));
            for (std::uint8_t v : rows[r]) out += v ? ",1" : ",0";
            out += '\n';
        }
    }

    io::write_atomic(dir / "predictions.csv", pred);
    io::write_atomic(dir / "folds.csv", folds);
    io::write_atomic(dir / "curves.csv", curves);
    io::write_atomic(dir / "coefficients.csv", coefs);
    io::write_atomic(dir / "presence_lambda_min.csv", presence[0]);
    io::write_atomic(dir / "presence_lambda_1se.csv", presence[1]);
    io::write_atomic(dir / "config.txt", describe_config(result.config, result.scenario, result.outer_key));
}

}  // namespace lolo
