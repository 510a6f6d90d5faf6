// lolo-dcv: command-line driver for the LOLO-DCV pipeline.
//
// Exit status: 0 success, 2 input or configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "lolo/baseline.hpp"
#include "lolo/cv.hpp"
#include "lolo/dcv.hpp"
#include "lolo/error.hpp"
#include "lolo/features.hpp"
#include "lolo/io.hpp"
#include "lolo/lasso.hpp"
#include "lolo/log.hpp"
#include "lolo/metrics.hpp"
#include "lolo/synth.hpp"
#include "lolo/text.hpp"

namespace fs = std::filesystem;
using namespace lolo;

namespace {

struct RunConfig {
    std::string input;
    std::string schema;
    std::string scenario = "original";
    std::string level_key;
    std::size_t folds = 0;
    std::string inner_level_key;
    std::size_t inner_folds = 0;
    std::size_t grid_count = 100;
    double grid_min_ratio = 0.0;
    double threshold = 80.0;
    std::uint64_t seed = kDefaultSeed;
    std::size_t jobs = 0;
    std::string out;
    bool no_interactions = false;
    std::string format = "aligned";
    // baseline
    double alpha = 0.05;
    std::vector<std::string> whitelist;
    // synth
    std::size_t levels = 9;
    std::size_t houses = 4;
    std::size_t surveys = 8;
    std::string truth = "X3=0.5,X7=0.5,X3:X7=0.3";
    double intercept = 0.7;
    double level_sd = 0.0;
};

void require(const std::string& value, std::string_view flag) {
    if (value.empty()) throw InputError(fmt::format("{} is required", flag));
}

Dataset load_input(const RunConfig& rc) {
    require(rc.input, "--input");
    require(rc.schema, "--schema");
    if (!fs::exists(rc.input)) throw InputError(fmt::format("input '{}' does not exist", rc.input));
    if (!fs::exists(rc.schema)) throw InputError(fmt::format("schema '{}' does not exist", rc.schema));
    const Schema schema = load_schema(rc.schema);
    return load_dataset(fs::path(rc.input), schema);
}

DcvConfig dcv_config(const RunConfig& rc) {
    DcvConfig c;
    c.outer_key = rc.level_key;
    c.outer_folds = rc.folds;
    c.inner_key = rc.inner_level_key;
    c.inner_folds = rc.inner_folds;
    c.grid_count = rc.grid_count;
    c.grid_min_ratio = rc.grid_min_ratio;
    c.interactions = !rc.no_interactions;
    c.threshold = rc.threshold;
    c.seed = rc.seed;
    c.jobs = rc.jobs;
    return c;
}

TableStyle table_style(const RunConfig& rc) {
    if (rc.format == "aligned") return TableStyle::aligned;
    if (rc.format == "delimited" || rc.format == "csv") return TableStyle::delimited;
    throw InputError(fmt::format("unknown table format '{}'", rc.format));
}

void write_tables(const RunConfig& rc, const std::vector<QualityReport>& reports, const std::string& stem) {
    std::cout << emit_summary_table(reports, table_style(rc), true);
    if (rc.out.empty()) return;
    fs::create_directories(rc.out);
    io::write_atomic(fs::path(rc.out) / (stem + ".csv"), emit_summary_table(reports, TableStyle::delimited, true));
    io::write_atomic(fs::path(rc.out) / (stem + ".txt"), emit_summary_table(reports, TableStyle::aligned, true));
}

int cmd_expand(const RunConfig& rc) {
    const Dataset data = load_input(rc);
    const Scenario scenario = parse_scenario(rc.scenario);
    DesignMatrix design = encode_design(data, scenario);
    if (!rc.no_interactions && design.main_effect_count() >= 2) design = expand_interactions(design);
    if (!rc.out.empty()) {
        fs::create_directories(rc.out);
        std::ostringstream d, g;
        write_design(d, design);
        write_group_map(g, design);
        io::write_atomic(fs::path(rc.out) / "design.csv", d.str());
        io::write_atomic(fs::path(rc.out) / "groups.csv", g.str());
    }
    std::cout << fmt::format("{} groups, {} columns\n", design.groups.size(), design.cols());
    return 0;
}

int cmd_dcv(const RunConfig& rc) {
    const Dataset data = load_input(rc);
    const Scenario scenario = parse_scenario(rc.scenario);
    DcvConfig config = dcv_config(rc);
    if (config.jobs == 0) config.jobs = outer_folds(data, config).folds;
    const DcvResult result = run_lolo_dcv(data, scenario, config);
    const std::vector<QualityReport> reports = dcv_reports(data, result);
    if (!rc.out.empty()) {
        write_dcv_result(rc.out, result);
        for (LambdaRule rule : {LambdaRule::min, LambdaRule::one_se})
            io::write_atomic(fs::path(rc.out) / fmt::format("frequency_{}.csv", to_string(rule)),
                             emit_frequency_plot_data(result.presence, rule));
    }
    write_tables(rc, reports, "summary");
    for (LambdaRule rule : {LambdaRule::min, LambdaRule::one_se}) {
        const FrequentVariableSet set = frequent_variables(result.presence, rule, config.threshold);
        std::cout << fmt::format("frequent variables ({}, s={}): ", to_string(rule), text::format_double(config.threshold));
        for (std::size_t i = 0; i < set.members.size(); ++i) std::cout << (i ? " " : "") << set.members[i];
        std::cout << '\n';
    }
    return 0;
}

int cmd_baseline(const RunConfig& rc) {
    const Dataset data = load_input(rc);
    const Scenario scenario = parse_scenario(rc.scenario);
    BaselineConfig config;
    config.alpha = rc.alpha;
    if (!rc.whitelist.empty()) config.interactions = rc.whitelist;
    config.outer_key = rc.level_key;
    config.jobs = rc.jobs == 0 ? 1 : rc.jobs;
    const BaselineResult result = backward_glm_baseline(data, scenario, config);
    const std::vector<double> y = data.response();
    const std::vector<QualityReport> reports = {
        quality_summary(y, result.predictions, holdout_deviance(y, result.predictions), "B-GLM")};
    if (!rc.out.empty()) {
        fs::create_directories(rc.out);
        std::string sel = "step,term,statistic,df,p_value\n";
        for (std::size_t i = 0; i < result.eliminated.size(); ++i) {
            const Elimination& e = result.eliminated[i];
            sel += fmt::format("{},{},{},{},{}\n", i + 1, e.term, text::format_double(e.statistic), e.df,
                               text::format_double(e.p_value));
        }
        std::string pred = "row,y,yhat,fold\n";
        for (std::size_t i = 0; i < y.size(); ++i)
            pred += fmt::format("{},{},{},{}\n", i + 1, text::format_double(y[i]),
                                text::format_double(result.predictions[i]),
                                result.outer.labels[result.outer.assignment[i]]);
        std::string terms;
        for (const std::string& t : result.selected) terms += t + '\n';
        io::write_atomic(fs::path(rc.out) / "baseline_eliminations.csv", sel);
        io::write_atomic(fs::path(rc.out) / "baseline_predictions.csv", pred);
        io::write_atomic(fs::path(rc.out) / "baseline_terms.txt", terms);
    }
    write_tables(rc, reports, "baseline_summary");
    std::cout << "selected terms:";
    for (const std::string& t : result.selected) std::cout << ' ' << t;
    std::cout << '\n';
    return 0;
}

int cmd_cv(const RunConfig& rc) {
    const Dataset data = load_input(rc);
    const Scenario scenario = parse_scenario(rc.scenario);
    const Dataset prepared = prepare_scenario(data, scenario);
    DesignMatrix design = encode_design(prepared, scenario);
    if (!rc.no_interactions && design.main_effect_count() >= 2) design = expand_interactions(design);
    const std::vector<double> y = prepared.response();
    const double ratio = rc.grid_min_ratio > 0 ? rc.grid_min_ratio : default_min_ratio(design.rows(), design.cols());
    const LambdaGrid grid = build_grid(lambda_max(design.values, y), rc.grid_count, ratio);
    std::optional<std::string> key;
    if (!rc.level_key.empty() && rc.level_key != "none") key = rc.level_key;
    std::size_t n_folds = rc.folds;
    if (n_folds == 0) n_folds = std::min<std::size_t>(9, key ? distinct_levels(prepared, *key) : prepared.n);
    const FoldPlan folds = build_folds(prepared, key, n_folds, rc.seed);
    const CvFit fit = cross_validate(design, y, folds, grid, CvOptions{{}, rc.jobs == 0 ? folds.folds : rc.jobs});
    std::ostringstream curve, path;
    write_curve(curve, fit.curve);
    write_path(path, design, fit.path);
    if (!rc.out.empty()) {
        fs::create_directories(rc.out);
        io::write_atomic(fs::path(rc.out) / "curve.csv", curve.str());
        io::write_atomic(fs::path(rc.out) / "path.csv", path.str());
    }
    std::cout << fmt::format("lambda_min={} lambda_1se={} folds_used={}\n",
                             text::format_double(fit.curve.lambda_min()), text::format_double(fit.curve.lambda_1se()),
                             fit.curve.n_effective);
    return 0;
}

int cmd_synth(const RunConfig& rc) {
    require(rc.out, "--out");
    SynthConfig config;
    config.levels = rc.levels;
    config.houses = rc.houses;
    config.surveys = rc.surveys;
    config.truth = parse_truth(rc.truth);
    config.intercept = rc.intercept;
    config.level_sd = rc.level_sd;
    config.seed = rc.seed;
    const SynthData synth = synthesize(config);
    write_synth(rc.out, synth);
    std::cout << fmt::format("{} observations written to {}\n", synth.data.n, rc.out);
    return 0;
}

// Recompute the summary table and frequency data from a dcv output directory.
int cmd_report(const RunConfig& rc) {
    require(rc.input, "--input");
    const fs::path dir = rc.input;
    std::istringstream in(io::read_file(dir / "predictions.csv"));
    std::string line;
    std::getline(in, line);
    const std::vector<std::string> header = text::split_record(line);
    std::vector<std::size_t> yhat_cols;
    std::size_t y_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "y") y_col = c;
        if (header[c].rfind("yhat", 0) == 0) yhat_cols.push_back(c);
    }
    if (y_col == header.size() || yhat_cols.empty())
        throw InputError("predictions.csv needs a y column and at least one yhat column");
    std::vector<double> y;
    std::vector<std::vector<double>> yhat(yhat_cols.size());
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        const std::vector<std::string> f = text::split_record(line);
        const auto parse = [&](std::size_t c) {
            const auto v = c < f.size() ? text::parse_double(f[c]) : std::nullopt;
            if (!v) throw InputError(fmt::format("bad predictions record '{}'", line));
            return *v;
        };
        y.push_back(parse(y_col));
        for (std::size_t k = 0; k < yhat_cols.size(); ++k) yhat[k].push_back(parse(yhat_cols[k]));
    }
    std::vector<QualityReport> reports;
    for (std::size_t k = 0; k < yhat_cols.size(); ++k) {
        std::string label = header[yhat_cols[k]];
        if (label.rfind("yhat_", 0) == 0) label = "LOLO DCV " + label.substr(5);
        reports.push_back(quality_summary(y, yhat[k], holdout_deviance(y, yhat[k]), label));
    }
    std::cout << emit_summary_table(reports, table_style(rc), true);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LOLO-DCV: lasso Poisson regression with leave-one-level-out double cross-validation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key=value file; command-line flags take precedence");

    RunConfig rc;
    app.add_option("--input", rc.input, "data file (csv), or a dcv output directory for report");
    app.add_option("--schema", rc.schema, "schema file");
    app.add_option("--scenario", rc.scenario, "original, original-village, recoded or recoded-village");
    app.add_option("--level-key", rc.level_key, "outer level key (default village)");
    app.add_option("--folds", rc.folds, "outer fold count (default one per level)");
    app.add_option("--inner-level-key", rc.inner_level_key, "inner level key (default: outer key; 'none' for rows)");
    app.add_option("--inner-folds", rc.inner_folds, "inner fold count (default min(9, levels))");
    app.add_option("--grid-count", rc.grid_count, "lambda grid size");
    app.add_option("--grid-min-ratio", rc.grid_min_ratio, "smallest lambda / lambda_max (default by n and p)");
    app.add_option("--threshold", rc.threshold, "frequent-variable threshold s in percent");
    app.add_option("--seed", rc.seed, "random seed");
    app.add_option("--jobs", rc.jobs, "worker threads (default: one per outer fold)");
    app.add_option("--out", rc.out, "output directory");
    app.add_flag("--no-interactions", rc.no_interactions, "main effects only");
    app.add_option("--format", rc.format, "table style: aligned or delimited");
    app.add_option("--alpha", rc.alpha, "baseline elimination level");
    app.add_option("--interaction", rc.whitelist, "baseline interaction A:B (repeatable)");
    app.add_option("--levels", rc.levels, "synth: villages");
    app.add_option("--houses", rc.houses, "synth: houses per village");
    app.add_option("--surveys", rc.surveys, "synth: surveys per house");
    app.add_option("--truth", rc.truth, "synth: true effects, e.g. X3=0.5,X7=0.5,X3:X7=0.3");
    app.add_option("--intercept", rc.intercept, "synth: log baseline rate");
    app.add_option("--level-sd", rc.level_sd, "synth: village random-shift sd");

    auto* expand = app.add_subcommand("expand", "build the design matrix and group map");
    auto* dcv = app.add_subcommand("dcv", "run LOLO-DCV and report");
    auto* baseline = app.add_subcommand("baseline", "backward-elimination GLM reference");
    auto* cv = app.add_subcommand("cv", "single cross-validated lasso path");
    auto* synth = app.add_subcommand("synth", "generate synthetic survey data");
    auto* report = app.add_subcommand("report", "summary table from a dcv output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*expand) return cmd_expand(rc);
        if (*dcv) return cmd_dcv(rc);
        if (*baseline) return cmd_baseline(rc);
        if (*cv) return cmd_cv(rc);
        if (*synth) return cmd_synth(rc);
        if (*report) return cmd_report(rc);
    } catch (const InputError& e) {
        log().error("{}", e.what());
        return 2;
    } catch (const NumericalError& e) {
        log().error("{}", e.what());
        return 3;
    } catch (const fs::filesystem_error& e) {
        log().error("{}", e.what());
        return 2;
    }
    return 2;
}
