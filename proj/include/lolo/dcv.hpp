#pragma once
// Leave-one-level-out double cross-validation: an outer loop holding out whole
// levels, inner cross-validation for the penalty, debiased refits and
// hold-out prediction, with presence tracking across outer folds.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lolo/cv.hpp"
#include "lolo/features.hpp"
#include "lolo/glm.hpp"
#include "lolo/lasso.hpp"
#include "lolo/metrics.hpp"

namespace lolo {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

struct DcvConfig {
    std::string outer_key;         // empty: "village", else the first fixed-effect-group variable
    std::size_t outer_folds = 0;   // 0: one fold per level
    std::string inner_key;         // empty: same as outer; "none": random row folds
    std::size_t inner_folds = 0;   // 0: min(9, levels present in E_A)
    std::size_t grid_count = 100;
    double grid_min_ratio = 0.0;   // 0: default_min_ratio(n, p)
    bool interactions = true;
    double threshold = 80.0;
    std::uint64_t seed = kDefaultSeed;
    std::size_t jobs = 1;
    LassoOptions lasso;
};

/// Outer level key after applying the defaults; throws InputError if none fits.
std::string resolve_outer_key(const Dataset& data, const DcvConfig& config);

struct RuleOutcome {
    double lambda = 0.0;
    std::size_t lambda_index = 0;
    std::vector<std::string> active;      // group names, design order
    Coefficients debiased;                // original frame, E_A design columns
    std::vector<std::string> dropped;     // dependent columns left out of the refit
    std::vector<double> predictions;      // aligned with OuterFold::test_rows
};

struct OuterFold {
    std::size_t index = 0;
    std::string label;
    std::vector<std::size_t> test_rows;
    bool failed = false;
    std::string failure;
    double fallback_mean = 0.0;  // exp(ln ybar) on E_A
    CvCurve curve;
    std::vector<std::string> columns;          // E_A design column names
    std::vector<std::string> column_groups;    // group name per column
    std::vector<Standardization> scaling;      // E_A standardization constants
    RuleOutcome at_min;
    RuleOutcome at_1se;

    const RuleOutcome& outcome(LambdaRule rule) const { return rule == LambdaRule::min ? at_min : at_1se; }
};

struct DcvResult {
    DcvConfig config;
    Scenario scenario = Scenario::original;
    std::string outer_key;
    FoldPlan outer;
    std::vector<OuterFold> folds;
    std::vector<double> y;
    std::vector<double> yhat_min;
    std::vector<double> yhat_1se;
    std::vector<std::size_t> fold_of_row;
    PresenceMatrix presence;

    const std::vector<double>& predictions(LambdaRule rule) const {
        return rule == LambdaRule::min ? yhat_min : yhat_1se;
    }
};

/// Outer fold plan for `data` under `config` (level key, fold count, seed).
FoldPlan outer_folds(const Dataset& data, const DcvConfig& config);

/// Largest log-rate change a refit coefficient may produce across its
/// column's observed range before it is treated as diverging.
inline constexpr double kDivergenceSpread = 15.0;

/// Unpenalized refit on the columns of `active` groups, returned in the
/// original frame. Dependent and diverging (separated) columns are dropped
/// and reported.
FitResult debias_refit(const DesignMatrix& design, std::span<const double> y,
                       std::span<const std::string> active, const IrlsOptions& options = {});

/// One outer step: everything estimated from E_A (all rows outside fold k),
/// then predictions for the held-out rows. Failures inside the step are
/// recorded on the fold, which then predicts the E_A mean.
OuterFold fit_outer_fold(const Dataset& data, Scenario scenario, const DcvConfig& config, const FoldPlan& outer,
                         std::size_t k, std::size_t inner_jobs = 1);

DcvResult run_lolo_dcv(const Dataset& data, Scenario scenario, const DcvConfig& config = {});

/// Hold-out predictions from unpenalized fits on the named groups, refit in
/// each outer fold with the same E_A-only preprocessing. Groups missing from
/// a fold's design are skipped there.
std::vector<double> refit_predictions(const Dataset& data, Scenario scenario, const FoldPlan& outer,
                                      std::span<const std::string> groups, bool interactions, std::size_t jobs = 1);

/// Hold-out predictions of the intercept-only model: each fold predicts its E_A mean.
std::vector<double> intercept_only_predictions(std::span<const double> y, const FoldPlan& outer);

/// The four rows of the summary table: LOLO-DCV and frequent-variable refits,
/// each at lambda_min and lambda_1se.
std::vector<QualityReport> dcv_reports(const Dataset& data, const DcvResult& result);

/// predictions.csv, presence_lambda_min.csv, presence_lambda_1se.csv,
/// folds.csv, curves.csv, coefficients.csv and config.txt under `dir`. Each
/// file is written to a temporary name first and renamed into place.
void write_dcv_result(const std::filesystem::path& dir, const DcvResult& result);

std::string describe_config(const DcvConfig& config, Scenario scenario, std::string_view outer_key);

}  // namespace lolo
