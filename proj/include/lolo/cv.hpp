#pragma once
// Level-aware fold construction and K-fold cross-validation of lasso paths.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lolo/features.hpp"
#include "lolo/lasso.hpp"

namespace lolo {

struct FoldPlan {
    std::vector<std::size_t> assignment;  // fold index per observation
    std::size_t folds = 0;
    std::optional<std::string> level_key;
    std::uint64_t seed = 0;
    std::vector<std::string> labels;  // levels held out by each fold, '|'-joined

    std::vector<std::size_t> members(std::size_t fold) const;
    std::vector<std::size_t> complement(std::size_t fold) const;
};

/// With a level key, whole levels go to folds: one level per fold when
/// `folds` equals the number of observed levels (in declaration order),
/// otherwise levels are shuffled by `seed` and dealt round-robin. Without a
/// key, rows are shuffled and dealt round-robin.
FoldPlan build_folds(const Dataset& data, const std::optional<std::string>& level_key,
                     std::size_t folds, std::uint64_t seed);

/// Number of distinct observed values of a nominal variable.
std::size_t distinct_levels(const Dataset& data, std::string_view variable);

struct LambdaSelection {
    std::size_t index_min = 0;
    std::size_t index_1se = 0;
    std::size_t index_1se_literal = 0;  // argmin(score + se), kept for comparison
    double lambda_min = 0.0;
    double lambda_1se = 0.0;
    double lambda_1se_literal = 0.0;
};

/// lambda_min minimizes the mean score; lambda_1se is the largest lambda whose
/// score is within one standard error of that minimum. Ties go to the larger
/// lambda. Non-finite scores are ignored. `grid` must be decreasing.
LambdaSelection select_lambda(std::span<const double> grid, std::span<const double> mean_score,
                              std::span<const double> score_se);

struct CvCurve {
    LambdaGrid grid;
    std::vector<double> mean_score;  // mean held-out deviance per observation
    std::vector<double> score_se;    // across-fold standard error
    std::vector<std::vector<double>> fold_scores;  // [fold][lambda]; empty if skipped
    std::vector<std::size_t> n_active;             // from the full-data path, when fitted
    std::size_t n_effective = 0;
    LambdaSelection selection;

    double lambda_min() const { return selection.lambda_min; }
    double lambda_1se() const { return selection.lambda_1se; }
};

struct CvOptions {
    LassoOptions lasso;
    std::size_t jobs = 1;
};

/// Held-out deviance curve over `grid` (shared by all folds). Folds whose
/// training response is identically zero are skipped with a warning.
CvCurve cv_curve(const DesignMatrix& design, std::span<const double> y, const FoldPlan& folds,
                 const LambdaGrid& grid, const CvOptions& options = {});

struct CvFit {
    CvCurve curve;
    LassoPath path;  // full-data path on the same grid
};

/// cv_curve plus the full-data path, which also fills curve.n_active.
CvFit cross_validate(const DesignMatrix& design, std::span<const double> y, const FoldPlan& folds,
                     const LambdaGrid& grid, const CvOptions& options = {});

/// lambda,mean_score,score_se,n_active per row, then a footer record with
/// the selected lambdas.
void write_curve(std::ostream& out, const CvCurve& curve);

}  // namespace lolo
