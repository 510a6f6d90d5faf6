#pragma once
// Prediction-quality criteria, presence frequencies and summary tables.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lolo {

enum class LambdaRule { min, one_se };

std::string_view to_string(LambdaRule rule);  // "lambda_min" / "lambda_1se"

/// Per outer fold (row) and design group (column): 1 when the group's block
/// is nonzero at the selected lambda. One matrix per rule.
struct PresenceMatrix {
    std::vector<std::string> groups;
    std::vector<std::string> fold_labels;
    std::vector<std::vector<std::uint8_t>> at_min;
    std::vector<std::vector<std::uint8_t>> at_1se;

    const std::vector<std::vector<std::uint8_t>>& rows(LambdaRule rule) const {
        return rule == LambdaRule::min ? at_min : at_1se;
    }
};

/// 1 where |y - yhat| <= 0.5 (inclusive), else 0.
std::vector<int> prediction_accuracy(std::span<const double> y, std::span<const double> yhat);

/// 100/n times the number of accurate predictions.
double prediction_power(std::span<const double> y, std::span<const double> yhat);

/// Mean Poisson deviance per observation, with means clamped to >= 1e-12.
double holdout_deviance(std::span<const double> y, std::span<const double> yhat);

struct QualityReport {
    std::string method;
    double mean = 0.0;
    double deviance = 0.0;
    double std = 0.0;  // sqrt(deviance)
    double absolute_risk = 0.0;
    double prediction_power = 0.0;
    double quadratic_risk = 0.0;  // extra column, not one of the table criteria
};

QualityReport quality_summary(std::span<const double> y, std::span<const double> yhat, double deviance,
                              std::string label);

/// Presence percentage per group, in PresenceMatrix::groups order.
std::vector<double> presence_frequencies(const PresenceMatrix& presence, LambdaRule rule);

struct FrequentVariableSet {
    LambdaRule rule = LambdaRule::min;
    double threshold = 80.0;
    std::vector<std::string> members;  // matrix column order
    std::vector<double> frequencies;   // aligned with members
};

/// Groups whose presence percentage is >= s (1 <= s <= 100).
FrequentVariableSet frequent_variables(const PresenceMatrix& presence, LambdaRule rule, double s);

/// Half-up rounding to two decimals on the value's shortest decimal form.
double round2(double v);

enum class TableStyle { delimited, aligned };

std::string emit_summary_table(std::span<const QualityReport> reports, TableStyle style = TableStyle::delimited,
                               bool with_quadratic_risk = false);

/// Inverse of the delimited form of emit_summary_table.
std::vector<QualityReport> parse_summary_table(std::string_view table);

/// group,frequency records sorted by decreasing frequency, ties by name.
std::string emit_frequency_plot_data(const PresenceMatrix& presence, LambdaRule rule);

}  // namespace lolo
