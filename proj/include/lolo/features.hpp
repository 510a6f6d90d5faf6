#pragma once
// Survey ingestion and design-matrix construction: schema parsing, CSV
// loading, quantile recoding, dummy coding, standardization and pairwise
// interaction expansion.

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lolo {

enum class VariableKind { nominal, discrete, continuous };
enum class VariableRole { response, explanatory, level_key, fixed_effect_group };

struct VariableSpec {
    std::string name;
    VariableKind kind = VariableKind::continuous;
    VariableRole role = VariableRole::explanatory;
    std::vector<std::string> levels;  // nominal only, first is the reference
    std::optional<int> recode_bins;   // quantile classes for recoded scenarios
    std::vector<double> bin_edges;    // upper edges of bins 1..k-1 once recoded

    bool is_numeric() const { return kind != VariableKind::nominal; }
};

using Schema = std::vector<VariableSpec>;

/// Schema text: one record per line, `name,kind,role[,levels[,recode]]`.
/// kind is nominal|discrete|continuous, role is
/// response|explanatory|level-key|fixed-effect-group, levels are separated
/// by '|'. Blank lines and lines starting with '#' are skipped.
Schema parse_schema(std::istream& in);
Schema load_schema(const std::filesystem::path& path);
void write_schema(std::ostream& out, const Schema& schema);
/// Throws InputError if any schema invariant is violated.
void validate_schema(const Schema& schema);

std::string_view to_string(VariableKind kind);
std::string_view to_string(VariableRole role);

/// Column storage for one variable. Exactly one of the vectors is filled.
struct Column {
    std::vector<double> numeric;
    std::vector<int> level;  // index into VariableSpec::levels
};

struct Dataset {
    Schema schema;
    std::vector<Column> columns;  // aligned with schema
    std::size_t n = 0;

    std::size_t index_of(std::string_view name) const;  // throws InputError
    std::optional<std::size_t> find(std::string_view name) const;
    const VariableSpec& spec(std::string_view name) const;
    const Column& column(std::string_view name) const;
    std::size_t response_index() const;
    std::vector<double> response() const;
    Dataset subset(std::span<const std::size_t> rows) const;
};

/// Parse comma-separated text with a header row against `schema`.
Dataset load_dataset(std::istream& in, const Schema& schema);
Dataset load_dataset(const std::filesystem::path& path, const Schema& schema);
void write_dataset(std::ostream& out, const Dataset& data);

/// Replace a numeric variable by a nominal one with `bins` nearest-rank
/// quantile classes Q1..Qk. Values equal to an edge fall in the lower bin.
Dataset recode_quartiles(const Dataset& data, std::string_view variable, int bins);

/// Bin index (0-based) of `value` given upper edges of bins 1..k-1.
int quantile_bin(double value, std::span<const double> edges);

enum class Scenario { original, original_village, recoded, recoded_village };

Scenario parse_scenario(std::string_view text);  // throws InputError
std::string_view to_string(Scenario scenario);
bool uses_village(Scenario scenario);
bool uses_recoding(Scenario scenario);

/// Recode every variable that carries `recode_bins` (recoded scenarios only),
/// estimating bin edges from `data`. Already-recoded variables are left alone.
Dataset prepare_scenario(const Dataset& data, Scenario scenario);

/// Apply the bin edges recorded in `fitted` (output of prepare_scenario on a
/// training set) to another dataset with the original schema.
Dataset apply_recoding(const Dataset& data, const Schema& fitted);

/// One factor of a design column: a numeric value, or the indicator of a
/// nominal level (matched by label).
struct Factor {
    std::string variable;
    std::optional<std::string> level;
};

/// A design column is the product of one (main effect) or two (interaction)
/// factors.
struct ColumnRecipe {
    std::string name;
    std::vector<Factor> factors;
};

struct Standardization {
    double center = 0.0;
    double scale = 1.0;
};

struct Group {
    std::string name;                    // "Season" or "Season:Rainfall"
    std::vector<std::string> variables;  // one or two source variables
    std::size_t first = 0;               // first column of the block
    std::size_t count = 0;               // contiguous block length

    bool is_interaction() const { return variables.size() == 2; }
};

/// Standardized n x p design. The intercept is implicit.
struct DesignMatrix {
    Eigen::MatrixXd values;  // standardized columns
    Eigen::MatrixXd raw;     // same columns before standardization
    std::vector<Group> groups;
    std::vector<ColumnRecipe> columns;
    std::vector<Standardization> scaling;
    std::vector<std::string> dropped;  // constant columns removed while building

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
    std::size_t group_of(std::size_t column) const;
    std::optional<std::size_t> find_group(std::string_view name) const;
    std::size_t main_effect_count() const;
};

/// Center to mean 0 and scale to unit sample standard deviation in place.
/// A constant column is only centered (scale 1); callers drop those first.
std::vector<Standardization> standardize_columns(Eigen::MatrixXd& m);

/// Main-effect design for a scenario: dummy blocks (reference = first declared
/// level) for nominal variables, passthrough numeric columns, then
/// standardization. Recodes first if the scenario calls for it.
DesignMatrix encode_design(const Dataset& data, Scenario scenario);

/// Append one interaction group per unordered pair of main-effect groups.
DesignMatrix expand_interactions(const DesignMatrix& design);

/// Evaluate `reference`'s column recipes on another dataset (already recoded
/// with the reference's edges) and standardize with the reference's constants.
DesignMatrix encode_like(const DesignMatrix& reference, const Dataset& data);

/// Row subset of a design; scaling and groups are kept as-is.
DesignMatrix select_rows(const DesignMatrix& design, std::span<const std::size_t> rows);

void write_design(std::ostream& out, const DesignMatrix& design);
void write_group_map(std::ostream& out, const DesignMatrix& design);

}  // namespace lolo
