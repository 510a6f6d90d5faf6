#include "lolo/features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "lolo/error.hpp"
#include "lolo/log.hpp"
#include "lolo/text.hpp"

namespace lolo {
namespace {

VariableKind parse_kind(std::string_view s, std::size_t line) {
    if (s == "nominal") return VariableKind::nominal;
    if (s == "discrete" || s == "numeric-discrete") return VariableKind::discrete;
    if (s == "continuous" || s == "numeric-continuous") return VariableKind::continuous;
    throw InputError(fmt::format("schema line {}: unknown kind '{}'", line, s));
}

VariableRole parse_role(std::string_view s, std::size_t line) {
    if (s == "response") return VariableRole::response;
    if (s == "explanatory") return VariableRole::explanatory;
    if (s == "level-key") return VariableRole::level_key;
    if (s == "fixed-effect-group") return VariableRole::fixed_effect_group;
    throw InputError(fmt::format("schema line {}: unknown role '{}'", line, s));
}

bool is_missing(std::string_view cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == ".";
}

std::vector<double> factor_values(const Dataset& data, const Factor& f) {
    const std::size_t idx = data.index_of(f.variable);
    const VariableSpec& spec = data.schema[idx];
    const Column& col = data.columns[idx];
    std::vector<double> out(data.n);
    if (!f.level) {
        if (!spec.is_numeric())
            throw InputError(fmt::format("variable '{}' is nominal, expected numeric", f.variable));
        std::copy(col.numeric.begin(), col.numeric.end(), out.begin());
        return out;
    }
    if (spec.is_numeric())
        throw InputError(fmt::format("variable '{}' is numeric, expected nominal", f.variable));
    const auto it = std::find(spec.levels.begin(), spec.levels.end(), *f.level);
    if (it == spec.levels.end())
        throw InputError(fmt::format("variable '{}' has no level '{}'", f.variable, *f.level));
    const int level = static_cast<int>(it - spec.levels.begin());
    for (std::size_t i = 0; i < data.n; ++i) out[i] = col.level[i] == level ? 1.0 : 0.0;
    return out;
}

std::vector<double> evaluate(const Dataset& data, const ColumnRecipe& recipe) {
    std::vector<double> out(data.n, 1.0);
    for (const Factor& f : recipe.factors) {
        const std::vector<double> v = factor_values(data, f);
        for (std::size_t i = 0; i < data.n; ++i) out[i] *= v[i];
    }
    return out;
}

bool is_constant(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() < 2) return true;
    return v.maxCoeff() == v.minCoeff();
}

// Builds a design from per-group candidate columns, dropping constant ones.
struct DesignBuilder {
    std::vector<Group> groups;
    std::vector<ColumnRecipe> recipes;
    std::vector<std::vector<double>> raw_columns;
    std::vector<std::string> dropped;

    void add_group(std::string name, std::vector<std::string> variables,
                   std::vector<ColumnRecipe> candidates,
                   std::vector<std::vector<double>> values) {
        Group g{std::move(name), std::move(variables), recipes.size(), 0};
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            Eigen::Map<const Eigen::VectorXd> v(values[c].data(),
                                                static_cast<Eigen::Index>(values[c].size()));
            if (is_constant(v)) {
                log().warn("dropping constant design column '{}'", candidates[c].name);
                dropped.push_back(candidates[c].name);
                continue;
            }
            recipes.push_back(std::move(candidates[c]));
            raw_columns.push_back(std::move(values[c]));
            ++g.count;
        }
        if (g.count == 0) {
            log().warn("dropping group '{}': every column is constant", g.name);
            return;
        }
        groups.push_back(std::move(g));
    }

    DesignMatrix finish(std::size_t n) && {
        DesignMatrix d;
        const auto p = static_cast<Eigen::Index>(recipes.size());
        d.raw.resize(static_cast<Eigen::Index>(n), p);
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index i = 0; i < d.raw.rows(); ++i)
                d.raw(i, j) = raw_columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        d.values = d.raw;
        d.scaling = standardize_columns(d.values);
        d.groups = std::move(groups);
        d.columns = std::move(recipes);
        d.dropped = std::move(dropped);
        return d;
    }
};

}  // namespace

// ---------------------------------------------------------------- schema

std::string_view to_string(VariableKind kind) {
    switch (kind) {
        case VariableKind::nominal: return "nominal";
        case VariableKind::discrete: return "discrete";
        case VariableKind::continuous: return "continuous";
    }
    return "?";
}

std::string_view to_string(VariableRole role) {
    switch (role) {
        case VariableRole::response: return "response";
        case VariableRole::explanatory: return "explanatory";
        case VariableRole::level_key: return "level-key";
        case VariableRole::fixed_effect_group: return "fixed-effect-group";
    }
    return "?";
}

Schema parse_schema(std::istream& in) {
    Schema schema;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const std::vector<std::string> f = text::split_record(t);
        if (f.size() < 3 || f.size() > 5)
            throw InputError(fmt::format("schema line {}: expected 3-5 fields, got {}", line_no, f.size()));
        VariableSpec v;
        v.name = f[0];
        if (v.name.empty()) throw InputError(fmt::format("schema line {}: empty name", line_no));
        v.kind = parse_kind(f[1], line_no);
        v.role = parse_role(f[2], line_no);
        if (f.size() > 3 && !f[3].empty()) v.levels = text::split(f[3], '|');
        if (f.size() > 4 && !f[4].empty()) {
            const auto bins = text::parse_int(f[4]);
            if (!bins) throw InputError(fmt::format("schema line {}: bad recode '{}'", line_no, f[4]));
            v.recode_bins = static_cast<int>(*bins);
        }
        schema.push_back(std::move(v));
    }
    validate_schema(schema);
    return schema;
}

Schema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open schema '{}'", path.string()));
    return parse_schema(in);
}

void write_schema(std::ostream& out, const Schema& schema) {
    out << "# name,kind,role,levels,recode\n";
    for (const VariableSpec& v : schema) {
        out << v.name << ',' << to_string(v.kind) << ',' << to_string(v.role) << ',';
        for (std::size_t i = 0; i < v.levels.size(); ++i) out << (i ? "|" : "") << v.levels[i];
        out << ',';
        if (v.recode_bins) out << *v.recode_bins;
        out << '\n';
    }
}

void validate_schema(const Schema& schema) {
    std::set<std::string> names;
    std::size_t responses = 0;
    for (const VariableSpec& v : schema) {
        if (!names.insert(v.name).second)
            throw InputError(fmt::format("duplicate variable '{}'", v.name));
        if (v.kind == VariableKind::nominal) {
            const std::set<std::string> distinct(v.levels.begin(), v.levels.end());
            if (v.levels.size() < 2 || distinct.size() != v.levels.size())
                throw InputError(fmt::format("nominal '{}' needs >= 2 distinct levels", v.name));
        } else if (!v.levels.empty()) {
            throw InputError(fmt::format("numeric '{}' must not list levels", v.name));
        }
        if (v.role == VariableRole::response) {
            ++responses;
            if (v.kind != VariableKind::discrete)
                throw InputError(fmt::format("response '{}' must be numeric-discrete", v.name));
        }
        if (v.role == VariableRole::level_key && v.kind != VariableKind::nominal)
            throw InputError(fmt::format("level key '{}' must be nominal", v.name));
        if (v.recode_bins && !v.is_numeric() && v.bin_edges.empty())
            throw InputError(fmt::format("'{}': only numeric variables can be recoded", v.name));
    }
    if (responses != 1)
        throw InputError(fmt::format("schema needs exactly one response, found {}", responses));
}

// ---------------------------------------------------------------- dataset

std::optional<std::size_t> Dataset::find(std::string_view name) const {
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i].name == name) return i;
    return std::nullopt;
}

std::size_t Dataset::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw InputError(fmt::format("unknown variable '{}'", name));
}

const VariableSpec& Dataset::spec(std::string_view name) const { return schema[index_of(name)]; }
const Column& Dataset::column(std::string_view name) const { return columns[index_of(name)]; }

std::size_t Dataset::response_index() const {
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i].role == VariableRole::response) return i;
    throw InputError("dataset has no response variable");
}

std::vector<double> Dataset::response() const { return columns[response_index()].numeric; }

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.schema = schema;
    out.n = rows.size();
    out.columns.resize(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (schema[c].is_numeric()) {
            out.columns[c].numeric.reserve(rows.size());
            for (std::size_t r : rows) out.columns[c].numeric.push_back(columns[c].numeric.at(r));
        } else {
            out.columns[c].level.reserve(rows.size());
            for (std::size_t r : rows) out.columns[c].level.push_back(columns[c].level.at(r));
        }
    }
    return out;
}

Dataset load_dataset(std::istream& in, const Schema& schema) {
    validate_schema(schema);
    std::string line;
    if (!std::getline(in, line)) throw InputError("data file is empty");
    const std::vector<std::string> header = text::split_record(line);

    Dataset data;
    data.schema = schema;
    data.columns.resize(schema.size());
    std::vector<std::size_t> target(header.size());
    std::vector<bool> seen(schema.size(), false);
    for (std::size_t h = 0; h < header.size(); ++h) {
        const auto idx = data.find(header[h]);
        if (!idx) throw InputError(fmt::format("unknown column '{}'", header[h]));
        if (seen[*idx]) throw InputError(fmt::format("duplicate column '{}'", header[h]));
        seen[*idx] = true;
        target[h] = *idx;
    }
    for (std::size_t s = 0; s < schema.size(); ++s)
        if (!seen[s]) throw InputError(fmt::format("column '{}' missing from data", schema[s].name));

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        ++row;
        const std::vector<std::string> cells = text::split_record(line);
        if (cells.size() != header.size())
            throw InputError(fmt::format("row {}: expected {} cells, got {}", row, header.size(), cells.size()));
        for (std::size_t h = 0; h < cells.size(); ++h) {
            const VariableSpec& spec = schema[target[h]];
            Column& col = data.columns[target[h]];
            const std::string& cell = cells[h];
            if (is_missing(cell))
                throw InputError(fmt::format("row {}, column '{}': missing value", row, spec.name));
            if (spec.kind == VariableKind::nominal) {
                const auto it = std::find(spec.levels.begin(), spec.levels.end(), cell);
                if (it == spec.levels.end())
                    throw InputError(fmt::format("row {}, column '{}': value '{}' is not a declared level",
                                                 row, spec.name, cell));
                col.level.push_back(static_cast<int>(it - spec.levels.begin()));
                continue;
            }
            const auto v = text::parse_double(cell);
            if (!v)
                throw InputError(fmt::format("row {}, column '{}': cannot parse '{}'", row, spec.name, cell));
            if (spec.kind == VariableKind::discrete && std::floor(*v) != *v)
                throw InputError(fmt::format("row {}, column '{}': '{}' is not an integer", row, spec.name, cell));
            if (spec.role == VariableRole::response && *v < 0)
                throw InputError(fmt::format("row {}: response must be a nonnegative count", row));
            col.numeric.push_back(*v);
        }
    }
    data.n = row;
    return data;
}

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open data file '{}'", path.string()));
    return load_dataset(in, schema);
}

void write_dataset(std::ostream& out, const Dataset& data) {
    for (std::size_t c = 0; c < data.schema.size(); ++c) out << (c ? "," : "") << data.schema[c].name;
    out << '\n';
    for (std::size_t r = 0; r < data.n; ++r) {
        for (std::size_t c = 0; c < data.schema.size(); ++c) {
            if (c) out << ',';
            const VariableSpec& s = data.schema[c];
            if (s.is_numeric())
                out << text::format_double(data.columns[c].numeric[r]);
            else
                out << s.levels[static_cast<std::size_t>(data.columns[c].level[r])];
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------- recoding

int quantile_bin(double value, std::span<const double> edges) {
    int bin = 0;
    while (bin < static_cast<int>(edges.size()) && value > edges[static_cast<std::size_t>(bin)]) ++bin;
    return bin;
}

Dataset recode_quartiles(const Dataset& data, std::string_view variable, int bins) {
    const std::size_t idx = data.index_of(variable);
    const VariableSpec& spec = data.schema[idx];
    if (!spec.is_numeric())
        throw InputError(fmt::format("cannot recode '{}': variable is not numeric", variable));
    if (bins != 3 && bins != 4)
        throw InputError(fmt::format("cannot recode '{}': bins must be 3 or 4, got {}", variable, bins));
    std::vector<double> sorted = data.columns[idx].numeric;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.empty() || sorted.front() == sorted.back())
        throw InputError(fmt::format("cannot recode '{}': degenerate quantiles", variable));
    std::vector<double> uniq = sorted;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() < static_cast<std::size_t>(bins))
        throw InputError(fmt::format("cannot recode '{}': {} distinct values, fewer than {} bins",
                                     variable, uniq.size(), bins));

    // Nearest rank: the q-quantile is the ceil(q*n)-th smallest value.
    const std::size_t n = sorted.size();
    std::vector<double> edges;
    for (int k = 1; k < bins; ++k) {
        const std::size_t rank = (static_cast<std::size_t>(k) * n + static_cast<std::size_t>(bins) - 1) /
                                 static_cast<std::size_t>(bins);
        edges.push_back(sorted[rank - 1]);
    }

    Dataset out = data;
    VariableSpec& recoded = out.schema[idx];
    recoded.kind = VariableKind::nominal;
    recoded.levels.clear();
    for (int k = 1; k <= bins; ++k) recoded.levels.push_back(fmt::format("Q{}", k));
    recoded.recode_bins = bins;
    recoded.bin_edges = edges;
    Column& col = out.columns[idx];
    col.level.resize(data.n);
    for (std::size_t i = 0; i < data.n; ++i) col.level[i] = quantile_bin(col.numeric[i], edges);
    col.numeric.clear();
    return out;
}

// ---------------------------------------------------------------- scenarios

Scenario parse_scenario(std::string_view s) {
    if (s == "original") return Scenario::original;
    if (s == "original-village" || s == "original+village") return Scenario::original_village;
    if (s == "recoded") return Scenario::recoded;
    if (s == "recoded-village" || s == "recoded+village") return Scenario::recoded_village;
    throw InputError(fmt::format("unknown scenario '{}'", s));
}

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::original: return "original";
        case Scenario::original_village: return "original-village";
        case Scenario::recoded: return "recoded";
        case Scenario::recoded_village: return "recoded-village";
    }
    return "?";
}

bool uses_village(Scenario s) {
    return s == Scenario::original_village || s == Scenario::recoded_village;
}

bool uses_recoding(Scenario s) {
    return s == Scenario::recoded || s == Scenario::recoded_village;
}

Dataset prepare_scenario(const Dataset& data, Scenario scenario) {
    if (!uses_recoding(scenario)) return data;
    Dataset out = data;
    for (const VariableSpec& v : data.schema) {
        if (!v.recode_bins || !v.is_numeric()) continue;
        if (v.role != VariableRole::explanatory && v.role != VariableRole::fixed_effect_group) continue;
        out = recode_quartiles(out, v.name, *v.recode_bins);
    }
    return out;
}

Dataset apply_recoding(const Dataset& data, const Schema& fitted) {
    Dataset out = data;
    for (const VariableSpec& f : fitted) {
        if (f.bin_edges.empty()) continue;
        const std::size_t idx = out.index_of(f.name);
        if (!out.schema[idx].is_numeric()) continue;
        Column& col = out.columns[idx];
        col.level.resize(out.n);
        for (std::size_t i = 0; i < out.n; ++i) col.level[i] = quantile_bin(col.numeric[i], f.bin_edges);
        col.numeric.clear();
        out.schema[idx] = f;
    }
    return out;
}

// ---------------------------------------------------------------- design

std::size_t DesignMatrix::group_of(std::size_t column) const {
    for (std::size_t g = 0; g < groups.size(); ++g)
        if (column >= groups[g].first && column < groups[g].first + groups[g].count) return g;
    throw InputError(fmt::format("column {} belongs to no group", column));
}

std::optional<std::size_t> DesignMatrix::find_group(std::string_view name) const {
    for (std::size_t g = 0; g < groups.size(); ++g)
        if (groups[g].name == name) return g;
    return std::nullopt;
}

std::size_t DesignMatrix::main_effect_count() const {
    return static_cast<std::size_t>(
        std::count_if(groups.begin(), groups.end(), [](const Group& g) { return !g.is_interaction(); }));
}

std::vector<Standardization> standardize_columns(Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    std::vector<Standardization> out(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        auto col = m.col(j);
        const double mean = col.sum() / static_cast<double>(n);
        col.array() -= mean;
        double sd = n > 1 ? std::sqrt(col.squaredNorm() / static_cast<double>(n - 1)) : 0.0;
        if (!(sd > 0.0)) sd = 1.0;
        col /= sd;
        out[static_cast<std::size_t>(j)] = {mean, sd};
    }
    return out;
}

DesignMatrix encode_design(const Dataset& input, Scenario scenario) {
    const Dataset data = prepare_scenario(input, scenario);
    const bool village = uses_village(scenario);
    if (village && std::none_of(data.schema.begin(), data.schema.end(), [](const VariableSpec& v) {
            return v.role == VariableRole::fixed_effect_group;
        }))
        throw InputError(fmt::format("scenario '{}' needs a fixed-effect-group (village) variable",
                                     to_string(scenario)));
    if (data.n < 2) throw InputError("need at least two observations to encode a design");

    DesignBuilder builder;
    for (const VariableSpec& v : data.schema) {
        const bool wanted = v.role == VariableRole::explanatory ||
                            (village && v.role == VariableRole::fixed_effect_group);
        if (!wanted) continue;
        std::vector<ColumnRecipe> candidates;
        if (v.is_numeric()) {
            candidates.push_back({v.name, {Factor{v.name, std::nullopt}}});
        } else {
            for (std::size_t l = 1; l < v.levels.size(); ++l)
                candidates.push_back({v.name + "=" + v.levels[l], {Factor{v.name, v.levels[l]}}});
        }
        std::vector<std::vector<double>> values;
        for (const ColumnRecipe& r : candidates) values.push_back(evaluate(data, r));
        builder.add_group(v.name, {v.name}, std::move(candidates), std::move(values));
    }
    if (builder.groups.empty()) throw InputError("scenario selects no explanatory variables");
    return std::move(builder).finish(data.n);
}

DesignMatrix expand_interactions(const DesignMatrix& design) {
    std::vector<std::size_t> mains;
    for (std::size_t g = 0; g < design.groups.size(); ++g)
        if (!design.groups[g].is_interaction()) mains.push_back(g);
    if (mains.size() < 2)
        throw InputError(fmt::format("interaction expansion needs >= 2 main effects, got {}", mains.size()));

    const auto n = design.rows();
    DesignBuilder builder;
    builder.dropped = design.dropped;
    const auto column_values = [&](std::size_t j) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = design.raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        return v;
    };
    for (std::size_t g : mains) {
        const Group& grp = design.groups[g];
        std::vector<ColumnRecipe> recipes;
        std::vector<std::vector<double>> values;
        for (std::size_t j = grp.first; j < grp.first + grp.count; ++j) {
            recipes.push_back(design.columns[j]);
            values.push_back(column_values(j));
        }
        builder.add_group(grp.name, grp.variables, std::move(recipes), std::move(values));
    }
    for (std::size_t a = 0; a < mains.size(); ++a) {
        for (std::size_t b = a + 1; b < mains.size(); ++b) {
            const Group& ga = design.groups[mains[a]];
            const Group& gb = design.groups[mains[b]];
            std::vector<ColumnRecipe> recipes;
            std::vector<std::vector<double>> values;
            for (std::size_t ja = ga.first; ja < ga.first + ga.count; ++ja) {
                for (std::size_t jb = gb.first; jb < gb.first + gb.count; ++jb) {
                    ColumnRecipe r;
                    r.name = design.columns[ja].name + ":" + design.columns[jb].name;
                    r.factors = design.columns[ja].factors;
                    r.factors.insert(r.factors.end(), design.columns[jb].factors.begin(),
                                     design.columns[jb].factors.end());
                    std::vector<double> v(n);
                    for (std::size_t i = 0; i < n; ++i)
                        v[i] = design.raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ja)) *
                               design.raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jb));
                    recipes.push_back(std::move(r));
                    values.push_back(std::move(v));
                }
            }
            std::vector<std::string> vars = ga.variables;
            vars.insert(vars.end(), gb.variables.begin(), gb.variables.end());
            builder.add_group(ga.name + ":" + gb.name, std::move(vars), std::move(recipes), std::move(values));
        }
    }
    return std::move(builder).finish(n);
}

DesignMatrix encode_like(const DesignMatrix& reference, const Dataset& data) {
    DesignMatrix d;
    d.groups = reference.groups;
    d.columns = reference.columns;
    d.scaling = reference.scaling;
    d.dropped = reference.dropped;
    const auto n = static_cast<Eigen::Index>(data.n);
    const auto p = static_cast<Eigen::Index>(reference.cols());
    d.raw.resize(n, p);
    d.values.resize(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const std::vector<double> v = evaluate(data, reference.columns[static_cast<std::size_t>(j)]);
        const Standardization& s = reference.scaling[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) {
            d.raw(i, j) = v[static_cast<std::size_t>(i)];
            d.values(i, j) = (v[static_cast<std::size_t>(i)] - s.center) / s.scale;
        }
    }
    return d;
}

DesignMatrix select_rows(const DesignMatrix& design, std::span<const std::size_t> rows) {
    DesignMatrix d;
    d.groups = design.groups;
    d.columns = design.columns;
    d.scaling = design.scaling;
    d.dropped = design.dropped;
    const auto n = static_cast<Eigen::Index>(rows.size());
    d.raw.resize(n, design.raw.cols());
    d.values.resize(n, design.values.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
        d.raw.row(i) = design.raw.row(r);
        d.values.row(i) = design.values.row(r);
    }
    return d;
}

void write_design(std::ostream& out, const DesignMatrix& design) {
    for (std::size_t j = 0; j < design.cols(); ++j) out << (j ? "," : "") << design.columns[j].name;
    out << '\n';
    for (Eigen::Index i = 0; i < design.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < design.values.cols(); ++j)
            out << (j ? "," : "") << text::format_double(design.values(i, j));
        out << '\n';
    }
}

void write_group_map(std::ostream& out, const DesignMatrix& design) {
    out << "group,variables,first_column,column_count,columns\n";
    for (const Group& g : design.groups) {
        out << g.name << ',';
        for (std::size_t v = 0; v < g.variables.size(); ++v) out << (v ? "|" : "") << g.variables[v];
        out << ',' << g.first << ',' << g.count << ',';
        for (std::size_t j = g.first; j < g.first + g.count; ++j)
            out << (j > g.first ? "|" : "") << design.columns[j].name;
        out << '\n';
    }
}

}  // namespace lolo
