#include "lolo/synth.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lolo/error.hpp"
#include "lolo/io.hpp"
#include "lolo/text.hpp"

namespace lolo {
namespace {

enum class Scope { survey, house, observation };

struct VarDef {
    std::string name;
    VariableKind kind;
    Scope scope;
    std::vector<std::string> levels;
    std::optional<int> recode;
};

const std::vector<VarDef>& definitions() {
    static const std::vector<VarDef> defs = {
        {"X1", VariableKind::nominal, Scope::survey, {"S1", "S2", "S3", "S4"}, {}},
        {"X2", VariableKind::nominal, Scope::house, {"no", "yes"}, {}},
        {"X3", VariableKind::continuous, Scope::observation, {}, 4},
        {"X4", VariableKind::nominal, Scope::house, {"no", "yes"}, {}},
        {"X5", VariableKind::discrete, Scope::house, {}, 4},
        {"X6", VariableKind::nominal, Scope::house, {"c1", "c2", "c3"}, {}},
        {"X7", VariableKind::continuous, Scope::observation, {}, 4},
        {"X8", VariableKind::nominal, Scope::observation, {"no", "yes"}, {}},
        {"X9", VariableKind::discrete, Scope::survey, {}, 3},
        {"X10", VariableKind::discrete, Scope::observation, {}, {}},
        {"X11", VariableKind::nominal, Scope::house, {"tin", "straw"}, {}},
        {"X12", VariableKind::nominal, Scope::house, {"no", "yes"}, {}},
        {"X13", VariableKind::discrete, Scope::house, {}, 4},
        {"X14", VariableKind::discrete, Scope::house, {}, 3},
        {"X15", VariableKind::nominal, Scope::house, {"humid", "dry"}, {}},
        {"X16", VariableKind::nominal, Scope::house, {"no", "yes"}, {}},
    };
    return defs;
}

// One draw per variable; discrete ranges loosely follow household surveys.
double draw(std::size_t var, std::mt19937_64& rng) {
    switch (var) {
        case 2: return std::normal_distribution<double>(0.0, 15.0)(rng);        // rainfall anomaly
        case 4: return std::uniform_int_distribution<int>(1, 5)(rng);           // openings
        case 6: return std::normal_distribution<double>(0.0, 10.0)(rng);        // vegetation anomaly
        case 8: return std::uniform_int_distribution<int>(0, 9)(rng);           // rainy days before
        case 9: return std::uniform_int_distribution<int>(0, 3)(rng);           // rainy days during
        case 12: return std::uniform_int_distribution<int>(26, 71)(rng);        // fragmentation
        case 13: return std::uniform_int_distribution<int>(1, 8)(rng);          // inhabitants
        default: return 0.0;
    }
}

int draw_level(const VarDef& def, std::mt19937_64& rng) {
    return std::uniform_int_distribution<int>(0, static_cast<int>(def.levels.size()) - 1)(rng);
}

}  // namespace

std::vector<std::string> synth_variables() {
    std::vector<std::string> out;
    for (const VarDef& d : definitions()) out.push_back(d.name);
    return out;
}

std::vector<SynthTerm> parse_truth(std::string_view text) {
    std::vector<SynthTerm> out;
    for (const std::string& item : text::split(text, ',')) {
        const std::string_view t = text::trim(item);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw InputError(fmt::format("truth term '{}' is not name=effect", t));
        const auto effect = text::parse_double(text::trim(t.substr(eq + 1)));
        if (!effect) throw InputError(fmt::format("truth term '{}' has a bad effect", t));
        out.push_back({std::string(text::trim(t.substr(0, eq))), *effect});
    }
    return out;
}

SynthData synthesize(const SynthConfig& config) {
    if (config.levels < 3 || config.houses < 1 || config.surveys < 1)
        throw InputError("synthetic layout needs >= 3 levels, >= 1 house and >= 1 survey");
    const auto& defs = definitions();
    const std::size_t n = config.levels * config.houses * config.surveys;

    SynthData out;
    Schema& schema = out.schema;
    for (const VarDef& d : defs) schema.push_back({d.name, d.kind, VariableRole::explanatory, d.levels, d.recode, {}});
    VariableSpec village{"village", VariableKind::nominal, VariableRole::fixed_effect_group, {}, {}, {}};
    for (std::size_t v = 0; v < config.levels; ++v) village.levels.push_back(fmt::format("V{}", v + 1));
    VariableSpec house{"house", VariableKind::nominal, VariableRole::level_key, {}, {}, {}};
    for (std::size_t h = 0; h < config.levels * config.houses; ++h) house.levels.push_back(fmt::format("H{}", h + 1));
    schema.push_back(village);
    schema.push_back(house);
    schema.push_back({"y", VariableKind::discrete, VariableRole::response, {}, {}, {}});
    validate_schema(schema);

    Dataset& data = out.data;
    data.schema = schema;
    data.n = n;
    data.columns.resize(schema.size());
    const std::size_t n_vars = defs.size();
    for (std::size_t j = 0; j < n_vars; ++j) {
        if (defs[j].kind == VariableKind::nominal)
            data.columns[j].level.resize(n);
        else
            data.columns[j].numeric.resize(n);
    }
    data.columns[n_vars].level.resize(n);
    data.columns[n_vars + 1].level.resize(n);
    data.columns[n_vars + 2].numeric.assign(n, 0.0);

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> level_shift(0.0, 1.0);
    std::vector<double> village_effect(config.levels);
    for (double& e : village_effect) e = config.level_sd * level_shift(rng);

    const auto set = [&](std::size_t var, std::size_t row, std::mt19937_64& g) {
        if (defs[var].kind == VariableKind::nominal)
            data.columns[var].level[row] = draw_level(defs[var], g);
        else
            data.columns[var].numeric[row] = draw(var, g);
    };

    std::size_t row = 0;
    for (std::size_t v = 0; v < config.levels; ++v) {
        // Survey-scope values are shared by all houses of a village in a survey.
        std::vector<std::vector<std::size_t>> survey_rows(config.surveys);
        for (std::size_t h = 0; h < config.houses; ++h) {
            const std::size_t house_row = row;
            for (std::size_t s = 0; s < config.surveys; ++s, ++row) {
                data.columns[n_vars].level[row] = static_cast<int>(v);
                data.columns[n_vars + 1].level[row] = static_cast<int>(v * config.houses + h);
                survey_rows[s].push_back(row);
                for (std::size_t j = 0; j < n_vars; ++j) {
                    if (defs[j].scope == Scope::observation) set(j, row, rng);
                    if (defs[j].scope == Scope::house) {
                        if (s == 0)
                            set(j, row, rng);
                        else if (defs[j].kind == VariableKind::nominal)
                            data.columns[j].level[row] = data.columns[j].level[house_row];
                        else
                            data.columns[j].numeric[row] = data.columns[j].numeric[house_row];
                    }
                }
            }
        }
        for (std::size_t s = 0; s < config.surveys; ++s) {
            for (std::size_t j = 0; j < n_vars; ++j) {
                if (defs[j].scope != Scope::survey) continue;
                const std::size_t first = survey_rows[s].front();
                if (j == 0)
                    data.columns[j].level[first] = static_cast<int>(s % defs[j].levels.size());
                else
                    set(j, first, rng);
                for (std::size_t r : survey_rows[s]) {
                    if (defs[j].kind == VariableKind::nominal)
                        data.columns[j].level[r] = data.columns[j].level[first];
                    else
                        data.columns[j].numeric[r] = data.columns[j].numeric[first];
                }
            }
        }
    }

    std::vector<double> eta(n, config.intercept);
    if (!config.truth.empty()) {
        const DesignMatrix design = expand_interactions(encode_design(data, Scenario::original));
        for (const SynthTerm& t : config.truth) {
            auto g = design.find_group(t.name);
            if (!g) {
                const auto colon = t.name.find(':');
                if (colon != std::string::npos)
                    g = design.find_group(t.name.substr(colon + 1) + ":" + t.name.substr(0, colon));
            }
            if (!g) throw InputError(fmt::format("true support term '{}' is not a group of the generated design", t.name));
            const std::size_t col = design.groups[*g].first;
            out.truth.push_back(t);
            out.truth_columns.push_back(design.columns[col].name);
            for (std::size_t i = 0; i < n; ++i) eta[i] += t.effect * design.values(static_cast<Eigen::Index>(i),
                                                                                       static_cast<Eigen::Index>(col));
        }
    }
    std::vector<double>& y = data.columns[n_vars + 2].numeric;
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = std::exp(eta[i] + village_effect[static_cast<std::size_t>(data.columns[n_vars].level[i])]);
        y[i] = static_cast<double>(std::poisson_distribution<long long>(mu)(rng));
    }
    return out;
}

void write_synth(const std::filesystem::path& dir, const SynthData& synth) {
    std::filesystem::create_directories(dir);
    std::ostringstream data, schema;
    write_dataset(data, synth.data);
    write_schema(schema, synth.schema);
    std::string truth = "term,column,effect\n";
    for (std::size_t i = 0; i < synth.truth.size(); ++i)
        truth += fmt::format("{},{},{}\n", synth.truth[i].name, synth.truth_columns[i],
                             text::format_double(synth.truth[i].effect));
    io::write_atomic(dir / "data.csv", data.str());
    io::write_atomic(dir / "schema.txt", schema.str());
    io::write_atomic(dir / "truth.csv", truth);
}

}  // namespace lolo
