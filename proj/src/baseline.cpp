#include "lolo/baseline.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include <algorithm>

#include "lolo/dcv.hpp"
#include "lolo/error.hpp"
#include "lolo/log.hpp"

namespace lolo {
namespace {

struct TermFit {
    FitResult fit;
    std::size_t rank = 0;
};

TermFit fit_terms(const DesignMatrix& design, std::span<const double> y, const std::vector<std::string>& terms,
                  const IrlsOptions& options) {
    std::vector<std::size_t> columns;
    for (const std::string& t : terms) {
        const Group& g = design.groups[*design.find_group(t)];
        for (std::size_t c = 0; c < g.count; ++c) columns.push_back(g.first + c);
    }
    std::sort(columns.begin(), columns.end());
    TermFit out;
    out.fit = fit_irls(design, y, std::span<const std::size_t>(columns), options);
    out.rank = columns.size() - out.fit.dropped_columns.size();
    return out;
}

bool protected_by_marginality(const std::string& term, const std::vector<std::string>& terms) {
    if (term.find(':') != std::string::npos) return false;
    for (const std::string& t : terms) {
        const auto colon = t.find(':');
        if (colon == std::string::npos) continue;
        if (t.substr(0, colon) == term || t.substr(colon + 1) == term) return true;
    }
    return false;
}

}  // namespace

double chi_square_sf(double statistic, double df) {
    if (df <= 0) throw InputError("chi-square degrees of freedom must be positive");
    if (statistic <= 0) return 1.0;
    return boost::math::gamma_q(df / 2.0, statistic / 2.0);
}

BaselineResult backward_glm_baseline(const Dataset& data, Scenario scenario, const BaselineConfig& config) {
    if (!(config.alpha >= 0.0 && config.alpha <= 1.0))
        throw InputError(fmt::format("alpha must lie in [0, 1], got {}", config.alpha));
    const Dataset prepared = prepare_scenario(data, scenario);
    const DesignMatrix mains = encode_design(prepared, scenario);

    BaselineResult result;
    for (const Group& g : mains.groups) result.initial.push_back(g.name);
    bool any_interaction = false;
    for (const std::string& pair : config.interactions) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) throw InputError(fmt::format("interaction '{}' is not of the form A:B", pair));
        if (mains.find_group(pair.substr(0, colon)) && mains.find_group(pair.substr(colon + 1))) {
            any_interaction = true;
        } else {
            log().info("baseline: interaction '{}' skipped, a main effect is absent", pair);
            result.skipped_interactions.push_back(pair);
        }
    }
    const DesignMatrix design = any_interaction && mains.main_effect_count() >= 2 ? expand_interactions(mains) : mains;
    for (const std::string& pair : config.interactions) {
        if (std::find(result.skipped_interactions.begin(), result.skipped_interactions.end(), pair) !=
            result.skipped_interactions.end())
            continue;
        if (design.find_group(pair)) {
            result.initial.push_back(pair);
        } else {
            const auto colon = pair.find(':');
            const std::string swapped = pair.substr(colon + 1) + ":" + pair.substr(0, colon);
            if (design.find_group(swapped)) {
                result.initial.push_back(swapped);
            } else {
                log().info("baseline: interaction '{}' has no non-constant columns", pair);
                result.skipped_interactions.push_back(pair);
            }
        }
    }

    const std::vector<double> y = prepared.response();
    std::vector<std::string> terms = result.initial;
    TermFit current = fit_terms(design, y, terms, config.irls);
    if (!current.fit.dropped_columns.empty()) {
        std::string names;
        for (std::size_t j : current.fit.dropped_columns) names += (names.empty() ? "" : ", ") + design.columns[j].name;
        throw NumericalError(fmt::format("initial baseline model is rank-deficient; dependent columns: {}", names));
    }

    while (!terms.empty()) {
        std::size_t worst = terms.size();
        double worst_p = -1.0;
        Elimination worst_step;
        TermFit worst_fit;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            if (protected_by_marginality(terms[t], terms)) continue;
            std::vector<std::string> reduced = terms;
            reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(t));
            TermFit smaller = fit_terms(design, y, reduced, config.irls);
            const std::size_t df = current.rank - smaller.rank;
            const double stat = std::max(0.0, smaller.fit.deviance - current.fit.deviance);
            const double p = df == 0 ? 1.0 : chi_square_sf(stat, static_cast<double>(df));
            if (p > worst_p) {
                worst_p = p;
                worst = t;
                worst_step = Elimination{terms[t], p, stat, df};
                worst_fit = std::move(smaller);
            }
        }
        if (worst == terms.size() || !(worst_p > config.alpha)) break;
        log().info("baseline: dropping {} (p = {})", terms[worst], worst_p);
        result.eliminated.push_back(worst_step);
        terms.erase(terms.begin() + static_cast<std::ptrdiff_t>(worst));
        current = std::move(worst_fit);
    }
    result.selected = terms;

    DcvConfig outer_config;
    outer_config.outer_key = config.outer_key;
    result.outer = outer_folds(data, outer_config);
    result.predictions = refit_predictions(data, scenario, result.outer, result.selected, any_interaction, config.jobs);
    return result;
}

}  // namespace lolo
