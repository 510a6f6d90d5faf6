#pragma once
// Backward-elimination Poisson GLM, the reference method for comparison
// with LOLO-DCV.

#include <string>
#include <vector>

#include "lolo/cv.hpp"
#include "lolo/features.hpp"
#include "lolo/glm.hpp"

namespace lolo {

struct BaselineConfig {
    double alpha = 0.05;
    std::vector<std::string> interactions = {"Season:NDVI"};  // "A:B" pairs of main effects
    std::string outer_key;                                     // empty: as for LOLO-DCV
    std::size_t jobs = 1;
    IrlsOptions irls;
};

struct Elimination {
    std::string term;
    double p_value = 0.0;
    double statistic = 0.0;
    std::size_t df = 0;
};

struct BaselineResult {
    std::vector<std::string> initial;   // starting terms
    std::vector<std::string> selected;  // terms left at the end
    std::vector<Elimination> eliminated;
    std::vector<std::string> skipped_interactions;  // whitelist entries that do not apply
    FoldPlan outer;
    std::vector<double> predictions;  // leave-one-level-out refits of the final model
};

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double df);

/// Main effects plus the whitelisted interactions, selected on the full data
/// by repeatedly dropping the term with the largest likelihood-ratio p-value
/// above alpha. A main effect stays while an interaction containing it is in
/// the model. Throws NumericalError when the starting model is rank-deficient.
BaselineResult backward_glm_baseline(const Dataset& data, Scenario scenario, const BaselineConfig& config = {});

}  // namespace lolo
