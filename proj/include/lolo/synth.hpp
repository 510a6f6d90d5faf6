#pragma once
// Synthetic village -> house -> survey count data with a sparse log-linear
// truth, for checking selection and prediction at desk scale.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lolo/features.hpp"

namespace lolo {

struct SynthTerm {
    std::string name;  // main-effect variable ("X3") or pair ("X3:X7")
    double effect = 0.0;
};

struct SynthConfig {
    std::size_t levels = 9;   // villages
    std::size_t houses = 4;   // per village
    std::size_t surveys = 8;  // per house
    std::vector<SynthTerm> truth = {{"X3", 0.5}, {"X7", 0.5}, {"X3:X7", 0.3}};
    double intercept = 0.7;   // log of the baseline rate
    double level_sd = 0.0;    // sd of a village-level random shift on the log rate
    std::uint64_t seed = 20240611;
};

struct SynthData {
    Schema schema;
    Dataset data;
    std::vector<SynthTerm> truth;
    std::vector<std::string> truth_columns;  // design column carrying each effect
};

/// Sixteen explanatory variables X1..X16 of mixed kinds, plus village,
/// house and the count y. Each true effect multiplies the first standardized
/// column of its group in the all-pairs design of the original scenario.
SynthData synthesize(const SynthConfig& config);

/// Explanatory variables of the generated schema, in order.
std::vector<std::string> synth_variables();

/// data.csv, schema.txt and truth.csv under `dir`.
void write_synth(const std::filesystem::path& dir, const SynthData& synth);

/// Parse "X3=0.5,X7=0.5,X3:X7=0.3".
std::vector<SynthTerm> parse_truth(std::string_view text);

}  // namespace lolo
