#include <doctest.h>

#include <cmath>

#include "lolo/baseline.hpp"
#include "lolo/dcv.hpp"
#include "lolo/error.hpp"
#include "lolo/synth.hpp"
#include "support.hpp"

using namespace lolo;

namespace {

const char* kNoiseSchema =
    "y,discrete,response\n"
    "x1,continuous,explanatory\n"
    "x2,continuous,explanatory\n"
    "x3,nominal,explanatory,a|b\n"
    "village,nominal,fixed-effect-group,V1|V2|V3|V4|V5|V6\n";

}  // namespace

TEST_SUITE("baseline") {
TEST_CASE("chi-square tail") {
    CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_sf(5.991464547107979, 2) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_sf(0.0, 3) == 1.0);
    CHECK_THROWS_AS(chi_square_sf(1.0, 0), InputError);
}

TEST_CASE("a strong variable survives elimination") {
    SynthConfig c;
    c.truth = {{"X3", 0.8}};
    c.seed = 2;
    const SynthData s = synthesize(c);
    BaselineConfig b;
    b.interactions.clear();
    const BaselineResult r = backward_glm_baseline(s.data, Scenario::original, b);
    CHECK(std::find(r.selected.begin(), r.selected.end(), "X3") != r.selected.end());
    CHECK(r.initial.size() == 16);
    CHECK(r.predictions.size() == s.data.n);
    for (const Elimination& e : r.eliminated) CHECK(e.p_value > 0.05);
}

TEST_CASE("pure noise is eliminated in most seeds") {
    const Schema schema = testing::schema_from(kNoiseSchema);
    int empty = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Dataset d = testing::random_dataset(schema, 120, seed);
        const BaselineResult r = backward_glm_baseline(d, Scenario::original, {});
        CHECK(r.skipped_interactions == std::vector<std::string>{"Season:NDVI"});
        if (r.selected.empty()) ++empty;
    }
    CHECK(empty > 10);
}

TEST_CASE("alpha one keeps the full model") {
    const Schema schema = testing::schema_from(kNoiseSchema);
    const Dataset d = testing::random_dataset(schema, 120, 3);
    BaselineConfig b;
    b.alpha = 1.0;
    b.interactions = {"x1:x3"};
    const BaselineResult r = backward_glm_baseline(d, Scenario::original, b);
    CHECK(r.eliminated.empty());
    CHECK(r.selected == r.initial);
    CHECK(r.selected.back() == "x1:x3");
    const std::vector<double> full = refit_predictions(d, Scenario::original, r.outer, r.initial, true);
    CHECK(r.predictions == full);
}

TEST_CASE("marginality keeps mains of a retained interaction") {
    SynthConfig c;
    c.truth = {{"X3:X7", 1.0}};
    c.seed = 5;
    const SynthData s = synthesize(c);
    BaselineConfig b;
    b.interactions = {"X3:X7"};
    const BaselineResult r = backward_glm_baseline(s.data, Scenario::original, b);
    const auto has = [&](const std::string& t) { return std::find(r.selected.begin(), r.selected.end(), t) != r.selected.end(); };
    REQUIRE(has("X3:X7"));
    CHECK(has("X3"));
    CHECK(has("X7"));
}

TEST_CASE("rank-deficient start is an error") {
    const Schema schema = testing::schema_from(kNoiseSchema);
    Dataset d = testing::random_dataset(schema, 60, 1);
    d.columns[d.index_of("x2")].numeric = d.columns[d.index_of("x1")].numeric;
    CHECK_THROWS_AS(backward_glm_baseline(d, Scenario::original, {}), NumericalError);
    BaselineConfig b;
    b.alpha = 2.0;
    CHECK_THROWS_AS(backward_glm_baseline(testing::random_dataset(schema, 60, 1), Scenario::original, b), InputError);
}
}
