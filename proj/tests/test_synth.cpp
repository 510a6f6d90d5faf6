#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "lolo/error.hpp"
#include "lolo/glm.hpp"
#include "lolo/io.hpp"
#include "lolo/synth.hpp"

using namespace lolo;

TEST_SUITE("synth") {
TEST_CASE("layout and schema") {
    const SynthData s = synthesize({});
    CHECK(s.data.n == 9 * 4 * 8);
    CHECK(synth_variables().size() == 16);
    CHECK(s.data.spec("village").role == VariableRole::fixed_effect_group);
    CHECK(s.data.spec("house").role == VariableRole::level_key);
    CHECK(s.truth_columns == std::vector<std::string>{"X3", "X7", "X3:X7"});
    const DesignMatrix d = expand_interactions(encode_design(s.data, Scenario::original));
    CHECK(d.groups.size() == 136);
}

TEST_CASE("null generator has mean exp(intercept)") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SynthConfig c;
        c.truth.clear();
        c.seed = seed;
        const SynthData s = synthesize(c);
        const std::vector<double> y = s.data.response();
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
        const double rate = std::exp(c.intercept);
        CHECK(std::abs(mean - rate) < 3.0 * std::sqrt(rate / static_cast<double>(y.size())));
    }
}

TEST_CASE("same seed, same data") {
    SynthConfig c;
    c.seed = 77;
    std::ostringstream a, b;
    write_dataset(a, synthesize(c).data);
    write_dataset(b, synthesize(c).data);
    CHECK(a.str() == b.str());
    c.seed = 78;
    std::ostringstream other;
    write_dataset(other, synthesize(c).data);
    CHECK(a.str() != other.str());
}

TEST_CASE("unit effect on a standardized column has rate ratio e") {
    SynthConfig c;
    c.levels = 10;
    c.houses = 6;
    c.surveys = 10;
    c.truth = {{"X3", 1.0}};
    c.intercept = 0.3;
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        c.seed = seed;
        const SynthData s = synthesize(c);
        const DesignMatrix d = encode_design(s.data, Scenario::original);
        const std::vector<std::size_t> cols{d.groups[*d.find_group("X3")].first};
        const FitResult f = fit_irls(d, s.data.response(), std::span<const std::size_t>(cols));
        total += f.coefficients.beta(static_cast<Eigen::Index>(cols[0]));
    }
    CHECK(std::exp(total / 5.0) == doctest::Approx(std::exp(1.0)).epsilon(0.05));
}

TEST_CASE("truth parsing and unknown terms") {
    const auto t = parse_truth("X3=0.5, X7 = -0.25 ,X3:X7=0.3");
    REQUIRE(t.size() == 3);
    CHECK(t[1].name == "X7");
    CHECK(t[1].effect == -0.25);
    CHECK_THROWS_AS(parse_truth("X3"), InputError);
    CHECK_THROWS_AS(parse_truth("X3=big"), InputError);
    SynthConfig c;
    c.truth = {{"X99", 1.0}};
    CHECK_THROWS_AS(synthesize(c), InputError);
    c.truth = {{"X7:X3", 0.3}};
    CHECK(synthesize(c).truth_columns.size() == 1);
}

TEST_CASE("written files load back") {
    const auto dir = std::filesystem::temp_directory_path() / "lolo_synth_test";
    std::filesystem::remove_all(dir);
    const SynthData s = synthesize({});
    write_synth(dir, s);
    const Schema schema = load_schema(dir / "schema.txt");
    const Dataset d = load_dataset(dir / "data.csv", schema);
    CHECK(d.n == s.data.n);
    CHECK(d.response() == s.data.response());
    CHECK(io::read_file(dir / "truth.csv").rfind("term,column,effect\nX3,X3,0.5\n", 0) == 0);
    std::filesystem::remove_all(dir);
}
}
