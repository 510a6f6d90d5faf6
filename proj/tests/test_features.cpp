#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "lolo/error.hpp"
#include "lolo/features.hpp"
#include "lolo/text.hpp"
#include "support.hpp"

using namespace lolo;
using testing::dataset_from;
using testing::schema_from;

namespace {

const char* kSmallSchema =
    "y,discrete,response\n"
    "net,nominal,explanatory,no|yes\n";

// Smallest value whose empirical CDF reaches q.
double nearest_rank(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    for (double c : v) {
        const auto below = std::count_if(v.begin(), v.end(), [&](double x) { return x <= c; });
        if (static_cast<double>(below) / static_cast<double>(v.size()) >= q) return c;
    }
    return v.back();
}

Dataset numeric_data(const std::vector<double>& values, const char* kind = "discrete") {
    const Schema s = schema_from(std::string("x,") + kind + ",explanatory\ny,discrete,response\n");
    std::string csv = "x,y\n";
    for (double v : values) csv += text::format_double(v) + ",1\n";
    return dataset_from(s, csv);
}

}  // namespace

TEST_SUITE("features") {
TEST_CASE("minimal file loads") {
    const Dataset d = dataset_from(schema_from(kSmallSchema), "y,net\n0,no\n1,yes\n2,no\n");
    CHECK(d.n == 3);
    CHECK(d.response() == std::vector<double>{0, 1, 2});
}

TEST_CASE("ingestion errors") {
    const Schema s = schema_from(kSmallSchema);
    CHECK_THROWS_WITH_AS(dataset_from(s, "y,net\n-1,no\n"), doctest::Contains("response must be a nonnegative count"),
                         InputError);
    CHECK_THROWS_WITH_AS(dataset_from(s, "y,net,z\n1,no,3\n"), doctest::Contains("unknown column"), InputError);
    CHECK_THROWS_WITH_AS(dataset_from(s, "y,net\n1,no\nx,no\n"), doctest::Contains("row 2"), InputError);
    CHECK_THROWS_WITH_AS(dataset_from(s, "y,net\n1,maybe\n"), doctest::Contains("not a declared level"), InputError);
    CHECK_THROWS_WITH_AS(dataset_from(s, "y,net\n1,\n"), doctest::Contains("missing value"), InputError);
}

TEST_CASE("schema invariants") {
    CHECK_THROWS_AS(schema_from("y,discrete,response\nz,discrete,response\n"), InputError);
    CHECK_THROWS_AS(schema_from("y,continuous,response\n"), InputError);
    CHECK_THROWS_AS(schema_from("y,discrete,response\na,nominal,explanatory,one\n"), InputError);
    CHECK_THROWS_AS(schema_from("y,discrete,response\nh,discrete,level-key\n"), InputError);
    CHECK_THROWS_AS(schema_from("y,discrete,response\na,weird,explanatory\n"), InputError);
}

TEST_CASE("example survey schema is accepted as written") {
    const Schema s = load_schema(std::filesystem::path(LOLO_SOURCE_DIR) / "data/survey_schema.txt");
    const auto find = [&](const std::string& n) {
        return *std::find_if(s.begin(), s.end(), [&](const VariableSpec& v) { return v.name == n; });
    };
    CHECK(find("Season").kind == VariableKind::nominal);
    CHECK(find("Season").levels.size() == 4);
    CHECK(find("Village").levels.size() == 9);
    CHECK(find("Village").role == VariableRole::fixed_effect_group);
    CHECK(find("Rainfall").kind == VariableKind::continuous);
    CHECK(find("Inhabitants").recode_bins == 3);
    std::ostringstream out;
    write_schema(out, s);
    std::istringstream back(out.str());
    CHECK(parse_schema(back).size() == s.size());
}

TEST_CASE("nearest-rank quartiles of 1..8") {
    const Dataset d = recode_quartiles(numeric_data({1, 2, 3, 4, 5, 6, 7, 8}), "x", 4);
    const VariableSpec& x = d.spec("x");
    CHECK(x.levels == std::vector<std::string>{"Q1", "Q2", "Q3", "Q4"});
    CHECK(d.column("x").level == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3});
}

TEST_CASE("quantile edges match an independent nearest-rank rule") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(37);
        for (double& x : v) x = std::uniform_int_distribution<int>(0, 40)(rng);
        for (int bins : {3, 4}) {
            const Dataset d = recode_quartiles(numeric_data(v), "x", bins);
            const auto& edges = d.spec("x").bin_edges;
            REQUIRE(edges.size() == static_cast<std::size_t>(bins - 1));
            for (int k = 1; k < bins; ++k) CHECK(edges[static_cast<std::size_t>(k - 1)] ==
                                                 nearest_rank(v, static_cast<double>(k) / bins));
        }
    }
}

TEST_CASE("recoding errors") {
    CHECK_THROWS_WITH_AS(recode_quartiles(numeric_data({2, 2, 2, 2}), "x", 4),
                         doctest::Contains("degenerate quantiles"), InputError);
    CHECK_THROWS_AS(recode_quartiles(numeric_data({1, 2, 1, 2}), "x", 4), InputError);
    const Dataset d = dataset_from(schema_from(kSmallSchema), "y,net\n0,no\n1,yes\n");
    CHECK_THROWS_AS(recode_quartiles(d, "net", 4), InputError);
}

TEST_CASE("inhabitants fall into three classes") {
    const Schema s = load_schema(std::filesystem::path(LOLO_SOURCE_DIR) / "data/survey_schema.txt");
    const Dataset d = prepare_scenario(testing::random_dataset(s, 120, 8), Scenario::recoded);
    CHECK(d.spec("Inhabitants").levels.size() == 3);
    CHECK(d.spec("Rainfall").levels.size() == 4);
    CHECK(d.spec("RainyDuring").kind == VariableKind::discrete);
}

TEST_CASE("recoding is invariant to monotone transforms") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> v(50), w(50);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = z(rng);
        w[i] = std::exp(3.0 * v[i]) + 1.0;
    }
    for (int bins : {3, 4})
        CHECK(recode_quartiles(numeric_data(v, "continuous"), "x", bins).column("x").level ==
              recode_quartiles(numeric_data(w, "continuous"), "x", bins).column("x").level);
}

TEST_CASE("dummy coding block sizes") {
    const Schema s = schema_from(
        "y,discrete,response\n"
        "net,nominal,explanatory,no|yes\n"
        "season,nominal,explanatory,1|2|3|4\n"
        "village,nominal,fixed-effect-group,V1|V2|V3|V4|V5|V6|V7|V8|V9\n");
    const Dataset d = testing::random_dataset(s, 72, 2);
    const DesignMatrix plain = encode_design(d, Scenario::original);
    CHECK(plain.groups.size() == 2);
    CHECK(plain.groups[*plain.find_group("net")].count == 1);
    CHECK(plain.groups[*plain.find_group("season")].count == 3);
    const DesignMatrix with_village = encode_design(d, Scenario::original_village);
    CHECK(with_village.groups[*with_village.find_group("village")].count == 8);
    // Reference cell is the first declared level.
    CHECK(plain.columns[plain.groups[1].first].name == "season=2");
}

TEST_CASE("village scenario requires a fixed-effect group") {
    const Dataset d = dataset_from(schema_from(kSmallSchema), "y,net\n0,no\n1,yes\n2,no\n");
    CHECK_THROWS_AS(encode_design(d, Scenario::original_village), InputError);
}

TEST_CASE("unobserved level is dropped, not kept as a zero column") {
    const Schema s = schema_from("y,discrete,response\nc,nominal,explanatory,a|b|c\n");
    const DesignMatrix m = encode_design(dataset_from(s, "y,c\n1,a\n2,b\n3,a\n"), Scenario::original);
    CHECK(m.cols() == 1);
    CHECK(m.dropped == std::vector<std::string>{"c=c"});
}

TEST_CASE("numeric 2,4,6 standardizes to -1,0,1") {
    Eigen::MatrixXd m(3, 1);
    m << 2, 4, 6;
    const auto sc = standardize_columns(m);
    CHECK(sc[0].center == doctest::Approx(4.0));
    CHECK(sc[0].scale == doctest::Approx(2.0));
    CHECK(m(0, 0) == doctest::Approx(-1.0));
    CHECK(m(1, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("standardization is idempotent") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(3.0, 5.0);
    Eigen::MatrixXd m(40, 5);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = z(rng);
    standardize_columns(m);
    const Eigen::MatrixXd once = m;
    const auto again = standardize_columns(m);
    CHECK((m - once).lpNorm<Eigen::Infinity>() < 1e-12);
    for (const Standardization& s : again) {
        CHECK(std::abs(s.center) < 1e-12);
        CHECK(std::abs(s.scale - 1.0) < 1e-12);
    }
}

TEST_CASE("pairwise expansion counts") {
    for (std::size_t k = 2; k <= 20; ++k) {
        const Schema s = schema_from(testing::numeric_schema(k));
        const DesignMatrix m = expand_interactions(encode_design(testing::random_dataset(s, 60, k), Scenario::original));
        CHECK(m.groups.size() == k + k * (k - 1) / 2);
    }
    const Schema survey = load_schema(std::filesystem::path(LOLO_SOURCE_DIR) / "data/survey_schema.txt");
    const DesignMatrix m = expand_interactions(encode_design(testing::random_dataset(survey, 300, 1), Scenario::original));
    CHECK(m.groups.size() == 136);
}

TEST_CASE("nominal by numeric block has two columns") {
    const Schema s = schema_from("y,discrete,response\nc,nominal,explanatory,a|b|c\nx,continuous,explanatory\n");
    const DesignMatrix m = expand_interactions(
        encode_design(dataset_from(s, "y,c,x\n1,a,0.5\n2,b,1.5\n0,c,-1\n4,a,2\n3,b,0\n1,c,3\n"), Scenario::original));
    const Group& g = m.groups[*m.find_group("c:x")];
    CHECK(g.count == 2);
    // Direct construction: indicator of level b times x.
    const std::vector<double> expected{0, 1.5, 0, 0, 0, 0};
    for (Eigen::Index i = 0; i < 6; ++i) CHECK(m.raw(i, static_cast<Eigen::Index>(g.first)) == expected[static_cast<std::size_t>(i)]);
}

TEST_CASE("every column belongs to exactly one group and maps back to its variables") {
    const Schema survey = load_schema(std::filesystem::path(LOLO_SOURCE_DIR) / "data/survey_schema.txt");
    const DesignMatrix m = expand_interactions(encode_design(testing::random_dataset(survey, 300, 5), Scenario::recoded));
    std::vector<int> owners(m.cols(), 0);
    for (const Group& g : m.groups)
        for (std::size_t c = g.first; c < g.first + g.count; ++c) {
            ++owners[c];
            std::set<std::string> vars;
            for (const Factor& f : m.columns[c].factors) vars.insert(f.variable);
            CHECK(vars == std::set<std::string>(g.variables.begin(), g.variables.end()));
        }
    CHECK(std::all_of(owners.begin(), owners.end(), [](int o) { return o == 1; }));
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
        const auto col = m.values.col(j);
        CHECK(std::abs(col.mean()) < 1e-10);
        CHECK(std::abs((col.array() - col.mean()).square().sum() / (col.size() - 1) - 1.0) < 1e-10);
    }
}

TEST_CASE("encode_like uses the reference constants") {
    const Schema s = schema_from(testing::numeric_schema(3));
    const Dataset train = testing::random_dataset(s, 50, 1);
    Dataset test = testing::random_dataset(s, 10, 2);
    const DesignMatrix ref = expand_interactions(encode_design(train, Scenario::original));
    const DesignMatrix like = encode_like(ref, test);
    REQUIRE(like.cols() == ref.cols());
    for (std::size_t j = 0; j < ref.cols(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        for (Eigen::Index i = 0; i < like.values.rows(); ++i)
            CHECK(like.values(i, jj) == doctest::Approx((like.raw(i, jj) - ref.scaling[j].center) / ref.scaling[j].scale));
    }
}

TEST_CASE("design and group map output") {
    const Schema s = schema_from(testing::numeric_schema(2));
    const DesignMatrix m = expand_interactions(encode_design(testing::random_dataset(s, 8, 1), Scenario::original));
    std::ostringstream design, groups;
    write_design(design, m);
    write_group_map(groups, m);
    CHECK(design.str().substr(0, design.str().find('\n')) == "x1,x2,x1:x2");
    CHECK(groups.str().find("x1:x2") != std::string::npos);
}
}
