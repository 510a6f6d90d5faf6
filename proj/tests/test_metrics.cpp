#include <doctest.h>

#include <cmath>
#include <random>

#include "lolo/error.hpp"
#include "lolo/glm.hpp"
#include "lolo/metrics.hpp"

using namespace lolo;

namespace {

PresenceMatrix matrix(std::vector<std::string> groups, std::vector<std::vector<std::uint8_t>> rows) {
    PresenceMatrix m;
    m.groups = std::move(groups);
    for (std::size_t k = 0; k < rows.size(); ++k) m.fold_labels.push_back("F" + std::to_string(k + 1));
    m.at_min = rows;
    m.at_1se = std::move(rows);
    return m;
}

QualityReport stored_bglm() {
    QualityReport r;
    r.method = "B-GLM";
    r.mean = 3.75;
    r.deviance = 62.29;
    r.std = std::sqrt(62.29);
    r.absolute_risk = 3.88;
    r.prediction_power = 73.53;
    return r;
}

}  // namespace

TEST_SUITE("metrics") {
TEST_CASE("accuracy boundary is inclusive") {
    const std::vector<double> y{3};
    CHECK(prediction_accuracy(y, std::vector<double>{3.5}) == std::vector<int>{1});
    CHECK(prediction_accuracy(y, std::vector<double>{3.51}) == std::vector<int>{0});
    CHECK(prediction_accuracy(std::vector<double>{0, 2, 5}, std::vector<double>{0.4, 2.6, 5.0}) ==
          std::vector<int>{1, 0, 1});
}

TEST_CASE("power counts accurate predictions") {
    std::mt19937_64 rng(3);
    std::poisson_distribution<int> pois(3.0);
    std::uniform_real_distribution<double> u(0.0, 8.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> y(37), yhat(37);
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = pois(rng);
            yhat[i] = u(rng);
        }
        const auto acc = prediction_accuracy(y, yhat);
        int hits = 0;
        for (int a : acc) hits += a;
        const double power = prediction_power(y, yhat);
        CHECK(power == doctest::Approx(100.0 * hits / 37.0));
        CHECK(power >= 0.0);
        CHECK(power <= 100.0);
    }
}

TEST_CASE("perfect predictions") {
    const std::vector<double> y{1, 4, 2, 7};
    const QualityReport r = quality_summary(y, y, holdout_deviance(y, y), "exact");
    CHECK(r.prediction_power == 100.0);
    CHECK(r.absolute_risk == 0.0);
    CHECK(r.std == 0.0);
    CHECK(r.mean == 3.5);
}

TEST_CASE("two-observation hand example") {
    const std::vector<double> y{1, 1}, yhat{1.4, 2.0};
    const QualityReport r = quality_summary(y, yhat, holdout_deviance(y, yhat), "m");
    CHECK(r.prediction_power == 50.0);
    CHECK(r.absolute_risk == doctest::Approx(0.7));
    CHECK(r.quadratic_risk == doctest::Approx((0.16 + 1.0) / 2));
    CHECK(r.mean == doctest::Approx(1.7));
}

TEST_CASE("hold-out deviance is the per-observation Poisson deviance") {
    const std::vector<double> y{0, 3, 5}, yhat{1.5, 1.5, 4.0};
    CHECK(holdout_deviance(y, yhat) == doctest::Approx(deviance(y, yhat) / 3.0));
    const std::vector<double> zero_pred{0.0, 3.0, 5.0};
    CHECK(std::isfinite(holdout_deviance(y, zero_pred)));
    CHECK_THROWS_AS(holdout_deviance(std::vector<double>{}, std::vector<double>{}), InputError);
}

TEST_CASE("std is the square root of deviance") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.5, 6.0);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> y{1, 0, 4, 2, 7}, yhat(5);
        for (double& v : yhat) v = u(rng);
        const double d = holdout_deviance(y, yhat);
        CHECK(std::abs(quality_summary(y, yhat, d, "m").std - std::sqrt(d)) < 1e-10);
    }
}

TEST_CASE("frequent-variable thresholds") {
    const PresenceMatrix all = matrix({"a"}, {{1}, {1}, {1}});
    CHECK(frequent_variables(all, LambdaRule::min, 100).members == std::vector<std::string>{"a"});
    std::vector<std::vector<std::uint8_t>> rows(9, {1});
    rows[0] = {0};
    rows[1] = {0};
    const PresenceMatrix seven = matrix({"b"}, rows);
    CHECK(frequent_variables(seven, LambdaRule::min, 78).members.empty());
    CHECK(frequent_variables(seven, LambdaRule::min, 77).members == std::vector<std::string>{"b"});
    const PresenceMatrix none = matrix({"a", "b"}, {{0, 0}, {0, 0}});
    for (double s : {1.0, 50.0, 100.0}) CHECK(frequent_variables(none, LambdaRule::one_se, s).members.empty());
    CHECK_THROWS_AS(frequent_variables(all, LambdaRule::min, 0.5), InputError);
    CHECK_THROWS_AS(frequent_variables(all, LambdaRule::min, 101), InputError);
}

TEST_CASE("frequent set shrinks as the threshold rises") {
    std::mt19937_64 rng(5);
    std::vector<std::string> groups;
    for (int g = 0; g < 12; ++g) groups.push_back("g" + std::to_string(g));
    std::vector<std::vector<std::uint8_t>> rows(9, std::vector<std::uint8_t>(12));
    for (auto& r : rows)
        for (auto& v : r) v = static_cast<std::uint8_t>(rng() % 2);
    const PresenceMatrix m = matrix(groups, rows);
    const auto freq = presence_frequencies(m, LambdaRule::min);
    std::size_t previous = groups.size() + 1;
    for (int s = 1; s <= 100; ++s) {
        const auto set = frequent_variables(m, LambdaRule::min, s);
        CHECK(set.members.size() <= previous);
        previous = set.members.size();
        std::size_t expected = 0;
        for (double f : freq) expected += f >= s;
        CHECK(set.members.size() == expected);
    }
}

TEST_CASE("half-up rounding on the decimal form") {
    CHECK(round2(2.675) == 2.68);
    CHECK(round2(1.005) == 1.01);
    CHECK(round2(-1.005) == -1.01);
    CHECK(round2(7.8924) == 7.89);
    CHECK(round2(3.0) == 3.0);
}

TEST_CASE("stored reference row reproduces") {
    const std::vector<QualityReport> rows{stored_bglm()};
    const std::string t = emit_summary_table(rows);
    CHECK(t == "Method,Mean,Deviance,Std,Absolute risk,Prediction Power (%)\n"
               "B-GLM,3.75,62.29,7.89,3.88,73.53\n");
}

TEST_CASE("layout cases") {
    QualityReport a = stored_bglm();
    a.quadratic_risk = 21.456;
    QualityReport b;
    b.method = "LOLO DCV lambda_min";
    b.mean = 3.1;
    b.deviance = 2.5;
    b.std = std::sqrt(2.5);
    b.absolute_risk = 1.234;
    b.prediction_power = 28.4722;
    const std::vector<QualityReport> rows{a, b};
    const std::string quad = emit_summary_table(rows, TableStyle::delimited, true);
    CHECK(quad.substr(0, quad.find('\n')) ==
          "Method,Mean,Deviance,Std,Absolute risk,Prediction Power (%),Quadratic risk (extra)");
    CHECK(quad.find("B-GLM,3.75,62.29,7.89,3.88,73.53,21.46\n") != std::string::npos);
    const std::string aligned = emit_summary_table(rows, TableStyle::aligned);
    CHECK(aligned.find("\nB-GLM    ") != std::string::npos);
    CHECK(aligned.find("73.53\n") != std::string::npos);
    std::size_t width = std::string::npos;
    std::size_t start = 0;
    while (start < aligned.size()) {
        const std::size_t end = aligned.find('\n', start);
        const std::size_t len = end - start;
        if (width == std::string::npos) width = len;
        CHECK(len == width);
        start = end + 1;
    }
    CHECK(emit_summary_table(std::vector<QualityReport>{}) ==
          "Method,Mean,Deviance,Std,Absolute risk,Prediction Power (%)\n");
}

TEST_CASE("delimited table round-trips") {
    QualityReport b = stored_bglm();
    b.method = "Var freq lambda_1se";
    const std::vector<QualityReport> rows{stored_bglm(), b};
    for (bool quad : {false, true}) {
        const auto back = parse_summary_table(emit_summary_table(rows, TableStyle::delimited, quad));
        REQUIRE(back.size() == 2);
        CHECK(back[1].method == "Var freq lambda_1se");
        CHECK(back[0].deviance == 62.29);
        CHECK(back[0].std == 7.89);
    }
    CHECK_THROWS_AS(parse_summary_table("Mean,Method\n"), InputError);
}

TEST_CASE("frequency plot data") {
    CHECK(emit_frequency_plot_data(matrix({"b", "a"}, {{1, 1}, {1, 0}}), LambdaRule::min) ==
          "group,frequency\nb,100\na,50\n");
    CHECK(emit_frequency_plot_data(matrix({"b", "a", "c"}, {{1, 1, 0}, {0, 0, 0}}), LambdaRule::min) ==
          "group,frequency\na,50\nb,50\nc,0\n");
    PresenceMatrix m = matrix({"x", "y"}, {{0, 1}, {0, 1}, {1, 1}, {0, 0}});
    m.at_1se = {{1, 0}, {1, 0}, {1, 0}, {1, 0}};
    CHECK(emit_frequency_plot_data(m, LambdaRule::min) == "group,frequency\ny,75\nx,25\n");
    CHECK(emit_frequency_plot_data(m, LambdaRule::one_se) == "group,frequency\nx,100\ny,0\n");
}

TEST_CASE("rule names") {
    CHECK(to_string(LambdaRule::min) == "lambda_min");
    CHECK(to_string(LambdaRule::one_se) == "lambda_1se");
}
}
