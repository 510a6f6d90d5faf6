#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lolo/cv.hpp"
#include "lolo/error.hpp"
#include "support.hpp"

using namespace lolo;
using testing::design_of;
using testing::random_problem;

namespace {

Dataset leveled(const std::vector<int>& sizes, std::uint64_t seed = 1) {
    std::string levels;
    for (std::size_t l = 0; l < sizes.size(); ++l) levels += (l ? "|L" : "L") + std::to_string(l + 1);
    const Schema s = testing::schema_from("y,discrete,response\nx,continuous,explanatory\nh,nominal,level-key," +
                                          levels + "\n");
    std::string csv = "y,x,h\n";
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < sizes.size(); ++l)
        for (int i = 0; i < sizes[l]; ++i) csv += std::to_string(rng() % 5) + ",0.5,L" + std::to_string(l + 1) + "\n";
    return testing::dataset_from(s, csv);
}

void check_plan(const Dataset& d, const FoldPlan& plan, bool keyed) {
    REQUIRE(plan.assignment.size() == d.n);
    std::vector<std::size_t> count(plan.folds, 0);
    for (std::size_t f : plan.assignment) {
        REQUIRE(f < plan.folds);
        ++count[f];
    }
    for (std::size_t c : count) CHECK(c > 0);
    if (keyed) {
        std::map<int, std::size_t> fold_of_level;
        const auto& lv = d.column("h").level;
        for (std::size_t i = 0; i < d.n; ++i) {
            auto [it, fresh] = fold_of_level.emplace(lv[i], plan.assignment[i]);
            CHECK(it->second == plan.assignment[i]);
        }
    }
    for (std::size_t f = 0; f < plan.folds; ++f) CHECK(plan.members(f).size() + plan.complement(f).size() == d.n);
}

}  // namespace

TEST_SUITE("cv") {
TEST_CASE("one level per fold keeps declaration order") {
    const Dataset d = leveled({4, 4, 4, 4, 4, 4, 4, 4, 4});
    const FoldPlan plan = build_folds(d, std::string("h"), 9, 1);
    check_plan(d, plan, true);
    for (std::size_t f = 0; f < 9; ++f) CHECK(plan.labels[f] == "L" + std::to_string(f + 1));
}

TEST_CASE("uneven levels into two folds") {
    const Dataset d = leveled({5, 5, 1, 1});
    for (std::uint64_t seed = 0; seed < 20; ++seed) check_plan(d, build_folds(d, std::string("h"), 2, seed), true);
}

TEST_CASE("fold plans are deterministic and cover every row") {
    const Dataset d = leveled({3, 7, 2, 9, 4, 4});
    CHECK(build_folds(d, std::string("h"), 3, 42).assignment == build_folds(d, std::string("h"), 3, 42).assignment);
    CHECK(build_folds(d, std::nullopt, 5, 42).assignment == build_folds(d, std::nullopt, 5, 42).assignment);
    check_plan(d, build_folds(d, std::string("h"), 3, 42), true);
    check_plan(d, build_folds(d, std::nullopt, 5, 42), false);
}

TEST_CASE("fold count preconditions") {
    const Dataset d = leveled({3, 3, 3});
    CHECK_THROWS_AS(build_folds(d, std::string("h"), 1, 1), InputError);
    CHECK_THROWS_AS(build_folds(d, std::string("h"), 4, 1), InputError);
    CHECK(distinct_levels(d, "h") == 3);
}

TEST_CASE("increasing curve selects lambda_max for both rules") {
    const std::vector<double> grid{1, 0.1, 0.01}, mean{1, 2, 3}, se{0.1, 0.1, 0.1};
    const LambdaSelection s = select_lambda(grid, mean, se);
    CHECK(s.lambda_min == 1);
    CHECK(s.lambda_1se == 1);
}

TEST_CASE("three-point worked example") {
    const std::vector<double> grid{1, 0.1, 0.01}, mean{10, 4, 6}, se{1, 1, 1};
    const LambdaSelection s = select_lambda(grid, mean, se);
    CHECK(s.lambda_min == 0.1);
    CHECK(s.lambda_1se == 0.1);
    CHECK(s.index_min == 1);
}

TEST_CASE("ties go to the larger lambda") {
    const std::vector<double> grid{1, 0.5, 0.25, 0.125}, mean{3, 2, 2, 2}, se{0, 0, 0, 0};
    const LambdaSelection s = select_lambda(grid, mean, se);
    CHECK(s.index_min == 1);
    CHECK(s.index_1se == 1);
}

TEST_CASE("non-finite scores are skipped; all non-finite is an error") {
    const std::vector<double> grid{1, 0.1, 0.01}, mean{NAN, 4, NAN}, se{1, 1, 1};
    CHECK(select_lambda(grid, mean, se).index_min == 1);
    const std::vector<double> none{NAN, INFINITY, NAN};
    CHECK_THROWS(select_lambda(grid, none, se));
}

TEST_CASE("random curves: lambda_1se >= lambda_min, both on the grid, shift invariant") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    const LambdaGrid grid = build_grid(2.0, 30, 0.01);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> mean(30), se(30), shifted(30);
        for (std::size_t k = 0; k < 30; ++k) {
            mean[k] = u(rng);
            se[k] = 0.2 * u(rng);
            shifted[k] = mean[k] + 17.0;
        }
        const LambdaSelection s = select_lambda(grid.values, mean, se);
        CHECK(s.lambda_1se >= s.lambda_min);
        CHECK(std::find(grid.values.begin(), grid.values.end(), s.lambda_min) != grid.values.end());
        CHECK(std::find(grid.values.begin(), grid.values.end(), s.lambda_1se) != grid.values.end());
        const LambdaSelection t2 = select_lambda(grid.values, shifted, se);
        CHECK(t2.index_min == s.index_min);
        CHECK(t2.index_1se == s.index_1se);
    }
}

TEST_CASE("null data selects near lambda_max") {
    int near = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto p = random_problem(100, 8, seed, 0);
        const DesignMatrix d = design_of(p.x);
        const LambdaGrid grid = build_grid(lambda_max(p.x, p.y), 30, 0.01);
        Dataset rows;
        rows.n = 100;
        const FoldPlan plan = build_folds(rows, std::nullopt, 5, seed);
        const CvCurve c = cv_curve(d, p.y, plan, grid);
        if (c.selection.index_min <= 1) ++near;
        for (double s : c.score_se) CHECK(s >= 0.0);
    }
    CHECK(near > 10);
}

TEST_CASE("strong predictor pulls lambda_min below lambda_max") {
    const auto p = random_problem(100, 8, 3, 1, 0.8);
    Dataset rows;
    rows.n = 100;
    const LambdaGrid grid = build_grid(lambda_max(p.x, p.y), 30, 0.01);
    const CvFit fit = cross_validate(design_of(p.x), p.y, build_folds(rows, std::nullopt, 5, 3), grid);
    CHECK(fit.curve.lambda_min() < grid.lambda_max);
    CHECK(fit.curve.n_effective == 5);
    CHECK(fit.curve.n_active.size() == grid.values.size());
    CHECK(fit.curve.n_active.front() == 0);
}

TEST_CASE("curve is invariant to observation order under the same folds") {
    const auto p = random_problem(80, 6, 5, 2);
    Dataset rows;
    rows.n = 80;
    const FoldPlan plan = build_folds(rows, std::nullopt, 4, 1);
    std::vector<std::size_t> order(80);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(4);
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::MatrixXd xp(80, 6);
    std::vector<double> yp(80);
    FoldPlan pp = plan;
    for (std::size_t i = 0; i < 80; ++i) {
        xp.row(static_cast<Eigen::Index>(i)) = p.x.row(static_cast<Eigen::Index>(order[i]));
        yp[i] = p.y[order[i]];
        pp.assignment[i] = plan.assignment[order[i]];
    }
    const LambdaGrid grid = build_grid(lambda_max(p.x, p.y), 20, 0.01);
    const CvCurve a = cv_curve(design_of(p.x), p.y, plan, grid);
    const CvCurve b = cv_curve(design_of(xp), yp, pp, grid);
    CHECK(a.selection.index_min == b.selection.index_min);
    CHECK(a.selection.index_1se == b.selection.index_1se);
    for (std::size_t k = 0; k < 20; ++k) CHECK(std::abs(a.mean_score[k] - b.mean_score[k]) < 1e-8);
}

TEST_CASE("fold whose training response is all zero is skipped") {
    auto p = random_problem(60, 4, 8);
    Dataset rows;
    rows.n = 60;
    const FoldPlan plan = build_folds(rows, std::nullopt, 3, 8);
    for (std::size_t i = 0; i < 60; ++i)
        if (plan.assignment[i] != 0) p.y[i] = 0.0;
    for (std::size_t i : plan.members(0)) p.y[i] = 2.0;
    const CvCurve c = cv_curve(design_of(p.x), p.y, plan, build_grid(lambda_max(p.x, p.y), 10, 0.05));
    CHECK(c.n_effective == 2);
    CHECK(c.fold_scores[0].empty());
}

TEST_CASE("curve output") {
    const auto p = random_problem(40, 3, 1);
    Dataset rows;
    rows.n = 40;
    const CvFit fit = cross_validate(design_of(p.x), p.y, build_folds(rows, std::nullopt, 4, 1),
                                     build_grid(lambda_max(p.x, p.y), 5, 0.1));
    std::ostringstream out;
    write_curve(out, fit.curve);
    const std::string s = out.str();
    CHECK(s.rfind("lambda,mean_score,score_se,n_active\n", 0) == 0);
    CHECK(s.find("#selected,lambda_min=") != std::string::npos);
    CHECK(std::count(s.begin(), s.end(), '\n') == 7);
}
}
