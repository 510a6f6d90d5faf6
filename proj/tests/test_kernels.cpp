#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lolo/kernels.hpp"
#include "lolo/lasso.hpp"
#include "support.hpp"

using namespace lolo;

namespace {

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)}); }

struct Restore {
    std::string name{kernels::active().name};
    ~Restore() { kernels::select(name); }
};

}  // namespace

TEST_SUITE("kernels") {
TEST_CASE("scalar table is always available and listed first") {
    const auto tables = kernels::available();
    REQUIRE_FALSE(tables.empty());
    CHECK(tables.front()->name == "scalar");
    CHECK_FALSE(kernels::select("no-such-kernel"));
}

TEST_CASE("every variant matches the scalar reference") {
    const kernels::KernelTable& ref = kernels::scalar::table();
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z(0.0, 1.0);
    for (const kernels::KernelTable* t : kernels::available()) {
        CAPTURE(t->name);
        for (std::size_t n = 0; n <= 67; ++n) {
            std::vector<double> a(n), b(n), w(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = z(rng);
                b[i] = z(rng);
                w[i] = std::abs(z(rng));
            }
            CHECK(close(t->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), 1e-12));
            CHECK(close(t->weighted_dot(w.data(), a.data(), b.data(), n),
                        ref.weighted_dot(w.data(), a.data(), b.data(), n), 1e-12));
            CHECK(close(t->weighted_sumsq(w.data(), a.data(), n), ref.weighted_sumsq(w.data(), a.data(), n), 1e-12));
            CHECK(close(t->sum(a.data(), n), ref.sum(a.data(), n), 1e-12));
            std::vector<double> y1 = b, y2 = b;
            t->axpy(0.37, a.data(), y1.data(), n);
            ref.axpy(0.37, a.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i], 1e-12));
        }
    }
}

TEST_CASE("whole path agrees across variants") {
    Restore restore;
    const auto prob = testing::random_problem(120, 15, 3);
    const DesignMatrix design = testing::design_of(prob.x);
    const LambdaGrid grid = build_grid(lambda_max(prob.x, prob.y), 30, 0.01);
    REQUIRE(kernels::select("scalar"));
    const LassoPath ref = fit_path(design, prob.y, grid);
    for (const kernels::KernelTable* t : kernels::available()) {
        CAPTURE(t->name);
        REQUIRE(kernels::select(t->name));
        const LassoPath path = fit_path(design, prob.y, grid);
        for (std::size_t k = 0; k < grid.values.size(); ++k) {
            CHECK(std::abs(path.coefficients[k].intercept - ref.coefficients[k].intercept) < 1e-6);
            CHECK((path.coefficients[k].beta - ref.coefficients[k].beta).lpNorm<Eigen::Infinity>() < 1e-6);
        }
    }
}
}
