#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lolo/features.hpp"

namespace lolo::testing {

inline Schema schema_from(const std::string& text) {
    std::istringstream in(text);
    return parse_schema(in);
}

inline Dataset dataset_from(const Schema& schema, const std::string& csv) {
    std::istringstream in(csv);
    return load_dataset(in, schema);
}

struct Problem {
    Eigen::MatrixXd x;
    std::vector<double> y;
    Eigen::VectorXd beta;
    double intercept = 0.0;
};

// Standard-normal columns, standardized, with a sparse Poisson truth.
inline Problem random_problem(std::size_t n, std::size_t p, std::uint64_t seed, std::size_t support = 2,
                              double effect = 0.4, double intercept = 0.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Problem out;
    out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < out.x.rows(); ++i)
        for (Eigen::Index j = 0; j < out.x.cols(); ++j) out.x(i, j) = z(rng);
    standardize_columns(out.x);
    out.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < support && j < p; ++j)
        out.beta(static_cast<Eigen::Index>(j)) = (j % 2 ? -effect : effect);
    out.intercept = intercept;
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double eta = intercept + out.x.row(static_cast<Eigen::Index>(i)).dot(out.beta);
        out.y[i] = static_cast<double>(std::poisson_distribution<long long>(std::exp(eta))(rng));
    }
    return out;
}

// Design over plain numeric columns x1..xp, one group per column.
inline DesignMatrix design_of(const Eigen::MatrixXd& x) {
    DesignMatrix d;
    d.values = x;
    d.raw = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const std::string name = "x" + std::to_string(j + 1);
        d.groups.push_back({name, {name}, static_cast<std::size_t>(j), 1});
        d.columns.push_back({name, {{name, std::nullopt}}});
        d.scaling.push_back({});
    }
    return d;
}

}  // namespace lolo::testing

namespace lolo::testing {

// Random rows for any schema: nominal levels cycle with a random offset so
// every declared level occurs, numeric values are integers or normals.
inline Dataset random_dataset(const Schema& schema, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Dataset d;
    d.schema = schema;
    d.n = n;
    d.columns.resize(schema.size());
    for (std::size_t v = 0; v < schema.size(); ++v) {
        const VariableSpec& s = schema[v];
        if (s.kind == VariableKind::nominal) {
            const auto levels = static_cast<int>(s.levels.size());
            std::vector<int> lv(n);
            for (std::size_t i = 0; i < n; ++i) lv[i] = static_cast<int>(i % static_cast<std::size_t>(levels));
            std::shuffle(lv.begin(), lv.end(), rng);
            d.columns[v].level = lv;
        } else if (s.role == VariableRole::response) {
            std::poisson_distribution<int> pois(3.0);
            for (std::size_t i = 0; i < n; ++i) d.columns[v].numeric.push_back(pois(rng));
        } else if (s.kind == VariableKind::discrete) {
            std::uniform_int_distribution<int> u(0, 9);
            for (std::size_t i = 0; i < n; ++i) d.columns[v].numeric.push_back(u(rng));
        } else {
            std::normal_distribution<double> z(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) d.columns[v].numeric.push_back(z(rng));
        }
    }
    return d;
}

inline std::string numeric_schema(std::size_t k) {
    std::string s;
    for (std::size_t j = 1; j <= k; ++j) s += "x" + std::to_string(j) + ",continuous,explanatory\n";
    return s + "y,discrete,response\n";
}

}  // namespace lolo::testing
