#pragma once
// L1-penalized Poisson regression by cyclic coordinate descent on the IRLS
// quadratic approximation, and regularization paths over a lambda grid.
//
// Objective, per lambda:  -(1/n) loglik(intercept, beta) + lambda * |beta|_1
// The intercept is never penalized. Columns are expected to be standardized.

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lolo/features.hpp"
#include "lolo/glm.hpp"

namespace lolo {

struct LambdaGrid {
    std::vector<double> values;  // strictly decreasing, values[0] == lambda_max
    double lambda_max = 0.0;
    std::size_t count = 0;
    double min_ratio = 0.0;
};

/// max_j |x_j'(y - ybar)| / n: the smallest lambda at which the
/// intercept-only fit satisfies the KKT conditions. Throws NumericalError when
/// y is identically zero (the path is degenerate).
double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y);

/// Log-uniform grid from lambda_max down to lambda_max * min_ratio.
LambdaGrid build_grid(double lambda_max, std::size_t count, double min_ratio);

/// 0.01 when n > p, else 0.05.
double default_min_ratio(std::size_t n, std::size_t p);

struct LassoOptions {
    int max_outer = 100;        // IRLS (quadratic approximation) updates
    int max_inner = 1000;       // coordinate-descent cycles per update
    double inner_tol = 1e-9;    // max coefficient change in a cycle
    double kkt_tol = 1e-7;
    double weight_floor = 1e-10;
    double eta_clamp = 30.0;
};

struct PenalizedFit {
    Coefficients coefficients;  // standardized frame
    int outer_iterations = 0;
    int inner_cycles = 0;
    double kkt_violation = 0.0;
};

/// Solve the penalized problem at one lambda. `warm_start`, when given, must
/// have one coefficient per column. Throws NumericalError if the KKT
/// conditions are not met within the iteration caps.
PenalizedFit fit_penalized(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y,
                           double lambda, const Coefficients* warm_start = nullptr,
                           const LassoOptions& options = {});

/// -(1/n) loglik (without the ln y! constant) + lambda |beta|_1.
double penalized_objective(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y,
                           double lambda, double intercept, const Eigen::VectorXd& beta);

/// Largest violation of the subgradient conditions, with g the gradient of
/// -(1/n) loglik: |g_0| for the intercept, max(0, |g_j| - lambda) for zero
/// coefficients and |g_j + lambda sign(beta_j)| for nonzero ones.
double kkt_violation(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y,
                     double lambda, const Coefficients& c);

struct LassoPath {
    LambdaGrid grid;
    std::vector<Coefficients> coefficients;            // standardized frame
    std::vector<std::vector<std::size_t>> active_sets;  // group indices
    std::vector<double> train_deviance;
    std::optional<std::size_t> failed_at;  // set when a truncated path stopped early
};

enum class PathFailure { propagate, truncate };

/// Indices of groups with at least one nonzero coefficient.
std::vector<std::size_t> active_groups(const DesignMatrix& design, const Eigen::VectorXd& beta);

/// Warm-started fits along the grid, largest lambda first. Solver failures
/// are rethrown with the grid index, or with PathFailure::truncate the path
/// ends at the last successful point (a failure at the first point still
/// throws).
LassoPath fit_path(const DesignMatrix& design, std::span<const double> y, const LambdaGrid& grid,
                   const LassoOptions& options = {}, PathFailure on_failure = PathFailure::propagate);

/// One record per (lambda, group): lambda,group,coefficient_norm (L2 norm of
/// the group's standardized coefficients).
void write_path(std::ostream& out, const DesignMatrix& design, const LassoPath& path);

}  // namespace lolo
