#pragma once
// Unpenalized Poisson log-linear model.
//
// The log-likelihood includes the -ln(y!) constant, and deviance is taken
// against the usual Poisson saturated model (mu = y), so deviance values
// differ from a "saturated log-likelihood = 0" convention by a data-only
// constant. Any argmin over models fitted to the same data is unaffected.

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lolo/features.hpp"

namespace lolo {

enum class Frame { standardized, original };

struct Coefficients {
    double intercept = 0.0;
    Eigen::VectorXd beta;  // aligned with design columns
    Frame frame = Frame::standardized;
};

Coefficients to_original(const Coefficients& c, std::span<const Standardization> scaling);
Coefficients to_standardized(const Coefficients& c, std::span<const Standardization> scaling);

struct FitResult {
    Coefficients coefficients;
    double log_likelihood = 0.0;
    double deviance = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::size_t> dropped_columns;  // linearly dependent, coefficient fixed at 0
};

struct IrlsOptions {
    int max_iterations = 100;
    double deviance_tol = 1e-10;  // relative change
    double gradient_tol = 1e-8;   // max-norm of X'(y - mu)
    double rank_tol = 1e-8;       // relative residual norm for a dependent column
};

/// eta = intercept + X beta.
Eigen::VectorXd linear_predictor(double intercept, const Eigen::VectorXd& beta,
                                 const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Sum of y*eta - exp(eta) - ln(y!). Throws NumericalError naming the row if
/// eta is not finite.
double log_likelihood(double intercept, const Eigen::VectorXd& beta,
                      const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y);
double log_likelihood(const Coefficients& c, const DesignMatrix& design, std::span<const double> y);

/// Gradient of the log-likelihood: (sum(y - mu), X'(y - mu)).
Eigen::VectorXd score(double intercept, const Eigen::VectorXd& beta,
                      const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y);

/// mu = exp(intercept + x beta), using standardized or raw columns to match
/// the coefficient frame.
std::vector<double> predict_mu(const Coefficients& c, const DesignMatrix& design);

/// Saturated log-likelihood sum(y ln y - y - ln y!), with 0 ln 0 = 0.
double saturated_log_likelihood(std::span<const double> y);

/// 2 sum[y ln(y/mu) - (y - mu)]; throws InputError if any mu <= 0.
double deviance(std::span<const double> y, std::span<const double> mu);

/// Maximum-likelihood fit over an intercept plus all columns of `x`, by
/// Fisher scoring with step halving. Columns that are linearly dependent on
/// the intercept and earlier columns are dropped (coefficient 0) and listed.
FitResult fit_irls(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y,
                   const IrlsOptions& options = {});

/// Fit restricted to `columns` of the standardized design (all columns when
/// empty). Coefficients come back in the standardized frame at full width,
/// zero outside the subset.
FitResult fit_irls(const DesignMatrix& design, std::span<const double> y,
                   std::optional<std::span<const std::size_t>> columns = std::nullopt,
                   const IrlsOptions& options = {});

}  // namespace lolo
