#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "airfare/core.hpp"
#include "airfare/demean.hpp"
#include "airfare/features.hpp"

namespace airfare {

/// Least-squares output on demeaned data. `kept` / `dropped` index the input
/// columns; dropped ones fell below the rank tolerance and get no coefficient.
struct OlsResult {
    Eigen::VectorXd beta;        // one entry per kept column
    std::vector<int> kept;       // ascending input-column indices
    std::vector<int> dropped;    // input-column indices removed as collinear
    Eigen::VectorXd residuals;   // y - X_kept * beta
    Eigen::MatrixXd xtx_inverse; // (X'X)^{-1} over kept columns
};

/**
 * @brief OLS via column-pivoted Householder QR. Columns whose pivot falls
 * below 1e-10 (relative to the largest) are dropped and reported; no
 * intercept is added, the fixed effects absorb it. Throws ValidationError
 * when no usable column remains or rows < usable columns.
 */
OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

/// Rank tolerance used by ols() and the LSDV oracle.
inline constexpr double kRankTolerance = 1e-10;

/**
 * @brief Residual degrees of freedom: n - k_used - absorbed, where absorbed
 * counts L1 levels for the first dimension, L2 - C for the second (C =
 * bipartite connected components) and L3 - 1 for the third. Throws
 * ValidationError when the result is not positive.
 */
long df_residual(long n, long k_used, const FEGroups& groups);

struct InferenceOptions {
    bool robust = false;  // HC1 sandwich instead of classical errors
};

/// Attaches se / t / p / stars to each kept coefficient.
std::vector<CoefficientStat> inference(const OlsResult& fit,
                                       const std::vector<std::string>& names,
                                       const Eigen::MatrixXd& x_demeaned, long df,
                                       const InferenceOptions& options = {});

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
double t_test_p_value(double t_stat, long df);

/// Quantile of the t distribution (for confidence intervals).
double t_quantile(double probability, long df);

struct RSquared {
    double overall = 0.0;  // on original y, fitted = y - u
    double adjusted = 0.0; // 1 - (1 - overall) * (n - 1) / df
    double within = 0.0;   // on demeaned y
};

RSquared r_squared(const Eigen::VectorXd& y_original,
                   const Eigen::VectorXd& y_demeaned,
                   const Eigen::VectorXd& residuals, long df);

/// LSDV oracle output: slope estimates plus the dummy-design rank.
struct LsdvResult {
    Eigen::VectorXd slopes;       // one per X column (basic solution)
    long design_rank = 0;         // rank of [X | dummies]
    long dummy_columns = 0;
};

/**
 * @brief Brute-force reference: expands every FE dimension into explicit
 * dummies (first dimension keeps all levels, later ones drop one), solves
 * plain least squares and returns the slope block. Guarded to n <= 10000 and
 * at most 2000 dummy columns.
 */
LsdvResult lsdv_oracle(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                       const FEGroups& groups);

struct FitOptions {
    InferenceOptions inference;
    DemeanOptions demean;
};

/**
 * @brief End-to-end estimation: applies the model spec's subset filter, builds
 * features and FE keys, demeans, solves, and assembles the full FitResult.
 * Deterministic: equal inputs give bit-identical results.
 */
FitResult fit(const std::vector<FareQuote>& quotes, const HolidayCalendar& calendar,
              const ExogenousData& exogenous, const ModelSpec& spec,
              const FitOptions& options = {});

/// The estimation core on an already-built sample (used by fit and by tests
/// that assemble observations directly).
FitResult fit_observations(const std::vector<PanelObservation>& observations,
                           const std::vector<std::string>& regressor_names,
                           const ModelSpec& spec, const FitOptions& options = {});

/// Subset filter of fit(): origin airports (empty = all) and stop count (-1 = all).
std::vector<FareQuote> apply_subset_filter(const std::vector<FareQuote>& quotes,
                                           const ModelSpec& spec);

}  // namespace airfare
