#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carisk/market_model.hpp"
#include "carisk/monte_carlo.hpp"
#include "carisk/oracle.hpp"

namespace carisk {

/// Market inputs as quoted in practice: per-asset return standard
/// deviations, their correlation matrix and excess returns.
struct MarketDataset {
    std::string id;
    Vector gammas;
    Matrix correlation;
    Vector excess;
};

/// The two three-asset reference markets (ids "1" and "2"), both with
/// standard deviations (0.2, 0.25, 0.3). Throws InvalidInput for other ids.
MarketDataset reference_dataset(int id);

struct GridSpec {
    double min = 0.0;
    double max = 1.0;
    int points = 2;

    /// Evenly spaced values min..max inclusive.
    std::vector<double> values() const;
};

struct ExperimentConfig {
    std::vector<MarketDataset> datasets = {reference_dataset(1), reference_dataset(2)};
    /// Riskless rate. Never enters the optimal portfolios; only wealth
    /// levels and log-return quantiles depend on it.
    double rate = 0.02;
    Index first_count = 1;
    std::vector<double> deltas = {0.3, 0.6, 0.9};
    GridSpec sigma11_grid = {0.2, 2.0, 50};
    GridSpec delta_grid = {0.0, 0.99, 100};
    /// First-group volatilities held fixed, one reduction curve each.
    std::vector<double> reduction_sigma11 = {0.1, 0.15, 0.2};
    double alpha = 0.05;
    double horizon = 5.0;
    double initial_wealth = 1.0;
    McConfig monte_carlo;
    OracleConfig oracle;
    std::string output_dir = "out";

    /// Throws Error (InvalidInput, InvalidThreshold, OutOfRange, ...) on any
    /// inconsistent field, including datasets that fail market validation.
    void validate() const;
    RiskSpec risk_spec() const { return RiskSpec(alpha, horizon); }
};

/// Volatility from (gammas, correlation) by Cholesky, partitioned after the
/// first `first_count` assets.
BlockMarket build_block_market(const MarketDataset& dataset, double rate, Index first_count);

namespace row_status {
inline constexpr const char* kOk = "ok";
inline constexpr const char* kNegativeRiskless = "negative_pi0";
inline constexpr const char* kDegenerate = "degenerate_direction";
inline constexpr const char* kUndefinedReduction = "undefined_reduction";
}  // namespace row_status

/// One grid point of an experiment. Fields that cannot be computed at a
/// degenerate point hold NaN and the status says why.
struct ResultRow {
    std::string experiment;
    std::string dataset;
    double delta = 0.0;
    double sigma11 = 0.0;
    double var_unconstrained = 0.0;
    double var_constrained = 0.0;
    double pi0_unconstrained = 0.0;
    double pi0_constrained = 0.0;
    double car_unconstrained = 0.0;
    double car_constrained = 0.0;
    double reduction_percent = 0.0;
    std::string status = row_status::kOk;
};

struct ExperimentTable {
    std::string experiment;
    std::string dataset;
    /// Sorted on (delta, sigma11).
    std::vector<ResultRow> rows;
};

namespace experiment_id {
inline constexpr const char* kVariance = "variance";
inline constexpr const char* kRiskless = "riskless";
inline constexpr const char* kReduction = "reduction";
}  // namespace experiment_id

/// Solves both problems at one (sigma11, delta) point. The block market's
/// first diagonal entry is replaced by sigma11; sigma21 and sigma22 keep
/// their Cholesky values.
ResultRow evaluate_point(const BlockMarket& base, const std::string& dataset,
                         const std::string& experiment, double sigma11, double delta,
                         const RiskSpec& spec);

/// Log-return variances of both optima across the sigma11 grid, per delta.
std::vector<ExperimentTable> run_variance_sweep(const ExperimentConfig& config);

/// Riskless fractions 1 - 1'pi of both optima across the sigma11 grid.
std::vector<ExperimentTable> run_riskless_fraction_sweep(const ExperimentConfig& config);

struct ReductionCrossing {
    std::string dataset;
    double sigma11 = 0.0;
    /// Smallest delta at which the variance reduction reaches 50%, linearly
    /// interpolated on the delta grid; empty if it never does.
    std::optional<double> delta;
};

struct ReductionSweep {
    std::vector<ExperimentTable> tables;
    std::vector<ReductionCrossing> crossings;
};

/// Variance reduction 100 (1 - Var_c / Var_u) across the delta grid for
/// each fixed sigma11 in reduction_sigma11.
ReductionSweep run_variance_reduction_sweep(const ExperimentConfig& config);

/// Crossing of the 50% line for one curve (rows of a single sigma11,
/// sorted by delta).
std::optional<double> half_reduction_crossing(const std::vector<ResultRow>& curve);

}  // namespace carisk
