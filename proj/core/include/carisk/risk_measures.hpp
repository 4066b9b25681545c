#pragma once

#include "carisk/market_model.hpp"

namespace carisk {

/// Riskless fraction pi0 = 1 - 1'pi of a constant-proportion portfolio.
double riskless_fraction(const Vector& pi);

/// alpha-quantile of the log return log(X(T)/x) over [0, T]:
///   (r + b'pi) T - |sigma' pi|^2 T / 2 + z_alpha |sigma' pi| sqrt(T).
/// Does not depend on the initial wealth x (which must be positive).
double log_return_quantile(const MarketModel& market, const Vector& pi, const RiskSpec& spec,
                           double initial_wealth = 1.0);

/// Capital at risk, rT minus the log-return quantile:
///   -b'pi T + |sigma' pi|^2 T / 2 - z_alpha |sigma' pi| sqrt(T).
double capital_at_risk(const MarketModel& market, const Vector& pi, const RiskSpec& spec);

/// Correlation of log X(T) and log Y(T) for portfolio pi and benchmark eta:
///   pi' sigma sigma' eta / (|sigma' pi| |sigma' eta|).
/// Throws ZeroVolatilityPortfolio if either exposure vanishes.
double log_correlation(const MarketModel& market, const Vector& pi, const Vector& eta);

/// Left-hand side of the convex form of Corr <= -delta:
///   delta |sigma' eta| |sigma' pi| + pi' sigma sigma' eta.
/// Nonpositive values are feasible. Defined everywhere, including pi = 0.
double correlation_constraint(const MarketModel& market, const Vector& pi,
                              const BenchmarkPortfolio& benchmark, double delta);

/// Feasibility of Corr <= -delta. The zero portfolio carries no risk and
/// is reported feasible for every delta >= 0.
bool satisfies_correlation_constraint(const MarketModel& market, const Vector& pi,
                                      const BenchmarkPortfolio& benchmark, double delta,
                                      double tolerance = 0.0);

struct WealthLaw {
    double initial_wealth = 1.0;
    double mean = 0.0;
    double variance = 0.0;
    double log_mean = 0.0;
    double log_variance = 0.0;
};

/// Terminal wealth moments of the lognormal law of X(T).
WealthLaw wealth_law(const MarketModel& market, const Vector& pi, const RiskSpec& spec,
                     double initial_wealth = 1.0);

}  // namespace carisk
