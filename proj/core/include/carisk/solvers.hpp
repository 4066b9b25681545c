#pragma once

#include <optional>

#include "carisk/market_model.hpp"

namespace carisk {

/// Optimal constant-proportion portfolio together with the quantities the
/// analytic solution produces along the way.
struct PortfolioSolution {
    Vector pi;
    /// Lagrange multiplier of the correlation constraint; empty for the
    /// unconstrained problem.
    std::optional<double> lambda;
    /// Ellipse radius |sigma' pi|.
    double epsilon = 0.0;
    double car = 0.0;
    /// Correlation constraint holds with equality (always the case when
    /// pi != 0 in the constrained problem).
    bool binding = false;
};

/// Corr(log X(T), log Y(T)) <= -delta against a benchmark, delta in [0, 1).
class ConstraintSpec {
public:
    ConstraintSpec(BenchmarkPortfolio benchmark, double delta);

    const BenchmarkPortfolio& benchmark() const noexcept { return benchmark_; }
    double delta() const noexcept { return delta_; }

private:
    BenchmarkPortfolio benchmark_;
    double delta_;
};

/// Relative tolerance on sin^2 of the angle between sigma^{-1} b and
/// sigma' eta below which the constrained problem is degenerate.
inline constexpr double kDegenerateDirectionTolerance = 1e-12;

/// Maximizer of b'pi on the ellipse |sigma' pi| = epsilon:
/// epsilon (sigma sigma')^{-1} b / |sigma^{-1} b|.
Vector ellipse_maximizer(const MarketModel& market, double epsilon);

/// Minimum-CaR portfolio without constraints:
///   pi* = (z/sqrt(T) + |sigma^{-1} b|)^+ (sigma sigma')^{-1} b / |sigma^{-1} b|,
///   CaR* = -(T/2) [(z/sqrt(T) + |sigma^{-1} b|)^+]^2.
PortfolioSolution solve_unconstrained(const MarketModel& market, const RiskSpec& spec);

/// Optimal ellipse radius of the Lagrangian for a fixed multiplier:
///   (1/T) (z sqrt(T) - lambda delta |sigma' eta| + |sigma^{-1} b T - lambda sigma' eta|)^+.
double epsilon_star(double lambda, const MarketModel& market, const RiskSpec& spec,
                    const BenchmarkPortfolio& benchmark, double delta);

/// Minimizer of the Lagrangian over pi for a fixed multiplier: the
/// ellipse-boundary optimum at radius epsilon_star(lambda).
Vector lagrangian_minimizer(double lambda, const MarketModel& market, const RiskSpec& spec,
                            const BenchmarkPortfolio& benchmark, double delta);

/// sqrt(|sigma^{-1} b|^2 |sigma' eta|^2 - (b'eta)^2), computed through the
/// component of sigma^{-1} b orthogonal to sigma' eta to avoid cancellation.
double benchmark_orthogonal_gap(const MarketModel& market, const BenchmarkPortfolio& benchmark);

/// Closed-form minimum-CaR portfolio under Corr(log X, log Y) <= -delta.
/// Throws DegenerateDirection when sigma' eta is parallel to sigma^{-1} b.
PortfolioSolution solve_constrained(const MarketModel& market, const RiskSpec& spec,
                                    const ConstraintSpec& constraint);

/// Constrained solution when the benchmark is the growth-optimal portfolio
/// of the first asset group, written in terms of the group prices of risk.
/// Throws DegenerateDirection when theta2 vanishes.
PortfolioSolution solve_pricing_kernel(const BlockMarket& block, const RiskSpec& spec,
                                       double delta);

/// Limits of both optimal portfolios and their log-return variances as the
/// single first-group volatility grows without bound.
struct AsymptoticLimits {
    Vector pi_unconstrained;
    Vector pi_constrained;
    double var_unconstrained = 0.0;
    double var_constrained = 0.0;
};

/// Requires a single first-group asset (UnsupportedPartition otherwise).
AsymptoticLimits asymptotic_portfolios(const BlockMarket& block, const RiskSpec& spec,
                                       double delta);

struct VarianceComparison {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double var_unconstrained = 0.0;
    double var_constrained = 0.0;
    /// 100 (1 - Var_c / Var_u); empty when the unconstrained variance is
    /// zero and the ratio is undefined.
    std::optional<double> reduction_percent;
};

/// Closed-form log-return variances of the unconstrained and
/// pricing-kernel-constrained optima:
///   Var_u = T [(z/sqrt(T) + sqrt(theta1^2 + theta2^2))^+]^2
///   Var_c = T [(z/sqrt(T) + sqrt(1 - delta^2) theta2 - delta theta1)^+]^2
VarianceComparison variance_comparison(const BlockMarket& block, const RiskSpec& spec,
                                       double delta);

}  // namespace carisk
