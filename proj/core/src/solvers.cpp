#include "carisk/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "carisk/error.hpp"
#include "carisk/risk_measures.hpp"

namespace carisk {

namespace {

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

void require_threshold(double delta) {
    if (!(delta >= 0.0 && delta < 1.0)) {
        throw Error(ErrorKind::InvalidThreshold,
                    "correlation threshold must lie in [0, 1), got " + std::to_string(delta));
    }
}

}  // namespace

ConstraintSpec::ConstraintSpec(BenchmarkPortfolio benchmark, double delta)
    : benchmark_(std::move(benchmark)), delta_(delta) {
    require_threshold(delta);
}

Vector ellipse_maximizer(const MarketModel& market, double epsilon) {
    return (epsilon / market.market_price_of_risk().norm()) * market.merton_direction();
}

PortfolioSolution solve_unconstrained(const MarketModel& market, const RiskSpec& spec) {
    const double t = spec.horizon();
    const double sharpe = market.market_price_of_risk().norm();
    const double radius = positive_part(spec.z_alpha() / std::sqrt(t) + sharpe);

    PortfolioSolution sol;
    if (radius == 0.0) {
        sol.pi = Vector::Zero(market.dim());
    } else {
        sol.pi = ellipse_maximizer(market, radius);
    }
    sol.epsilon = market.exposure(sol.pi).norm();
    sol.car = -0.5 * t * radius * radius;
    return sol;
}

double epsilon_star(double lambda, const MarketModel& market, const RiskSpec& spec,
                    const BenchmarkPortfolio& benchmark, double delta) {
    const double t = spec.horizon();
    const Vector direction = market.market_price_of_risk() * t - lambda * benchmark.exposure();
    return positive_part(spec.z_alpha() * std::sqrt(t) -
                         lambda * delta * benchmark.exposure_norm() + direction.norm()) /
           t;
}

Vector lagrangian_minimizer(double lambda, const MarketModel& market, const RiskSpec& spec,
                            const BenchmarkPortfolio& benchmark, double delta) {
    const double t = spec.horizon();
    const double eps = epsilon_star(lambda, market, spec, benchmark, delta);
    if (eps == 0.0) {
        return Vector::Zero(market.dim());
    }
    const double norm =
        (market.market_price_of_risk() * t - lambda * benchmark.exposure()).norm();
    return (eps / norm) * (market.merton_direction() * t - lambda * benchmark.weights());
}

double benchmark_orthogonal_gap(const MarketModel& market, const BenchmarkPortfolio& benchmark) {
    const Vector& u = market.market_price_of_risk();
    const Vector& v = benchmark.exposure();
    const double vv = v.squaredNorm();
    const Vector orthogonal = u - (u.dot(v) / vv) * v;
    return benchmark.exposure_norm() * orthogonal.norm();
}

PortfolioSolution solve_constrained(const MarketModel& market, const RiskSpec& spec,
                                    const ConstraintSpec& constraint) {
    const BenchmarkPortfolio& bench = constraint.benchmark();
    if (bench.weights().size() != market.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "benchmark does not match the market");
    }
    const double delta = constraint.delta();
    const double t = spec.horizon();
    const double z = spec.z_alpha();
    const double u_norm = market.market_price_of_risk().norm();
    const double v_norm = bench.exposure_norm();
    const double be = bench.excess_return();
    const double gap = benchmark_orthogonal_gap(market, bench);
    if (gap * gap <= kDegenerateDirectionTolerance * u_norm * u_norm * v_norm * v_norm) {
        throw Error(ErrorKind::DegenerateDirection,
                    "benchmark exposure is parallel to the market price of risk");
    }

    const double root = std::sqrt(1.0 - delta * delta);
    const double lambda = (be * t + t * delta / root * gap) / (v_norm * v_norm);
    const double clamp = positive_part(z * v_norm / std::sqrt(t) + root * gap - delta * be);

    PortfolioSolution sol;
    sol.lambda = lambda;
    if (clamp == 0.0) {
        sol.pi = Vector::Zero(market.dim());
    } else {
        const double scale = root * clamp / (t * gap);
        sol.pi = scale * (market.merton_direction() * t - lambda * bench.weights());
        sol.binding = true;
    }
    sol.epsilon = market.exposure(sol.pi).norm();
    sol.car = -t / (2.0 * v_norm * v_norm) * clamp * clamp;
    return sol;
}

PortfolioSolution solve_pricing_kernel(const BlockMarket& block, const RiskSpec& spec,
                                       double delta) {
    require_threshold(delta);
    const auto prices = group_prices_of_risk(block);
    const double theta1 = prices.theta1;
    const double theta2 = prices.theta2;
    if (theta2 * theta2 <= kDegenerateDirectionTolerance * (theta1 * theta1 + theta2 * theta2)) {
        throw Error(ErrorKind::DegenerateDirection,
                    "second-group assets are spanned by the benchmark (theta2 = 0)");
    }
    const MarketModel market = block.to_market();
    const BenchmarkPortfolio bench = growth_optimal_benchmark(block);

    const double t = spec.horizon();
    const double root = std::sqrt(1.0 - delta * delta);
    const double lambda = t * (1.0 + delta * theta2 / (theta1 * root));
    const double clamp =
        positive_part(spec.z_alpha() / std::sqrt(t) + root * theta2 - delta * theta1);

    PortfolioSolution sol;
    sol.lambda = lambda;
    if (clamp == 0.0) {
        sol.pi = Vector::Zero(market.dim());
    } else {
        const double scale = root * clamp / (t * theta2);
        sol.pi = scale * (market.merton_direction() * t - lambda * bench.weights());
        sol.binding = true;
    }
    sol.epsilon = market.exposure(sol.pi).norm();
    sol.car = -0.5 * t * clamp * clamp;
    return sol;
}

AsymptoticLimits asymptotic_portfolios(const BlockMarket& block, const RiskSpec& spec,
                                       double delta) {
    if (block.first_count() != 1) {
        throw Error(ErrorKind::UnsupportedPartition,
                    "asymptotic limits need a single first-group asset, got " +
                        std::to_string(block.first_count()));
    }
    require_threshold(delta);
    const double t = spec.horizon();
    const double z = spec.z_alpha();
    const auto lu22 = block.sigma22().partialPivLu();
    const Vector price2 = lu22.solve(block.b2());
    const double theta2 = price2.norm();
    const double root = std::sqrt(1.0 - delta * delta);

    Vector direction = Vector::Zero(block.dim());
    direction.tail(block.second_count()) = lu22.transpose().solve(price2);

    AsymptoticLimits out;
    out.pi_unconstrained = positive_part(z / (theta2 * std::sqrt(t)) + 1.0) * direction;
    out.pi_constrained = root * positive_part(z / (theta2 * std::sqrt(t)) + root) * direction;
    const double ru = positive_part(z / std::sqrt(t) + theta2);
    const double rc = positive_part(z / std::sqrt(t) + root * theta2);
    out.var_unconstrained = t * ru * ru;
    out.var_constrained = t * rc * rc;
    return out;
}

VarianceComparison variance_comparison(const BlockMarket& block, const RiskSpec& spec,
                                       double delta) {
    require_threshold(delta);
    const auto prices = group_prices_of_risk(block);
    const double theta1 = prices.theta1;
    const double theta2 = prices.theta2;
    if (theta2 * theta2 <= kDegenerateDirectionTolerance * (theta1 * theta1 + theta2 * theta2)) {
        throw Error(ErrorKind::DegenerateDirection,
                    "second-group assets are spanned by the benchmark (theta2 = 0)");
    }
    const double t = spec.horizon();
    const double shift = spec.z_alpha() / std::sqrt(t);
    const double root = std::sqrt(1.0 - delta * delta);
    const double ru = positive_part(shift + std::hypot(theta1, theta2));
    const double rc = positive_part(shift + root * theta2 - delta * theta1);

    VarianceComparison out;
    out.theta1 = theta1;
    out.theta2 = theta2;
    out.var_unconstrained = t * ru * ru;
    out.var_constrained = t * rc * rc;
    if (out.var_unconstrained > 0.0) {
        out.reduction_percent = 100.0 * (1.0 - out.var_constrained / out.var_unconstrained);
    }
    return out;
}

}  // namespace carisk
