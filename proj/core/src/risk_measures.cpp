#include "carisk/risk_measures.hpp"

#include <cmath>
#include <string>

#include "carisk/error.hpp"

namespace carisk {

namespace {

void require_positive_wealth(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw Error(ErrorKind::InvalidInput, "initial wealth must be positive, got " + std::to_string(x));
    }
}

void require_finite(const Vector& pi) {
    if (!pi.allFinite()) {
        throw Error(ErrorKind::InvalidInput, "portfolio weights must be finite");
    }
}

}  // namespace

double riskless_fraction(const Vector& pi) { return 1.0 - pi.sum(); }

double log_return_quantile(const MarketModel& market, const Vector& pi, const RiskSpec& spec,
                           double initial_wealth) {
    require_positive_wealth(initial_wealth);
    require_finite(pi);
    const double t = spec.horizon();
    const double eps = market.exposure(pi).norm();
    return (market.rate() + market.excess().dot(pi)) * t - 0.5 * eps * eps * t +
           spec.z_alpha() * eps * std::sqrt(t);
}

double capital_at_risk(const MarketModel& market, const Vector& pi, const RiskSpec& spec) {
    require_finite(pi);
    const double t = spec.horizon();
    const double eps = market.exposure(pi).norm();
    return -market.excess().dot(pi) * t + 0.5 * eps * eps * t - spec.z_alpha() * eps * std::sqrt(t);
}

double log_correlation(const MarketModel& market, const Vector& pi, const Vector& eta) {
    require_finite(pi);
    require_finite(eta);
    const Vector wp = market.exposure(pi);
    const Vector we = market.exposure(eta);
    const double np = wp.norm();
    const double ne = we.norm();
    if (np == 0.0 || ne == 0.0) {
        throw Error(ErrorKind::ZeroVolatilityPortfolio,
                    "log correlation is undefined for a portfolio without volatility");
    }
    return wp.dot(we) / (np * ne);
}

double correlation_constraint(const MarketModel& market, const Vector& pi,
                              const BenchmarkPortfolio& benchmark, double delta) {
    const Vector wp = market.exposure(pi);
    return delta * benchmark.exposure_norm() * wp.norm() + wp.dot(benchmark.exposure());
}

bool satisfies_correlation_constraint(const MarketModel& market, const Vector& pi,
                                      const BenchmarkPortfolio& benchmark, double delta,
                                      double tolerance) {
    if (pi.isZero(0.0)) {
        return true;
    }
    return correlation_constraint(market, pi, benchmark, delta) <= tolerance;
}

WealthLaw wealth_law(const MarketModel& market, const Vector& pi, const RiskSpec& spec,
                     double initial_wealth) {
    require_positive_wealth(initial_wealth);
    require_finite(pi);
    const double t = spec.horizon();
    const double x = initial_wealth;
    const double growth = market.rate() + market.excess().dot(pi);
    const double eps2 = market.exposure(pi).squaredNorm();

    WealthLaw law;
    law.initial_wealth = x;
    law.mean = x * std::exp(growth * t);
    law.variance = x * x * std::exp(2.0 * growth * t) * std::expm1(eps2 * t);
    law.log_mean = std::log(x) + (growth - 0.5 * eps2) * t;
    law.log_variance = t * eps2;
    return law;
}

}  // namespace carisk
