#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "carisk/market_model.hpp"

namespace carisk {

struct McConfig {
    std::size_t paths = 1'000'000;
    std::uint64_t seed = 20240917;
    /// Two-sided confidence level of the pass/fail bands.
    double confidence = 0.99;
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
};

/// Counter-based stream: path i of a run seeded with s draws its normals
/// from SplitMix64 started at mix(s) ^ mix(i + 1). Each path's draws depend
/// only on (s, i), so any split of paths over threads reproduces the serial
/// result bit for bit.
class PathStream {
public:
    using result_type = std::uint64_t;

    PathStream(std::uint64_t seed, std::uint64_t path) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

private:
    std::uint64_t state_;
};

/// i.i.d. samples of log X(T) from the exact lognormal terminal law
///   log x + (r + b'pi - |sigma'pi|^2/2) T + sqrt(T) (sigma'pi)' Z,  Z ~ N(0, I_d).
/// Single time step; no discretization error.
std::vector<double> mc_terminal_samples(const MarketModel& market, const Vector& pi,
                                        const RiskSpec& spec, double initial_wealth,
                                        const McConfig& config);

/// log X(T) and log Y(T) driven by the same Brownian draw on each path.
struct PairedSamples {
    std::vector<double> wealth;
    std::vector<double> benchmark;
};

PairedSamples mc_paired_samples(const MarketModel& market, const Vector& pi, const Vector& eta,
                                const RiskSpec& spec, const McConfig& config);

struct QuantileCheck {
    double empirical = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double closed_form = 0.0;
    bool pass = false;
};

/// Order statistic at rank ceil(alpha N) of the simulated log returns,
/// with a distribution-free band from the Dvoretzky-Kiefer-Wolfowitz
/// inequality: ranks ceil((alpha -/+ e) N), e = sqrt(log(2 / (1 - c)) / (2N)).
/// Passes when the closed-form quantile lies inside the band.
QuantileCheck mc_quantile_check(const MarketModel& market, const Vector& pi,
                                const RiskSpec& spec, double initial_wealth,
                                const McConfig& config);

struct CorrelationCheck {
    double sample = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double closed_form = 0.0;
    bool pass = false;
};

/// Pearson correlation of paired (log X(T), log Y(T)) against the closed
/// form, with a Fisher-z band. Throws ZeroVolatilityPortfolio when either
/// portfolio has no volatility.
CorrelationCheck mc_correlation_check(const MarketModel& market, const Vector& pi,
                                      const Vector& eta, const RiskSpec& spec,
                                      const McConfig& config);

struct MomentEstimate {
    double sample = 0.0;
    double closed_form = 0.0;
    double standard_error = 0.0;
    bool pass = false;
};

struct MomentCheck {
    MomentEstimate mean;
    MomentEstimate variance;
    MomentEstimate log_mean;
    MomentEstimate log_variance;

    bool pass() const noexcept {
        return mean.pass && variance.pass && log_mean.pass && log_variance.pass;
    }
};

/// Sample mean and variance of X(T) and log X(T) against the lognormal
/// closed forms, each within the normal-approximation band of the
/// configured confidence.
MomentCheck mc_moment_check(const MarketModel& market, const Vector& pi, const RiskSpec& spec,
                            double initial_wealth, const McConfig& config);

}  // namespace carisk
