#include "carisk/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "carisk/error.hpp"
#include "carisk/normal.hpp"
#include "carisk/risk_measures.hpp"

namespace carisk {

namespace {

constexpr std::uint64_t splitmix(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

unsigned thread_count(const McConfig& config) {
    unsigned n = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
    return std::max(1u, n);
}

// Calls fill(path, normals) for every path, with each path's normals drawn
// from its own PathStream.
template <typename Fill>
void for_each_path(std::size_t paths, Index dim, const McConfig& config, Fill fill) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_count(config), std::max<std::size_t>(1, paths / 4096)));
    auto work = [&](std::size_t begin, std::size_t end) {
        Vector normals(dim);
        for (std::size_t p = begin; p < end; ++p) {
            PathStream stream(config.seed, p);
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (Index j = 0; j < dim; ++j) {
                normals(j) = gauss(stream);
            }
            fill(p, normals);
        }
    };
    if (workers <= 1) {
        work(0, paths);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(paths, w * chunk);
        const std::size_t end = std::min(paths, begin + chunk);
        pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) {
        t.join();
    }
}

void require_paths(const McConfig& config) {
    if (config.paths < 2) {
        throw Error(ErrorKind::InvalidInput, "Monte Carlo needs at least two paths");
    }
    if (!(config.confidence > 0.0 && config.confidence < 1.0)) {
        throw Error(ErrorKind::InvalidInput, "confidence level must lie in (0, 1)");
    }
}

// Log returns log(X(T)/x); the initial wealth is added by callers.
std::vector<double> simulate_log_returns(const MarketModel& market, const Vector& pi,
                                         const RiskSpec& spec, const McConfig& config) {
    require_paths(config);
    const double t = spec.horizon();
    const Vector w = market.exposure(pi) * std::sqrt(t);
    const double eps2 = market.exposure(pi).squaredNorm();
    const double drift = (market.rate() + market.excess().dot(pi) - 0.5 * eps2) * t;
    std::vector<double> out(config.paths);
    for_each_path(config.paths, market.dim(), config,
                  [&](std::size_t p, const Vector& z) { out[p] = drift + w.dot(z); });
    return out;
}

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;
    double fourth = 0.0;  // fourth central moment
};

SampleMoments moments(const std::vector<double>& xs) {
    const auto n = static_cast<long double>(xs.size());
    long double sum = 0.0L;
    for (double x : xs) {
        sum += x;
    }
    const long double mean = sum / n;
    long double m2 = 0.0L;
    long double m4 = 0.0L;
    for (double x : xs) {
        const long double d = x - mean;
        const long double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    SampleMoments s;
    s.mean = static_cast<double>(mean);
    s.variance = static_cast<double>(m2 / (n - 1.0L));
    s.fourth = static_cast<double>(m4 / n);
    return s;
}

MomentEstimate compare(double sample, double closed, double se, double width) {
    MomentEstimate e;
    e.sample = sample;
    e.closed_form = closed;
    e.standard_error = se;
    const double slack = 1e-12 * std::max(1.0, std::abs(closed));
    e.pass = std::abs(sample - closed) <= width * se + slack;
    return e;
}

std::size_t rank_of(double level, std::size_t n) {
    const double raw = std::ceil(level * static_cast<double>(n) - 1e-9);
    return static_cast<std::size_t>(std::clamp(raw, 1.0, static_cast<double>(n)));
}

}  // namespace

PathStream::PathStream(std::uint64_t seed, std::uint64_t path) noexcept
    : state_(splitmix(seed) ^ splitmix(path + 1)) {}

PathStream::result_type PathStream::operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<double> mc_terminal_samples(const MarketModel& market, const Vector& pi,
                                        const RiskSpec& spec, double initial_wealth,
                                        const McConfig& config) {
    if (!(initial_wealth > 0.0)) {
        throw Error(ErrorKind::InvalidInput, "initial wealth must be positive");
    }
    auto samples = simulate_log_returns(market, pi, spec, config);
    const double log_x = std::log(initial_wealth);
    for (double& s : samples) {
        s += log_x;
    }
    return samples;
}

PairedSamples mc_paired_samples(const MarketModel& market, const Vector& pi, const Vector& eta,
                                const RiskSpec& spec, const McConfig& config) {
    require_paths(config);
    const double t = spec.horizon();
    const double sqrt_t = std::sqrt(t);
    const Vector wp = market.exposure(pi);
    const Vector we = market.exposure(eta);
    const double drift_p = (market.rate() + market.excess().dot(pi) - 0.5 * wp.squaredNorm()) * t;
    const double drift_e = (market.rate() + market.excess().dot(eta) - 0.5 * we.squaredNorm()) * t;

    PairedSamples out;
    out.wealth.resize(config.paths);
    out.benchmark.resize(config.paths);
    for_each_path(config.paths, market.dim(), config, [&](std::size_t p, const Vector& z) {
        out.wealth[p] = drift_p + sqrt_t * wp.dot(z);
        out.benchmark[p] = drift_e + sqrt_t * we.dot(z);
    });
    return out;
}

QuantileCheck mc_quantile_check(const MarketModel& market, const Vector& pi,
                                const RiskSpec& spec, double initial_wealth,
                                const McConfig& config) {
    std::vector<double> returns = simulate_log_returns(market, pi, spec, config);
    const std::size_t n = returns.size();
    std::sort(returns.begin(), returns.end());

    const double alpha = spec.alpha();
    const double band = std::sqrt(std::log(2.0 / (1.0 - config.confidence)) / (2.0 * static_cast<double>(n)));

    QuantileCheck out;
    out.empirical = returns[rank_of(alpha, n) - 1];
    out.lower = returns[rank_of(alpha - band, n) - 1];
    out.upper = returns[rank_of(alpha + band, n) - 1];
    out.closed_form = log_return_quantile(market, pi, spec, initial_wealth);
    out.pass = out.lower <= out.closed_form && out.closed_form <= out.upper;
    return out;
}

CorrelationCheck mc_correlation_check(const MarketModel& market, const Vector& pi,
                                      const Vector& eta, const RiskSpec& spec,
                                      const McConfig& config) {
    CorrelationCheck out;
    out.closed_form = log_correlation(market, pi, eta);
    const PairedSamples s = mc_paired_samples(market, pi, eta, spec, config);
    const std::size_t n = s.wealth.size();

    const SampleMoments mx = moments(s.wealth);
    const SampleMoments my = moments(s.benchmark);
    long double cross = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        cross += static_cast<long double>(s.wealth[i] - mx.mean) * (s.benchmark[i] - my.mean);
    }
    const double cov = static_cast<double>(cross / static_cast<long double>(n - 1));
    out.sample = std::clamp(cov / std::sqrt(mx.variance * my.variance), -1.0, 1.0);

    if (std::abs(out.closed_form) >= 1.0 - 1e-12) {
        out.lower = out.sample - 1e-9;
        out.upper = out.sample + 1e-9;
    } else {
        const double width = inverse_normal_cdf(0.5 + 0.5 * config.confidence) /
                             std::sqrt(static_cast<double>(n) - 3.0);
        const double centre = std::atanh(std::clamp(out.sample, -1.0 + 1e-15, 1.0 - 1e-15));
        out.lower = std::tanh(centre - width);
        out.upper = std::tanh(centre + width);
    }
    out.pass = out.lower <= out.closed_form && out.closed_form <= out.upper;
    return out;
}

MomentCheck mc_moment_check(const MarketModel& market, const Vector& pi, const RiskSpec& spec,
                            double initial_wealth, const McConfig& config) {
    const std::vector<double> logs = mc_terminal_samples(market, pi, spec, initial_wealth, config);
    std::vector<double> levels(logs.size());
    std::transform(logs.begin(), logs.end(), levels.begin(), [](double v) { return std::exp(v); });

    const auto n = static_cast<double>(logs.size());
    const double width = inverse_normal_cdf(0.5 + 0.5 * config.confidence);
    const WealthLaw law = wealth_law(market, pi, spec, initial_wealth);
    const SampleMoments lm = moments(logs);
    const SampleMoments wm = moments(levels);
    auto variance_se = [n](const SampleMoments& m) {
        return std::sqrt(std::max(0.0, m.fourth - m.variance * m.variance) / n);
    };

    MomentCheck out;
    out.mean = compare(wm.mean, law.mean, std::sqrt(wm.variance / n), width);
    out.variance = compare(wm.variance, law.variance, variance_se(wm), width);
    out.log_mean = compare(lm.mean, law.log_mean, std::sqrt(lm.variance / n), width);
    out.log_variance = compare(lm.variance, law.log_variance, variance_se(lm), width);
    return out;
}

}  // namespace carisk
