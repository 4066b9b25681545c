#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "carisk/error.hpp"
#include "carisk/experiments.hpp"
#include "carisk/monte_carlo.hpp"
#include "carisk/risk_measures.hpp"
#include "carisk/solvers.hpp"

using namespace carisk;

namespace {

struct Fixture {
    BlockMarket block = build_block_market(reference_dataset(2), 0.02, 1);
    MarketModel market = block.to_market();
    RiskSpec spec{0.05, 5.0};
    Vector pi = solve_unconstrained(market, spec).pi;
};

McConfig small(std::size_t paths, unsigned threads = 1, std::uint64_t seed = 99) {
    McConfig c;
    c.paths = paths;
    c.threads = threads;
    c.seed = seed;
    return c;
}

double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

double variance(const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / (x.size() - 1);
}

}  // namespace

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
    Fixture f;
    const auto a = mc_terminal_samples(f.market, f.pi, f.spec, 1.0, small(10007, 1));
    const auto b = mc_terminal_samples(f.market, f.pi, f.spec, 1.0, small(10007, 4));
    const auto c = mc_terminal_samples(f.market, f.pi, f.spec, 1.0, small(10007, 3));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    const auto d = mc_terminal_samples(f.market, f.pi, f.spec, 1.0, small(10007, 1, 100));
    EXPECT_NE(a, d);
}

TEST(MonteCarlo, PathStreamsAreIndependentOfOrder) {
    PathStream s(5, 17);
    PathStream t(5, 17);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(s(), t());
    EXPECT_NE(PathStream(5, 17)(), PathStream(5, 18)());
    EXPECT_NE(PathStream(5, 17)(), PathStream(6, 17)());
}

TEST(MonteCarlo, ZeroPortfolioIsRiskless) {
    Fixture f;
    const auto x = mc_terminal_samples(f.market, Vector::Zero(3), f.spec, 2.0, small(1000));
    for (double v : x) EXPECT_DOUBLE_EQ(v, std::log(2.0) + 0.02 * 5.0);
    const QuantileCheck q = mc_quantile_check(f.market, Vector::Zero(3), f.spec, 2.0, small(1000));
    EXPECT_TRUE(q.pass);
    EXPECT_DOUBLE_EQ(q.empirical, q.closed_form);
}

TEST(MonteCarlo, LogMomentsWithinFourStandardErrors) {
    Fixture f;
    const std::size_t n = 200000;
    const auto x = mc_terminal_samples(f.market, f.pi, f.spec, 1.5, small(n, 0));
    const WealthLaw law = wealth_law(f.market, f.pi, f.spec, 1.5);
    const double se_mean = std::sqrt(law.log_variance / n);
    EXPECT_NEAR(mean(x), law.log_mean, 4 * se_mean);
    const double se_var = law.log_variance * std::sqrt(2.0 / (n - 1));
    EXPECT_NEAR(variance(x), law.log_variance, 4 * se_var);

    std::vector<double> wealth(x.size());
    std::transform(x.begin(), x.end(), wealth.begin(), [](double v) { return std::exp(v); });
    const double se_wealth = std::sqrt(law.variance / n);
    EXPECT_NEAR(mean(wealth), law.mean, 4 * se_wealth);
}

TEST(MonteCarlo, QuantileBandBracketsClosedForm) {
    Fixture f;
    const QuantileCheck q = mc_quantile_check(f.market, f.pi, f.spec, 1.0, small(200000, 0));
    EXPECT_TRUE(q.pass);
    EXPECT_LT(q.lower, q.empirical);
    EXPECT_LT(q.empirical, q.upper);
    EXPECT_NEAR(q.closed_form, log_return_quantile(f.market, f.pi, f.spec), 1e-15);
    // Band half-width is of order the DKW epsilon times the inverse density.
    EXPECT_LT(q.upper - q.lower, 0.1);
}

TEST(MonteCarlo, MomentCheckPasses) {
    Fixture f;
    const MomentCheck m = mc_moment_check(f.market, f.pi, f.spec, 1.0, small(200000, 0));
    EXPECT_TRUE(m.pass());
    EXPECT_GT(m.log_variance.standard_error, 0.0);
}

TEST(MonteCarlo, PairedCorrelationMatchesClosedForm) {
    Fixture f;
    const auto bench = growth_optimal_benchmark(f.block);
    const PortfolioSolution sol = solve_constrained(f.market, f.spec, ConstraintSpec(bench, 0.3));
    const PairedSamples p = mc_paired_samples(f.market, sol.pi, bench.weights(), f.spec, small(100000, 0));
    ASSERT_EQ(p.wealth.size(), p.benchmark.size());
    const CorrelationCheck c = mc_correlation_check(f.market, sol.pi, bench.weights(), f.spec, small(100000, 0));
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(c.closed_form, -0.3, 1e-10);
    // Fisher-z standard error 1/sqrt(n-3) maps to about (1 - rho^2)/sqrt(n).
    EXPECT_NEAR(c.sample, -0.3, 4 * (1 - 0.09) / std::sqrt(1e5));
    EXPECT_THROW(mc_correlation_check(f.market, Vector::Zero(3), bench.weights(), f.spec, small(100)), Error);
}
