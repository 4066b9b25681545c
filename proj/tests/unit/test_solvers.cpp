#include <cmath>

#include <gtest/gtest.h>

#include "carisk/error.hpp"
#include "carisk/experiments.hpp"
#include "carisk/risk_measures.hpp"
#include "carisk/solvers.hpp"
#include "random_market.hpp"

using namespace carisk;
using carisk::fixtures::MarketGenerator;

namespace {

struct ConstrainedCase {
    MarketModel market;
    RiskSpec spec;
    BenchmarkPortfolio bench;
    double delta;
};

// Random dense instances with a nonzero constrained optimum.
std::vector<ConstrainedCase> nonzero_constrained_cases(std::uint64_t seed, int wanted) {
    MarketGenerator gen(seed);
    std::vector<ConstrainedCase> cases;
    for (int attempt = 0; attempt < 100 * wanted && static_cast<int>(cases.size()) < wanted; ++attempt) {
        MarketModel market = gen.dense_market(gen.integer(2, 4));
        RiskSpec spec(gen.uniform(0.05, 0.3), gen.uniform(2.0, 20.0));
        BenchmarkPortfolio bench = gen.benchmark(market);
        const double delta = gen.uniform(0.0, 0.9);
        const auto sol = solve_constrained(market, spec, ConstraintSpec(bench, delta));
        if (!sol.pi.isZero(0.0)) {
            cases.push_back({std::move(market), spec, std::move(bench), delta});
        }
    }
    EXPECT_EQ(static_cast<int>(cases.size()), wanted);
    return cases;
}

BlockMarket dataset_block(int id) { return build_block_market(reference_dataset(id), 0.02, 1); }

}  // namespace

TEST(Unconstrained, BeatsRandomPortfolios) {
    MarketGenerator gen(31);
    for (int i = 0; i < 20; ++i) {
        const MarketModel market = gen.dense_market(gen.integer(1, 4));
        const RiskSpec spec(gen.uniform(0.05, 0.3), gen.uniform(2.0, 20.0));
        const PortfolioSolution best = solve_unconstrained(market, spec);
        EXPECT_NEAR(best.car, capital_at_risk(market, best.pi, spec), 1e-12 * (1 + std::abs(best.car)));
        const double scale = std::max(1.0, best.pi.norm());
        for (int k = 0; k < 1000; ++k) {
            const Vector trial = best.pi + scale * gen.uniform(0.0, 1.0) * gen.normal_vector(market.dim());
            EXPECT_GE(capital_at_risk(market, trial, spec), best.car - 1e-12);
        }
        EXPECT_FALSE(best.lambda.has_value());
        EXPECT_FALSE(best.binding);
    }
}

TEST(Unconstrained, StationaryWhenNonzero) {
    MarketGenerator gen(32);
    int nonzero = 0;
    for (int i = 0; i < 200; ++i) {
        const MarketModel market = gen.dense_market(gen.integer(1, 4));
        const RiskSpec spec = gen.risk_spec();
        const PortfolioSolution best = solve_unconstrained(market, spec);
        const double clamp = spec.z_alpha() / std::sqrt(spec.horizon()) + market.market_price_of_risk().norm();
        if (clamp <= 0.0) {
            EXPECT_TRUE(best.pi.isZero(0.0));
            EXPECT_EQ(best.car, 0.0);
            continue;
        }
        ++nonzero;
        EXPECT_LE(fixtures::car_gradient(market, best.pi, spec).norm(), 1e-10);
        EXPECT_NEAR(best.epsilon, clamp, 1e-12);
        EXPECT_NEAR(best.car, -0.5 * spec.horizon() * clamp * clamp, 1e-12);
    }
    EXPECT_GT(nonzero, 50);
}

TEST(Unconstrained, ScalarMarketByGoldenSection) {
    // d = 1: CaR(p) = -b p T + s^2 p^2 T/2 - z s |p| sqrt(T), minimized by search.
    const double b = 0.12, s = 0.2, t = 4.0;
    const MarketModel market(0.01, Vector::Constant(1, b), Matrix::Constant(1, 1, s));
    const RiskSpec spec(0.05, t);
    auto car = [&](double p) { return -b * p * t + 0.5 * s * s * p * p * t - spec.z_alpha() * s * std::abs(p) * std::sqrt(t); };
    double lo = -10, hi = 10;
    for (int i = 0; i < 300; ++i) {
        const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (car(m1) < car(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    const PortfolioSolution sol = solve_unconstrained(market, spec);
    EXPECT_NEAR(sol.pi(0), 0.5 * (lo + hi), 1e-8);
    EXPECT_NEAR(sol.car, car(0.5 * (lo + hi)), 1e-12);
}

TEST(Ellipse, MaximizerDominatesRandomBoundaryPoints) {
    MarketGenerator gen(33);
    for (int i = 0; i < 10; ++i) {
        const MarketModel market = gen.dense_market(gen.integer(2, 4));
        const double eps = gen.uniform(0.05, 1.0);
        const Vector best = ellipse_maximizer(market, eps);
        EXPECT_NEAR(market.exposure(best).norm(), eps, 1e-12);
        const double top = market.excess().dot(best);
        EXPECT_NEAR(top, eps * market.market_price_of_risk().norm(), 1e-12);
        for (int k = 0; k < 1000; ++k) {
            Vector w = gen.normal_vector(market.dim());
            w *= eps / w.norm();
            EXPECT_LE(market.excess().dot(market.solve_transpose(w)), top + 1e-12);
        }
    }
}

TEST(Constrained, KarushKuhnTuckerConditions) {
    for (const auto& c : nonzero_constrained_cases(34, 60)) {
        const ConstraintSpec cs(c.bench, c.delta);
        const PortfolioSolution sol = solve_constrained(c.market, c.spec, cs);
        ASSERT_TRUE(sol.lambda.has_value());
        const double lambda = *sol.lambda;
        EXPECT_GT(lambda, 0.0);
        EXPECT_TRUE(sol.binding);

        const Vector residual = fixtures::car_gradient(c.market, sol.pi, c.spec) +
                                lambda * fixtures::constraint_gradient(c.market, sol.pi, c.bench, c.delta);
        const double scale = std::max(1.0, c.market.excess().norm() * c.spec.horizon());
        EXPECT_LE(residual.norm() / scale, 1e-8);

        // Primal feasibility with equality and complementary slackness.
        const double g = correlation_constraint(c.market, sol.pi, c.bench, c.delta);
        EXPECT_LE(std::abs(g), 1e-12 * (1 + c.bench.exposure_norm() * sol.epsilon));
        EXPECT_NEAR(log_correlation(c.market, sol.pi, c.bench.weights()), -c.delta, 1e-10);
        EXPECT_NEAR(sol.car, capital_at_risk(c.market, sol.pi, c.spec), 1e-10);
        EXPECT_NEAR(sol.epsilon, c.market.exposure(sol.pi).norm(), 1e-12);
    }
}

TEST(Constrained, FiniteDifferenceStationarity) {
    for (const auto& c : nonzero_constrained_cases(35, 20)) {
        const PortfolioSolution sol = solve_constrained(c.market, c.spec, ConstraintSpec(c.bench, c.delta));
        const double lambda = *sol.lambda;
        auto lagrangian = [&](const Vector& pi) {
            return capital_at_risk(c.market, pi, c.spec) + lambda * correlation_constraint(c.market, pi, c.bench, c.delta);
        };
        for (Index k = 0; k < c.market.dim(); ++k) {
            const double h = 1e-5 * std::max(1.0, sol.pi.norm());
            Vector up = sol.pi, down = sol.pi;
            up(k) += h;
            down(k) -= h;
            EXPECT_NEAR((lagrangian(up) - lagrangian(down)) / (2 * h), 0.0, 1e-8 * std::max(1.0, lambda));
        }
    }
}

TEST(Constrained, TwoFundSeparation) {
    for (const auto& c : nonzero_constrained_cases(36, 60)) {
        const PortfolioSolution sol = solve_constrained(c.market, c.spec, ConstraintSpec(c.bench, c.delta));
        EXPECT_LE(fixtures::two_fund_residual(c.market, sol.pi, c.bench.weights()), 1e-10);
    }
}

TEST(Constrained, BeatsRandomFeasiblePortfolios) {
    MarketGenerator gen(37);
    for (const auto& c : nonzero_constrained_cases(38, 10)) {
        const PortfolioSolution sol = solve_constrained(c.market, c.spec, ConstraintSpec(c.bench, c.delta));
        int feasible = 0;
        for (int k = 0; k < 20000 && feasible < 1000; ++k) {
            const Vector trial = sol.pi + gen.uniform(0.0, 2.0) * sol.pi.norm() * gen.normal_vector(c.market.dim());
            if (!satisfies_correlation_constraint(c.market, trial, c.bench, c.delta)) continue;
            ++feasible;
            EXPECT_GE(capital_at_risk(c.market, trial, c.spec), sol.car - 1e-12);
        }
        EXPECT_EQ(feasible, 1000);
    }
}

TEST(Constrained, CostsCapitalAtRiskAndIsLagrangianMinimizer) {
    for (const auto& c : nonzero_constrained_cases(39, 40)) {
        const PortfolioSolution sol = solve_constrained(c.market, c.spec, ConstraintSpec(c.bench, c.delta));
        const PortfolioSolution free = solve_unconstrained(c.market, c.spec);
        EXPECT_GE(sol.car, free.car - 1e-12);
        EXPECT_LE(sol.epsilon, free.epsilon + 1e-12);
        const double eps = epsilon_star(*sol.lambda, c.market, c.spec, c.bench, c.delta);
        EXPECT_NEAR(eps, sol.epsilon, 1e-10 * (1 + eps));
        const Vector pi = lagrangian_minimizer(*sol.lambda, c.market, c.spec, c.bench, c.delta);
        EXPECT_LE((pi - sol.pi).norm(), 1e-9 * (1 + sol.pi.norm()));
    }
}

TEST(Constrained, ClampBranchGivesRisklessPortfolio) {
    const BlockMarket block = dataset_block(1);
    const MarketModel market = block.to_market();
    const RiskSpec spec(0.05, 5.0);
    const auto bench = growth_optimal_benchmark(block);
    for (double delta : {0.6, 0.9}) {
        const PortfolioSolution sol = solve_constrained(market, spec, ConstraintSpec(bench, delta));
        EXPECT_TRUE(sol.pi.isZero(0.0));
        EXPECT_EQ(sol.car, 0.0);
        EXPECT_EQ(sol.epsilon, 0.0);
        EXPECT_FALSE(sol.binding);
        EXPECT_DOUBLE_EQ(riskless_fraction(sol.pi), 1.0);
    }
}

TEST(Constrained, ReferenceDatasetValues) {
    // Reproduced independently (plain inverses, direct formulas) before
    // being frozen here.
    const RiskSpec spec(0.05, 5.0);
    const MarketModel m2 = dataset_block(2).to_market();
    const PortfolioSolution free = solve_unconstrained(m2, spec);
    EXPECT_LE((free.pi - Vector(Eigen::Vector3d(-0.666024, 2.92165, 2.63861))).lpNorm<Eigen::Infinity>(), 5e-6);
    const auto bench = growth_optimal_benchmark(dataset_block(2));
    const PortfolioSolution c = solve_constrained(m2, spec, ConstraintSpec(bench, 0.3));
    EXPECT_LE((c.pi - Vector(Eigen::Vector3d(-0.854439, 1.84884, 1.66973))).lpNorm<Eigen::Infinity>(), 5e-6);

    const MarketModel m1 = dataset_block(1).to_market();
    EXPECT_LE((solve_unconstrained(m1, spec).pi - Vector(Eigen::Vector3d(1.19841, 0.380773, 0.532629)))
                  .lpNorm<Eigen::Infinity>(),
              5e-6);
}

TEST(Constrained, DegenerateAndInvalidInputs) {
    const MarketModel market(0.01, Vector(Eigen::Vector2d(0.05, 0.08)), Matrix::Identity(2, 2) * 0.2);
    const RiskSpec spec(0.05, 5.0);
    // Benchmark along the Merton direction: sigma'eta parallel to sigma^{-1} b.
    const BenchmarkPortfolio parallel(market, market.merton_direction());
    try {
        solve_constrained(market, spec, ConstraintSpec(parallel, 0.3));
        ADD_FAILURE() << "expected DegenerateDirection";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateDirection);
        EXPECT_TRUE(is_degenerate(e.kind()));
    }
    EXPECT_THROW(ConstraintSpec(parallel, 1.0), Error);
    EXPECT_THROW(ConstraintSpec(parallel, -0.1), Error);
    EXPECT_NO_THROW(ConstraintSpec(parallel, 0.0));
}

TEST(PricingKernel, AgreesWithGeneralSolver) {
    MarketGenerator gen(40);
    int nonzero = 0;
    for (int i = 0; i < 300; ++i) {
        const Index d = gen.integer(2, 4);
        const BlockMarket block = gen.block_market(d, gen.integer(1, static_cast<int>(d) - 1));
        const RiskSpec spec(gen.uniform(0.05, 0.3), gen.uniform(2.0, 20.0));
        const double delta = gen.uniform(0.0, 0.95);
        const PortfolioSolution pk = solve_pricing_kernel(block, spec, delta);
        const PortfolioSolution gen_sol =
            solve_constrained(block.to_market(), spec, ConstraintSpec(growth_optimal_benchmark(block), delta));
        EXPECT_LE((pk.pi - gen_sol.pi).lpNorm<Eigen::Infinity>(), 1e-10);
        EXPECT_NEAR(pk.car, gen_sol.car, 1e-10);
        EXPECT_NEAR(*pk.lambda, *gen_sol.lambda, 1e-8 * std::abs(*gen_sol.lambda));
        nonzero += !pk.pi.isZero(0.0);
    }
    EXPECT_GT(nonzero, 50);
}

TEST(PricingKernel, DegenerateWhenSecondGroupHasNoOwnRisk) {
    // b2 = sigma21 sigma11^{-1} b1 makes theta2 vanish.
    const Matrix s11 = Matrix::Constant(1, 1, 0.2);
    const Matrix s21 = Matrix::Constant(1, 1, 0.125);
    const Matrix s22 = Matrix::Constant(1, 1, 0.2);
    const BlockMarket block = assemble_block_market(s11, s21, s22, Vector::Constant(1, 0.04),
                                                    Vector::Constant(1, 0.025), 0.01);
    EXPECT_NEAR(group_prices_of_risk(block).theta2, 0.0, 1e-15);
    try {
        solve_pricing_kernel(block, RiskSpec(0.05, 5.0), 0.5);
        ADD_FAILURE() << "expected DegenerateDirection";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateDirection);
    }
}

TEST(Variance, ClosedFormsAndOrdering) {
    MarketGenerator gen(41);
    for (int i = 0; i < 300; ++i) {
        const Index d = gen.integer(2, 4);
        const BlockMarket block = gen.block_market(d, gen.integer(1, static_cast<int>(d) - 1));
        const RiskSpec spec = gen.risk_spec();
        const double delta = gen.uniform(0.0, 0.99);
        const VarianceComparison vc = variance_comparison(block, spec, delta);
        const double t = spec.horizon();
        const double zt = spec.z_alpha() / std::sqrt(t);
        const double th1 = vc.theta1, th2 = vc.theta2;
        const double u = std::max(0.0, zt + std::hypot(th1, th2));
        const double c = std::max(0.0, zt + std::sqrt(1 - delta * delta) * th2 - delta * th1);
        EXPECT_NEAR(vc.var_unconstrained, t * u * u, 1e-12);
        EXPECT_NEAR(vc.var_constrained, t * c * c, 1e-12);
        // Cauchy-Schwarz: sqrt(1-d^2) th2 - d th1 <= sqrt(th1^2 + th2^2).
        EXPECT_LE(std::sqrt(1 - delta * delta) * th2 - delta * th1, std::hypot(th1, th2) + 1e-15);
        EXPECT_GE(vc.var_unconstrained, vc.var_constrained);

        const PortfolioSolution pk = solve_pricing_kernel(block, spec, delta);
        const Matrix sigma = block.volatility();
        EXPECT_NEAR(vc.var_constrained, t * pk.pi.dot(sigma * sigma.transpose() * pk.pi), 1e-10);
        const PortfolioSolution free = solve_unconstrained(block.to_market(), spec);
        EXPECT_NEAR(vc.var_unconstrained, t * free.pi.dot(sigma * sigma.transpose() * free.pi), 1e-10);
        if (vc.var_unconstrained > 0) {
            ASSERT_TRUE(vc.reduction_percent.has_value());
            EXPECT_NEAR(*vc.reduction_percent, 100 * (1 - vc.var_constrained / vc.var_unconstrained), 1e-9);
        } else {
            EXPECT_FALSE(vc.reduction_percent.has_value());
        }
    }
}

TEST(Variance, NonincreasingInDelta) {
    const RiskSpec spec(0.05, 5.0);
    for (int id : {1, 2}) {
        for (double s11 : {0.05, 0.1, 0.2, 0.5}) {
            const BlockMarket block = dataset_block(id).with_sigma11(Matrix::Constant(1, 1, s11));
            double previous = variance_comparison(block, spec, 0.0).var_constrained;
            for (double delta = 0.01; delta < 0.995; delta += 0.01) {
                const double v = variance_comparison(block, spec, delta).var_constrained;
                EXPECT_LE(v, previous + 1e-14);
                previous = v;
            }
        }
    }
}

TEST(Asymptotics, ExactSolutionsApproachLimits) {
    const RiskSpec spec(0.05, 5.0);
    for (int id : {1, 2}) {
        const BlockMarket base = dataset_block(id);
        // Limit variances written out from theta2 -> |sigma22^{-1} b2|.
        const double th2 = (base.sigma22().inverse() * base.b2()).norm();
        const double zt = spec.z_alpha() / std::sqrt(spec.horizon());
        for (double delta : {0.3, 0.6, 0.9}) {
            const AsymptoticLimits lim = asymptotic_portfolios(base, spec, delta);
            const double u = std::max(0.0, zt + th2);
            const double c = std::max(0.0, zt + std::sqrt(1 - delta * delta) * th2);
            EXPECT_NEAR(lim.var_unconstrained, spec.horizon() * u * u, 1e-12);
            EXPECT_NEAR(lim.var_constrained, spec.horizon() * c * c, 1e-12);
            EXPECT_EQ(lim.pi_unconstrained(0), 0.0);

            const BlockMarket far = base.with_sigma11(Matrix::Constant(1, 1, 1e6));
            EXPECT_LE((solve_unconstrained(far.to_market(), spec).pi - lim.pi_unconstrained).lpNorm<Eigen::Infinity>(), 1e-5);
            EXPECT_LE((solve_pricing_kernel(far, spec, delta).pi - lim.pi_constrained).lpNorm<Eigen::Infinity>(), 1e-5);
        }
    }
    const BlockMarket two = MarketGenerator(42).block_market(3, 2);
    EXPECT_THROW(asymptotic_portfolios(two, spec, 0.5), Error);
}
