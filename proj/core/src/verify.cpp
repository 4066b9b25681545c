#include "carisk/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "carisk/monte_carlo.hpp"
#include "carisk/oracle.hpp"
#include "carisk/risk_measures.hpp"
#include "carisk/solvers.hpp"

namespace carisk {

namespace {

constexpr double kIdentityTol = 1e-10;
constexpr double kFactorTol = 1e-12;
constexpr double kOracleWeightTol = 1e-4;
constexpr double kOracleCarTol = 1e-6;
constexpr double kFeasibilityTol = 1e-8;

double max_abs_diff(const Vector& a, const Vector& b) {
    return (a - b).lpNorm<Eigen::Infinity>();
}

class Recorder {
public:
    Recorder(VerifyReport& report, std::string dataset) : report_(report), dataset_(std::move(dataset)) {}

    void set_delta(std::optional<double> delta) { delta_ = delta; }

    void within(const std::string& name, double measured, double tolerance,
                const std::string& detail = {}) {
        add(name, measured <= tolerance, measured, tolerance, detail);
    }

    void add(const std::string& name, bool passed, double measured, double tolerance,
             const std::string& detail = {}) {
        report_.checks.push_back({name, dataset_, delta_, passed, measured, tolerance, detail});
    }

    // Runs a check body; a thrown Error becomes a failed check.
    template <typename Fn>
    void guarded(const std::string& name, Fn fn) {
        try {
            fn();
        } catch (const Error& e) {
            add(name, false, std::nan(""), 0.0, e.what());
        }
    }

private:
    VerifyReport& report_;
    std::string dataset_;
    std::optional<double> delta_;
};

std::string band_detail(double value, double lower, double upper) {
    std::ostringstream out;
    out.precision(10);
    out << "closed form " << value << " vs band [" << lower << ", " << upper << "]";
    return out.str();
}

void verify_dataset(const MarketDataset& ds, const ExperimentConfig& config, const BlockMarket& block,
                    VerifyReport& report) {
    Recorder rec(report, ds.id);
    const RiskSpec spec = config.risk_spec();
    const MarketModel market = block.to_market();
    const Index d = market.dim();
    const double x = config.initial_wealth;

    const Matrix target = ds.gammas.asDiagonal() * ds.correlation * ds.gammas.asDiagonal();
    const Matrix sigma = market.volatility();
    rec.within("cholesky_reconstruction",
               (sigma * sigma.transpose() - target).lpNorm<Eigen::Infinity>(), kFactorTol);
    rec.within("block_inverse",
               (sigma * block.block_inverse() - Matrix::Identity(d, d)).lpNorm<Eigen::Infinity>(),
               kFactorTol);

    std::optional<BenchmarkPortfolio> bench;
    rec.guarded("benchmark_identities", [&] {
        bench = growth_optimal_benchmark(block);
        rec.within("benchmark_identities", pricing_kernel_residuals(block, *bench).max(),
                   kIdentityTol);
    });

    const PortfolioSolution free = solve_unconstrained(market, spec);
    rec.within("unconstrained_car_identity",
               std::abs(free.car - capital_at_risk(market, free.pi, spec)), kIdentityTol);
    rec.guarded("oracle_unconstrained", [&] {
        const OracleResult oracle = numeric_min_car(market, spec, std::nullopt, config.oracle);
        rec.within("oracle_unconstrained_weights", max_abs_diff(oracle.pi, free.pi),
                   kOracleWeightTol);
        rec.within("oracle_unconstrained_car", std::abs(oracle.car - free.car), kOracleCarTol);
    });
    {
        const QuantileCheck q = mc_quantile_check(market, free.pi, spec, x, config.monte_carlo);
        rec.add("mc_quantile_unconstrained", q.pass, q.empirical, 0.0,
                band_detail(q.closed_form, q.lower, q.upper));
        const MomentCheck m = mc_moment_check(market, free.pi, spec, x, config.monte_carlo);
        rec.add("mc_moments_unconstrained", m.pass(), m.log_variance.sample,
                m.log_variance.standard_error);
    }

    if (!bench) {
        return;
    }
    for (double delta : config.deltas) {
        rec.set_delta(delta);
        rec.guarded("constrained", [&] {
            const ConstraintSpec constraint(*bench, delta);
            const PortfolioSolution sol = solve_constrained(market, spec, constraint);

            const PortfolioSolution pk = solve_pricing_kernel(block, spec, delta);
            rec.within("pricing_kernel_consistency", max_abs_diff(pk.pi, sol.pi), kIdentityTol);
            rec.within("constrained_car_identity",
                       std::abs(sol.car - capital_at_risk(market, sol.pi, spec)), kIdentityTol);
            rec.add("car_ordering", sol.car >= free.car - kIdentityTol, sol.car - free.car, 0.0,
                    "CaR(constrained) - CaR(unconstrained)");

            const OracleResult oracle = numeric_min_car(market, spec, constraint, config.oracle);
            rec.within("oracle_constrained_weights", max_abs_diff(oracle.pi, sol.pi),
                       kOracleWeightTol);
            rec.within("oracle_constrained_car", std::abs(oracle.car - sol.car), kOracleCarTol);
            rec.within("oracle_feasibility", oracle.violation, kFeasibilityTol);

            const VarianceComparison vc = variance_comparison(block, spec, delta);
            const double var_c = spec.horizon() * sol.epsilon * sol.epsilon;
            const double var_u = spec.horizon() * free.epsilon * free.epsilon;
            rec.within("variance_closed_form",
                       std::max(std::abs(vc.var_constrained - var_c),
                                std::abs(vc.var_unconstrained - var_u)),
                       kIdentityTol);
            rec.add("variance_ordering", vc.var_unconstrained >= vc.var_constrained,
                    vc.var_unconstrained - vc.var_constrained, 0.0, "Var_u - Var_c");

            if (sol.pi.isZero(0.0)) {
                rec.add("constraint_binding", true, 0.0, kIdentityTol,
                        "zero portfolio; correlation undefined");
            } else {
                const double corr = log_correlation(market, sol.pi, bench->weights());
                rec.within("constraint_binding", std::abs(corr + delta), kIdentityTol);
                rec.add("lambda_positive", sol.lambda.value_or(0.0) > 0.0, sol.lambda.value_or(0.0), 0.0);
                const CorrelationCheck c =
                    mc_correlation_check(market, sol.pi, bench->weights(), spec, config.monte_carlo);
                rec.add("mc_correlation", c.pass, c.sample, 0.0,
                        band_detail(c.closed_form, c.lower, c.upper));
            }
            const QuantileCheck q = mc_quantile_check(market, sol.pi, spec, x, config.monte_carlo);
            rec.add("mc_quantile_constrained", q.pass, q.empirical, 0.0,
                    band_detail(q.closed_form, q.lower, q.upper));
        });
    }
}

}  // namespace

std::size_t VerifyReport::failures() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

VerifyReport run_verify(const ExperimentConfig& config) {
    // Settings other than the datasets must be valid before anything runs.
    ExperimentConfig settings = config;
    settings.datasets = {reference_dataset(1)};
    settings.validate();

    VerifyReport report;
    for (const auto& ds : config.datasets) {
        std::optional<BlockMarket> block;
        try {
            block = build_block_market(ds, config.rate, config.first_count);
        } catch (const Error& e) {
            report.invalid_datasets.push_back({ds.id, e.kind(), e.what()});
            continue;
        }
        verify_dataset(ds, config, *block, report);
    }
    return report;
}

}  // namespace carisk
