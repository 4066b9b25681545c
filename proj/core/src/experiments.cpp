#include "carisk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "carisk/error.hpp"
#include "carisk/risk_measures.hpp"
#include "carisk/solvers.hpp"
#include "parallel.hpp"

namespace carisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, ErrorKind kind, const std::string& message) {
    if (!ok) {
        throw Error(kind, message);
    }
}

bool row_less(const ResultRow& a, const ResultRow& b) {
    return std::tie(a.experiment, a.dataset, a.delta, a.sigma11) <
           std::tie(b.experiment, b.dataset, b.delta, b.sigma11);
}

struct GridPoint {
    std::size_t dataset;
    double sigma11;
    double delta;
};

std::vector<ExperimentTable> tabulate(const ExperimentConfig& config,
                                      const std::string& experiment,
                                      const std::vector<GridPoint>& points) {
    config.validate();
    require(config.first_count == 1, ErrorKind::UnsupportedPartition,
            "sweeps vary a scalar first-group volatility and need first_count = 1");
    const RiskSpec spec = config.risk_spec();
    std::vector<BlockMarket> bases;
    for (const auto& ds : config.datasets) {
        bases.push_back(build_block_market(ds, config.rate, config.first_count));
    }

    auto rows = detail::parallel_map<ResultRow>(points.size(), [&](std::size_t i) {
        const GridPoint& p = points[i];
        return evaluate_point(bases[p.dataset], config.datasets[p.dataset].id, experiment,
                              p.sigma11, p.delta, spec);
    });

    std::vector<ExperimentTable> tables;
    for (const auto& ds : config.datasets) {
        ExperimentTable table{experiment, ds.id, {}};
        for (const auto& row : rows) {
            if (row.dataset == ds.id) {
                table.rows.push_back(row);
            }
        }
        std::sort(table.rows.begin(), table.rows.end(), row_less);
        tables.push_back(std::move(table));
    }
    return tables;
}

std::vector<GridPoint> sigma11_points(const ExperimentConfig& config) {
    std::vector<GridPoint> points;
    const auto grid = config.sigma11_grid.values();
    for (std::size_t d = 0; d < config.datasets.size(); ++d) {
        for (double delta : config.deltas) {
            for (double s : grid) {
                points.push_back({d, s, delta});
            }
        }
    }
    return points;
}

}  // namespace

MarketDataset reference_dataset(int id) {
    MarketDataset ds;
    ds.gammas = Vector(3);
    ds.gammas << 0.2, 0.25, 0.3;
    ds.correlation = Matrix(3, 3);
    ds.excess = Vector(3);
    if (id == 1) {
        ds.id = "1";
        ds.correlation << 1.0, -0.6, -0.8,
                          -0.6, 1.0, 0.5,
                          -0.8, 0.5, 1.0;
        ds.excess << 0.07, 0.05, 0.03;
    } else if (id == 2) {
        ds.id = "2";
        ds.correlation << 1.0, -0.3, 0.5,
                          -0.3, 1.0, -0.9,
                          0.5, -0.9, 1.0;
        ds.excess << 0.03, 0.05, 0.07;
    } else {
        throw Error(ErrorKind::InvalidInput, "unknown dataset id " + std::to_string(id));
    }
    return ds;
}

std::vector<double> GridSpec::values() const {
    std::vector<double> out;
    if (points == 1) {
        out.push_back(min);
        return out;
    }
    for (int i = 0; i < points; ++i) {
        out.push_back(min + (max - min) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    return out;
}

void ExperimentConfig::validate() const {
    require(!datasets.empty(), ErrorKind::InvalidInput, "no dataset selected");
    require(first_count >= 1, ErrorKind::DimensionMismatch, "first_count must be at least 1");
    require(std::isfinite(rate), ErrorKind::InvalidInput, "rate must be finite");
    (void)risk_spec();
    require(initial_wealth > 0.0, ErrorKind::InvalidInput, "initial wealth must be positive");
    for (double d : deltas) {
        require(d >= 0.0 && d < 1.0, ErrorKind::InvalidThreshold,
                "delta values must lie in [0, 1), got " + std::to_string(d));
    }
    require(sigma11_grid.points >= 1 && sigma11_grid.min > 0.0 &&
                sigma11_grid.max >= sigma11_grid.min,
            ErrorKind::InvalidInput, "sigma11 grid needs positive min <= max and >= 1 point");
    require(delta_grid.points >= 1 && delta_grid.min >= 0.0 &&
                delta_grid.max >= delta_grid.min && delta_grid.max < 1.0,
            ErrorKind::InvalidThreshold, "delta grid must lie in [0, 1)");
    for (double s : reduction_sigma11) {
        require(s > 0.0, ErrorKind::InvalidInput, "reduction sigma11 values must be positive");
    }
    require(monte_carlo.paths >= 2, ErrorKind::InvalidInput, "Monte Carlo needs >= 2 paths");
    require(monte_carlo.confidence > 0.0 && monte_carlo.confidence < 1.0,
            ErrorKind::InvalidInput, "Monte Carlo confidence must lie in (0, 1)");
    require(oracle.restarts >= 4, ErrorKind::InvalidInput, "oracle needs >= 4 restarts");
    for (const auto& ds : datasets) {
        try {
            (void)build_block_market(ds, rate, first_count);
        } catch (const Error& e) {
            throw Error(e.kind(), "dataset " + ds.id + ": " + e.what());
        }
    }
}

BlockMarket build_block_market(const MarketDataset& dataset, double rate, Index first_count) {
    const Matrix sigma = build_volatility_from_correlation(dataset.gammas, dataset.correlation);
    const MarketModel market(rate, dataset.excess, sigma);
    return partition_market(market, first_count);
}

ResultRow evaluate_point(const BlockMarket& base, const std::string& dataset,
                         const std::string& experiment, double sigma11, double delta,
                         const RiskSpec& spec) {
    ResultRow row;
    row.experiment = experiment;
    row.dataset = dataset;
    row.delta = delta;
    row.sigma11 = sigma11;

    const BlockMarket block = base.with_sigma11(Matrix::Constant(1, 1, sigma11));
    const MarketModel market = block.to_market();
    const double t = spec.horizon();

    const PortfolioSolution free = solve_unconstrained(market, spec);
    row.var_unconstrained = t * free.epsilon * free.epsilon;
    row.pi0_unconstrained = riskless_fraction(free.pi);
    row.car_unconstrained = free.car;

    try {
        const PortfolioSolution constrained = solve_pricing_kernel(block, spec, delta);
        row.var_constrained = t * constrained.epsilon * constrained.epsilon;
        row.pi0_constrained = riskless_fraction(constrained.pi);
        row.car_constrained = constrained.car;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateDirection) {
            throw;
        }
        row.var_constrained = kNaN;
        row.pi0_constrained = kNaN;
        row.car_constrained = kNaN;
        row.reduction_percent = kNaN;
        row.status = row_status::kDegenerate;
        return row;
    }

    if (row.var_unconstrained > 0.0) {
        row.reduction_percent = 100.0 * (1.0 - row.var_constrained / row.var_unconstrained);
    } else {
        row.reduction_percent = kNaN;
    }
    if (row.pi0_constrained < 0.0) {
        row.status = row_status::kNegativeRiskless;
    }
    if (experiment == experiment_id::kReduction && std::isnan(row.reduction_percent)) {
        row.status = row_status::kUndefinedReduction;
    }
    return row;
}

std::vector<ExperimentTable> run_variance_sweep(const ExperimentConfig& config) {
    return tabulate(config, experiment_id::kVariance, sigma11_points(config));
}

std::vector<ExperimentTable> run_riskless_fraction_sweep(const ExperimentConfig& config) {
    return tabulate(config, experiment_id::kRiskless, sigma11_points(config));
}

std::optional<double> half_reduction_crossing(const std::vector<ResultRow>& curve) {
    constexpr double kLevel = 50.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double r = curve[i].reduction_percent;
        if (std::isnan(r) || r < kLevel) {
            continue;
        }
        if (i == 0 || std::isnan(curve[i - 1].reduction_percent)) {
            return curve[i].delta;
        }
        const double r0 = curve[i - 1].reduction_percent;
        const double d0 = curve[i - 1].delta;
        const double d1 = curve[i].delta;
        return d0 + (kLevel - r0) / (r - r0) * (d1 - d0);
    }
    return std::nullopt;
}

ReductionSweep run_variance_reduction_sweep(const ExperimentConfig& config) {
    std::vector<GridPoint> points;
    const auto grid = config.delta_grid.values();
    for (std::size_t d = 0; d < config.datasets.size(); ++d) {
        for (double s : config.reduction_sigma11) {
            for (double delta : grid) {
                points.push_back({d, s, delta});
            }
        }
    }
    ReductionSweep sweep;
    sweep.tables = tabulate(config, experiment_id::kReduction, points);
    for (const auto& table : sweep.tables) {
        for (double s : config.reduction_sigma11) {
            std::vector<ResultRow> curve;
            for (const auto& row : table.rows) {
                if (row.sigma11 == s) {
                    curve.push_back(row);
                }
            }
            std::sort(curve.begin(), curve.end(),
                      [](const ResultRow& a, const ResultRow& b) { return a.delta < b.delta; });
            sweep.crossings.push_back({table.dataset, s, half_reduction_crossing(curve)});
        }
    }
    return sweep;
}

}  // namespace carisk
