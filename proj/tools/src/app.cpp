#include "carisk/cli/app.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carisk/cli/config_file.hpp"
#include "carisk/cli/json_io.hpp"
#include "carisk/error.hpp"
#include "carisk/experiments.hpp"
#include "carisk/report.hpp"
#include "carisk/solvers.hpp"
#include "carisk/verify.hpp"

namespace carisk::cli {

namespace {

namespace fs = std::filesystem;

// Command-line settings layered over the config file.
struct Overrides {
    std::string config_path;
    std::optional<int> dataset;
    std::vector<double> deltas;
    std::optional<double> alpha;
    std::optional<double> horizon;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

void add_common_options(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--config", o.config_path, "YAML experiment configuration");
    cmd.add_option("--dataset", o.dataset, "Reference dataset id")->check(CLI::IsMember({1, 2}));
    cmd.add_option("--delta", o.deltas, "Correlation thresholds, comma separated")->delimiter(',');
    cmd.add_option("--alpha", o.alpha, "Confidence level in (0, 0.5)");
    cmd.add_option("--horizon", o.horizon, "Horizon T in years");
    cmd.add_option("--paths", o.paths, "Monte Carlo paths");
    cmd.add_option("--seed", o.seed, "Monte Carlo seed");
    cmd.add_option("--out", o.out_dir, "Output directory");
}

// `verify` validates datasets itself so that a bad one is reported, not fatal.
ExperimentConfig resolve_config(const Overrides& o, bool validate = true) {
    ExperimentConfig config = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    if (o.dataset) config.datasets = {reference_dataset(*o.dataset)};
    if (!o.deltas.empty()) config.deltas = o.deltas;
    if (o.alpha) config.alpha = *o.alpha;
    if (o.horizon) config.horizon = *o.horizon;
    if (o.paths) config.monte_carlo.paths = *o.paths;
    if (o.seed) config.monte_carlo.seed = *o.seed;
    if (o.out_dir) config.output_dir = *o.out_dir;
    if (validate) {
        config.validate();
    }
    return config;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    file << text;
    if (!file) {
        throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
    }
}

fs::path prepare_output(const ExperimentConfig& config) {
    const fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorKind::InvalidInput, "cannot create " + dir.string() + ": " + ec.message());
    }
    // The effective configuration, enough to regenerate every file here.
    write_file(dir / "config.yaml", dump_config(config));
    return dir;
}

void emit_tables(const std::vector<ExperimentTable>& tables, const fs::path& dir,
                 std::ostream& out) {
    for (const auto& table : tables) {
        const std::string stem = table.experiment + "_" + table.dataset;
        const std::string csv = to_csv(table);
        write_file(dir / (stem + ".csv"), csv);
        write_file(dir / (stem + ".svg"),
                   render_line_plot(parse_csv(csv), plot_spec_for(table.experiment, table.dataset)));
        std::size_t flagged = 0;
        for (const auto& row : table.rows) {
            flagged += row.status != row_status::kOk;
        }
        out << (dir / (stem + ".csv")).string() << ": " << table.rows.size() << " rows";
        if (flagged > 0) {
            out << " (" << flagged << " flagged)";
        }
        out << "\n";
    }
}

int cmd_solve(const Overrides& o, std::optional<double> sigma11, std::ostream& out) {
    const ExperimentConfig config = resolve_config(o);
    const RiskSpec spec = config.risk_spec();
    auto results = nlohmann::json::array();
    for (const auto& ds : config.datasets) {
        BlockMarket block = build_block_market(ds, config.rate, config.first_count);
        if (sigma11) {
            if (config.first_count != 1) {
                throw Error(ErrorKind::UnsupportedPartition, "--sigma11 needs first_count = 1");
            }
            block = block.with_sigma11(Matrix::Constant(1, 1, *sigma11));
        }
        const MarketModel market = block.to_market();
        const BenchmarkPortfolio benchmark = growth_optimal_benchmark(block);
        auto constrained = nlohmann::json::array();
        for (double delta : config.deltas) {
            const auto solution = solve_constrained(market, spec, ConstraintSpec(benchmark, delta));
            constrained.push_back({{"delta", delta}, {"solution", to_json(solution)}});
        }
        results.push_back({
            {"dataset", ds.id},
            {"sigma11", block.sigma11()(0, 0)},
            {"alpha", config.alpha},
            {"horizon", config.horizon},
            {"benchmark", to_json(benchmark.weights())},
            {"unconstrained", to_json(solve_unconstrained(market, spec))},
            {"constrained", constrained},
        });
    }
    out << nlohmann::json{{"results", results}}.dump(2) << "\n";
    return kSuccess;
}

int cmd_sweep(const std::string& which, const Overrides& o, std::ostream& out) {
    const ExperimentConfig config = resolve_config(o);
    const fs::path dir = prepare_output(config);
    if (which == experiment_id::kVariance) {
        emit_tables(run_variance_sweep(config), dir, out);
    } else if (which == experiment_id::kRiskless) {
        emit_tables(run_riskless_fraction_sweep(config), dir, out);
    } else {
        const ReductionSweep sweep = run_variance_reduction_sweep(config);
        emit_tables(sweep.tables, dir, out);
        write_file(dir / "reduction_crossings.csv", crossings_to_csv(sweep.crossings));
        for (const auto& c : sweep.crossings) {
            out << "dataset " << c.dataset << ", sigma11 " << format_number(c.sigma11)
                << ": 50% reduction at delta "
                << (c.delta ? format_number(*c.delta) : std::string("(not reached)")) << "\n";
        }
    }
    return kSuccess;
}

int cmd_verify(const Overrides& o, std::ostream& out) {
    const ExperimentConfig config = resolve_config(o, false);
    const fs::path dir = prepare_output(config);
    const VerifyReport report = run_verify(config);
    write_file(dir / "verify_report.json", to_json(report).dump(2) + "\n");

    for (const auto& f : report.invalid_datasets) {
        out << "dataset " << f.dataset << ": " << to_string(f.kind) << " - " << f.message << "\n";
    }
    for (const auto& c : report.checks) {
        if (!c.passed) {
            out << "FAIL " << c.name << " [dataset " << c.dataset;
            if (c.delta) {
                out << ", delta " << format_number(*c.delta);
            }
            out << "] measured " << format_number(c.measured) << " tolerance "
                << format_number(c.tolerance);
            if (!c.detail.empty()) {
                out << " (" << c.detail << ")";
            }
            out << "\n";
        }
    }
    out << report.checks.size() - report.failures() << "/" << report.checks.size()
        << " checks passed";
    if (!report.invalid_datasets.empty()) {
        out << ", " << report.invalid_datasets.size() << " dataset(s) rejected";
    }
    out << "; report in " << (dir / "verify_report.json").string() << "\n";

    // A rejected dataset is an input problem rather than a failed check.
    if (!report.invalid_datasets.empty()) {
        return kValidationError;
    }
    return report.passed() ? kSuccess : kVerificationFailure;
}

int cmd_render(const std::string& csv_path, const std::string& svg_path, std::ostream& out) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::InvalidInput, "cannot open " + csv_path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    const CsvTable table = parse_csv(text.str());
    if (table.rows.empty()) {
        throw Error(ErrorKind::InvalidInput, csv_path + " has no data rows");
    }
    const auto& first = table.rows.front();
    const std::string experiment = first.at(table.column("experiment"));
    const std::string dataset = first.at(table.column("dataset"));
    write_file(svg_path, render_line_plot(table, plot_spec_for(experiment, dataset)));
    out << svg_path << "\n";
    return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Minimum Capital-at-Risk portfolios under a benchmark correlation constraint",
                 "carisk"};
    app.require_subcommand(1);

    Overrides o;
    std::optional<double> sigma11;
    std::string csv_path;
    std::string svg_path;

    auto* solve = app.add_subcommand("solve", "Print optimal portfolios as JSON");
    add_common_options(*solve, o);
    solve->add_option("--sigma11", sigma11, "Override the first-group volatility")
        ->check(CLI::PositiveNumber);
    struct Sweep {
        const char* name;
        const char* help;
    };
    std::vector<CLI::App*> sweeps;
    for (const Sweep& s : {Sweep{"sweep-variance", "Log-return variances across the sigma11 grid"},
                           Sweep{"sweep-riskless", "Riskless fractions across the sigma11 grid"},
                           Sweep{"sweep-reduction", "Variance reduction across the delta grid"}}) {
        sweeps.push_back(app.add_subcommand(s.name, s.help));
        add_common_options(*sweeps.back(), o);
    }
    auto* verify = app.add_subcommand("verify", "Run the verification suite");
    add_common_options(*verify, o);
    auto* render = app.add_subcommand("render", "Re-render a plot from an experiment CSV");
    render->add_option("--csv", csv_path, "Experiment CSV")->required();
    render->add_option("--svg", svg_path, "SVG file to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kValidationError;
    }

    try {
        if (solve->parsed()) return cmd_solve(o, sigma11, out);
        if (sweeps[0]->parsed()) return cmd_sweep(experiment_id::kVariance, o, out);
        if (sweeps[1]->parsed()) return cmd_sweep(experiment_id::kRiskless, o, out);
        if (sweeps[2]->parsed()) return cmd_sweep(experiment_id::kReduction, o, out);
        if (verify->parsed()) return cmd_verify(o, out);
        return cmd_render(csv_path, svg_path, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_degenerate(e.kind()) ? kDegenerateInstance : kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    }
}

}  // namespace carisk::cli
