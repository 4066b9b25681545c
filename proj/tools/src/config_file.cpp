#include "carisk/cli/config_file.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "carisk/error.hpp"

namespace carisk::cli {

namespace {

[[noreturn]] void fail(const std::string& message) {
    throw Error(ErrorKind::InvalidInput, "config: " + message);
}

void reject_unknown(const YAML::Node& node, const std::string& where,
                    const std::set<std::string>& known) {
    if (!node.IsMap()) {
        fail(where + " must be a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!known.count(key)) {
            fail("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail("'" + key + "' has the wrong type");
    }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
    if (!node.IsSequence()) {
        fail("'" + key + "' must be a list of numbers");
    }
    std::vector<double> values;
    for (const auto& item : node) {
        values.push_back(scalar<double>(item, key));
    }
    return values;
}

Vector to_vector(const std::vector<double>& values) {
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Matrix read_matrix(const YAML::Node& node, Index dim, const std::string& key) {
    if (!node.IsSequence()) {
        fail("'" + key + "' must be a list");
    }
    std::vector<double> flat;
    if (node.size() > 0 && node[0].IsSequence()) {
        for (const auto& row : node) {
            const auto values = number_list(row, key);
            if (static_cast<Index>(values.size()) != dim) {
                fail("'" + key + "' rows must have " + std::to_string(dim) + " entries");
            }
            flat.insert(flat.end(), values.begin(), values.end());
        }
    } else {
        flat = number_list(node, key);
    }
    if (static_cast<Index>(flat.size()) != dim * dim) {
        fail("'" + key + "' needs " + std::to_string(dim * dim) + " entries (row-major)");
    }
    Matrix m(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        for (Index j = 0; j < dim; ++j) {
            m(i, j) = flat[static_cast<std::size_t>(i * dim + j)];
        }
    }
    return m;
}

MarketDataset read_dataset(const YAML::Node& node) {
    if (node.IsScalar()) {
        return reference_dataset(scalar<int>(node, "datasets"));
    }
    reject_unknown(node, "dataset", {"id", "gammas", "correlation", "excess"});
    for (const char* key : {"id", "gammas", "correlation", "excess"}) {
        if (!node[key]) {
            fail(std::string("inline dataset needs '") + key + "'");
        }
    }
    MarketDataset ds;
    ds.id = scalar<std::string>(node["id"], "id");
    ds.gammas = to_vector(number_list(node["gammas"], "gammas"));
    ds.excess = to_vector(number_list(node["excess"], "excess"));
    ds.correlation = read_matrix(node["correlation"], ds.gammas.size(), "correlation");
    return ds;
}

GridSpec read_grid(const YAML::Node& node, const std::string& key, GridSpec grid) {
    reject_unknown(node, key, {"min", "max", "points"});
    if (node["min"]) grid.min = scalar<double>(node["min"], key + ".min");
    if (node["max"]) grid.max = scalar<double>(node["max"], key + ".max");
    if (node["points"]) grid.points = scalar<int>(node["points"], key + ".points");
    return grid;
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        fail(std::string("cannot parse YAML: ") + e.what());
    }
    ExperimentConfig config;
    if (root.IsNull()) {
        return config;
    }
    reject_unknown(root, "top level",
                   {"dataset", "datasets", "rate", "first_count", "deltas", "sigma11_grid",
                    "delta_grid", "reduction_sigma11", "alpha", "horizon", "initial_wealth",
                    "monte_carlo", "oracle", "output"});

    if (root["dataset"] && root["datasets"]) {
        fail("give either 'dataset' or 'datasets', not both");
    }
    if (root["dataset"]) {
        config.datasets = {read_dataset(root["dataset"])};
    }
    if (const auto list = root["datasets"]) {
        if (!list.IsSequence()) {
            fail("'datasets' must be a list");
        }
        config.datasets.clear();
        for (const auto& item : list) {
            config.datasets.push_back(read_dataset(item));
        }
    }
    if (root["rate"]) config.rate = scalar<double>(root["rate"], "rate");
    if (root["first_count"]) config.first_count = scalar<Index>(root["first_count"], "first_count");
    if (root["deltas"]) config.deltas = number_list(root["deltas"], "deltas");
    if (root["sigma11_grid"])
        config.sigma11_grid = read_grid(root["sigma11_grid"], "sigma11_grid", config.sigma11_grid);
    if (root["delta_grid"])
        config.delta_grid = read_grid(root["delta_grid"], "delta_grid", config.delta_grid);
    if (root["reduction_sigma11"])
        config.reduction_sigma11 = number_list(root["reduction_sigma11"], "reduction_sigma11");
    if (root["alpha"]) config.alpha = scalar<double>(root["alpha"], "alpha");
    if (root["horizon"]) config.horizon = scalar<double>(root["horizon"], "horizon");
    if (root["initial_wealth"])
        config.initial_wealth = scalar<double>(root["initial_wealth"], "initial_wealth");
    if (const auto mc = root["monte_carlo"]) {
        reject_unknown(mc, "monte_carlo", {"paths", "seed", "confidence", "threads"});
        if (mc["paths"]) config.monte_carlo.paths = scalar<std::size_t>(mc["paths"], "paths");
        if (mc["seed"]) config.monte_carlo.seed = scalar<std::uint64_t>(mc["seed"], "seed");
        if (mc["confidence"])
            config.monte_carlo.confidence = scalar<double>(mc["confidence"], "confidence");
        if (mc["threads"]) config.monte_carlo.threads = scalar<unsigned>(mc["threads"], "threads");
    }
    if (const auto oracle = root["oracle"]) {
        reject_unknown(oracle, "oracle", {"restarts", "seed"});
        if (oracle["restarts"]) config.oracle.restarts = scalar<int>(oracle["restarts"], "restarts");
        if (oracle["seed"]) config.oracle.seed = scalar<std::uint64_t>(oracle["seed"], "oracle.seed");
    }
    if (root["output"]) config.output_dir = scalar<std::string>(root["output"], "output");
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail("cannot open " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

namespace {

YAML::Emitter& operator<<(YAML::Emitter& out, const Vector& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Index i = 0; i < v.size(); ++i) {
        out << v(i);
    }
    return out << YAML::EndSeq;
}

void emit_grid(YAML::Emitter& out, const char* key, const GridSpec& grid) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap
        << YAML::Key << "min" << YAML::Value << grid.min
        << YAML::Key << "max" << YAML::Value << grid.max
        << YAML::Key << "points" << YAML::Value << grid.points << YAML::EndMap;
}

}  // namespace

std::string dump_config(const ExperimentConfig& config) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "datasets" << YAML::Value << YAML::BeginSeq;
    for (const auto& ds : config.datasets) {
        const Index d = ds.gammas.size();
        Vector flat(ds.correlation.size());
        for (Index i = 0; i < ds.correlation.rows(); ++i) {
            for (Index j = 0; j < ds.correlation.cols(); ++j) {
                flat(i * d + j) = ds.correlation(i, j);
            }
        }
        out << YAML::BeginMap << YAML::Key << "id" << YAML::Value << ds.id
            << YAML::Key << "gammas" << YAML::Value << ds.gammas
            << YAML::Key << "correlation" << YAML::Value << flat
            << YAML::Key << "excess" << YAML::Value << ds.excess << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "rate" << YAML::Value << config.rate;
    out << YAML::Key << "first_count" << YAML::Value << config.first_count;
    out << YAML::Key << "deltas" << YAML::Value << YAML::Flow << config.deltas;
    emit_grid(out, "sigma11_grid", config.sigma11_grid);
    emit_grid(out, "delta_grid", config.delta_grid);
    out << YAML::Key << "reduction_sigma11" << YAML::Value << YAML::Flow
        << config.reduction_sigma11;
    out << YAML::Key << "alpha" << YAML::Value << config.alpha;
    out << YAML::Key << "horizon" << YAML::Value << config.horizon;
    out << YAML::Key << "initial_wealth" << YAML::Value << config.initial_wealth;
    out << YAML::Key << "monte_carlo" << YAML::Value << YAML::BeginMap
        << YAML::Key << "paths" << YAML::Value << config.monte_carlo.paths
        << YAML::Key << "seed" << YAML::Value << config.monte_carlo.seed
        << YAML::Key << "confidence" << YAML::Value << config.monte_carlo.confidence
        << YAML::Key << "threads" << YAML::Value << config.monte_carlo.threads << YAML::EndMap;
    out << YAML::Key << "oracle" << YAML::Value << YAML::BeginMap
        << YAML::Key << "restarts" << YAML::Value << config.oracle.restarts
        << YAML::Key << "seed" << YAML::Value << config.oracle.seed << YAML::EndMap;
    out << YAML::Key << "output" << YAML::Value << config.output_dir;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace carisk::cli
