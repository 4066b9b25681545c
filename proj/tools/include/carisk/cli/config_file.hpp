#pragma once

#include <string>

#include "carisk/experiments.hpp"

namespace carisk::cli {

/// Reads an experiment configuration from YAML. Keys left out keep the
/// ExperimentConfig defaults. Datasets are either reference ids or inline
/// markets:
///
///   datasets:
///     - 1
///     - id: custom
///       gammas: [0.2, 0.25]
///       correlation: [1.0, 0.3, 0.3, 1.0]   # row-major, or a list of rows
///       excess: [0.05, 0.07]
///
/// Unknown keys are rejected so typos do not silently fall back to defaults.
/// Throws Error(InvalidInput) on malformed input; values are validated
/// afterwards by ExperimentConfig::validate.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);

/// Serializes a configuration so that parse_config(dump_config(c))
/// reproduces c exactly (all numbers at round-trip precision, datasets
/// inline).
std::string dump_config(const ExperimentConfig& config);

}  // namespace carisk::cli
