#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carisk/error.hpp"
#include "carisk/experiments.hpp"

namespace carisk {

struct CheckResult {
    std::string name;
    std::string dataset;
    std::optional<double> delta;
    bool passed = false;
    /// Measured discrepancy (or statistic) and the threshold it is held to.
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

/// A dataset that could not be turned into a valid market.
struct DatasetFailure {
    std::string dataset;
    ErrorKind kind = ErrorKind::InvalidInput;
    std::string message;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    std::vector<DatasetFailure> invalid_datasets;

    std::size_t failures() const noexcept;
    bool passed() const noexcept { return failures() == 0 && invalid_datasets.empty(); }
};

/// End-to-end verification for every configured dataset at its Cholesky
/// volatility: closed-form identities, numerical-oracle agreement and the
/// Monte Carlo quantile, moment and correlation checks, once without and
/// once per delta with the growth-optimal benchmark. A failing point is
/// recorded and the run continues.
VerifyReport run_verify(const ExperimentConfig& config);

}  // namespace carisk
