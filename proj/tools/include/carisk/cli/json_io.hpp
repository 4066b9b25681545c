#pragma once

#include <nlohmann/json.hpp>

#include "carisk/solvers.hpp"
#include "carisk/verify.hpp"

namespace carisk::cli {

// Non-finite numbers are written as null.
nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const PortfolioSolution& solution);
nlohmann::json to_json(const VerifyReport& report);

}  // namespace carisk::cli
