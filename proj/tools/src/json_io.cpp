#include "carisk/cli/json_io.hpp"

#include <cmath>

namespace carisk::cli {

namespace {

nlohmann::json number(double value) {
    if (!std::isfinite(value)) {
        return nullptr;
    }
    return value == 0.0 ? 0.0 : value;  // folds -0
}

}  // namespace

nlohmann::json to_json(const Vector& v) {
    auto out = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) {
        out.push_back(number(v(i)));
    }
    return out;
}

nlohmann::json to_json(const PortfolioSolution& solution) {
    return {
        {"pi", to_json(solution.pi)},
        {"riskless_fraction", number(1.0 - solution.pi.sum())},
        {"lambda", solution.lambda ? number(*solution.lambda) : nlohmann::json(nullptr)},
        {"epsilon", number(solution.epsilon)},
        {"car", number(solution.car)},
        {"binding", solution.binding},
    };
}

nlohmann::json to_json(const VerifyReport& report) {
    auto checks = nlohmann::json::array();
    for (const auto& c : report.checks) {
        checks.push_back({
            {"name", c.name},
            {"dataset", c.dataset},
            {"delta", c.delta ? number(*c.delta) : nlohmann::json(nullptr)},
            {"passed", c.passed},
            {"measured", number(c.measured)},
            {"tolerance", number(c.tolerance)},
            {"detail", c.detail},
        });
    }
    auto invalid = nlohmann::json::array();
    for (const auto& f : report.invalid_datasets) {
        invalid.push_back({{"dataset", f.dataset}, {"kind", to_string(f.kind)}, {"message", f.message}});
    }
    return {
        {"passed", report.passed()},
        {"checks_total", report.checks.size()},
        {"checks_failed", report.failures()},
        {"invalid_datasets", invalid},
        {"checks", checks},
    };
}

}  // namespace carisk::cli
