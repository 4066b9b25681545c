#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "carisk/market_model.hpp"
#include "carisk/solvers.hpp"

namespace carisk {

struct NelderMeadOptions {
    int max_iterations = 20000;
    /// Stop once the spread of objective values over the simplex and the
    /// simplex diameter both fall below these.
    double f_tolerance = 1e-15;
    double x_tolerance = 1e-11;
};

struct NelderMeadResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Plain Nelder-Mead simplex descent (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2) from an axis-aligned starting simplex.
NelderMeadResult minimize_nelder_mead(const std::function<double(const Vector&)>& objective,
                                      const Vector& start, double step,
                                      const NelderMeadOptions& options = {});

struct OracleConfig {
    int max_iterations = 20000;
    /// Convergence tolerance on the (penalized) CaR.
    double tolerance = 1e-14;
    double penalty_initial = 1.0;
    double penalty_growth = 10.0;
    double penalty_max = 1e8;
    /// Independent random starts; at least 4.
    int restarts = 6;
    std::uint64_t seed = 20240917;
    bool parallel = true;
};

struct OracleResult {
    Vector pi;
    double car = 0.0;
    /// max(0, delta |sigma'eta| |sigma'pi| + pi' sigma sigma' eta) at pi.
    double violation = 0.0;
    int converged_restarts = 0;
};

/// Re-solves the minimum-CaR problem numerically, optionally under the
/// correlation constraint, with no use of the analytic solutions.
///
/// Each restart runs Nelder-Mead on CaR plus an exterior quadratic penalty
/// mu * max(0, g)^2 with mu escalated geometrically; the search runs over
/// the exposure sigma' pi, which is better conditioned than pi itself. The
/// final point of a constrained run is pulled back onto the feasible set
/// along -eta, which lowers g monotonically, and its length is then tuned
/// by a golden-section search (the feasible set is a cone, so scaling keeps
/// it feasible). The best feasible point over all restarts is returned. Throws NoConvergence if no restart converged.
OracleResult numeric_min_car(const MarketModel& market, const RiskSpec& spec,
                             const std::optional<ConstraintSpec>& constraint,
                             const OracleConfig& config = {});

}  // namespace carisk
