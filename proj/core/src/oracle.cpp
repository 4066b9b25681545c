#include "carisk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <vector>

#include "carisk/error.hpp"
#include "carisk/risk_measures.hpp"

namespace carisk {

NelderMeadResult minimize_nelder_mead(const std::function<double(const Vector&)>& objective,
                                      const Vector& start, double step,
                                      const NelderMeadOptions& options) {
    const Index n = start.size();
    std::vector<Vector> simplex(static_cast<std::size_t>(n + 1), start);
    std::vector<double> values(simplex.size());
    for (Index i = 0; i < n; ++i) {
        simplex[static_cast<std::size_t>(i + 1)](i) += step;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
        values[i] = objective(simplex[i]);
    }

    std::vector<std::size_t> order(simplex.size());
    NelderMeadResult result;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];

        double diameter = 0.0;
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            diameter = std::max(diameter, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
        }
        const double spread = values[worst] - values[best];
        if (spread <= options.f_tolerance * std::max(1.0, std::abs(values[best])) &&
            diameter <= options.x_tolerance * std::max(1.0, simplex[best].norm())) {
            result.converged = true;
            break;
        }

        Vector centroid = Vector::Zero(n);
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != worst) {
                centroid += simplex[i];
            }
        }
        centroid /= static_cast<double>(n);

        const Vector reflected = centroid + (centroid - simplex[worst]);
        const double f_reflected = objective(reflected);
        if (f_reflected < values[best]) {
            const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
            const double f_expanded = objective(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < values[worst];
        const Vector contracted = outside ? Vector(centroid + 0.5 * (reflected - centroid))
                                          : Vector(centroid + 0.5 * (simplex[worst] - centroid));
        const double f_contracted = objective(contracted);
        if (f_contracted < std::min(f_reflected, values[worst])) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != best) {
                simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
                values[i] = objective(simplex[i]);
            }
        }
    }

    const auto best = static_cast<std::size_t>(
        std::min_element(values.begin(), values.end()) - values.begin());
    result.x = simplex[best];
    result.value = values[best];
    result.iterations = it;
    return result;
}

namespace {

struct RestartOutcome {
    Vector exposure;
    bool converged = false;
};

// Repeated Nelder-Mead from the incumbent until a fresh simplex no longer
// improves the objective.
NelderMeadResult descend(const std::function<double(const Vector&)>& objective, Vector start,
                         double step, const OracleConfig& config) {
    NelderMeadOptions options;
    options.max_iterations = config.max_iterations;
    options.f_tolerance = config.tolerance;

    NelderMeadResult best = minimize_nelder_mead(objective, start, step, options);
    for (int round = 0; round < 25; ++round) {
        const double polish_step = 1e-3 * std::max(1e-3, best.x.norm());
        NelderMeadResult next = minimize_nelder_mead(objective, best.x, polish_step, options);
        const double gain = best.value - next.value;
        const bool settled =
            gain <= config.tolerance * std::max(1.0, std::abs(best.value)) && next.converged;
        if (next.value < best.value) {
            best = std::move(next);
        } else {
            best.converged = best.converged || next.converged;
        }
        if (settled) {
            best.converged = true;
            break;
        }
    }
    return best;
}

template <typename Fn>
double golden_section(Fn f, double lo, double hi) {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - ratio * (hi - lo);
    double b = lo + ratio * (hi - lo);
    double fa = f(a);
    double fb = f(b);
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        if (fa <= fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    // Endpoints are candidates too; the apex s = 0 is always admissible.
    double best = 0.5 * (lo + hi);
    double best_value = f(best);
    for (double s : {0.0, 1.0}) {
        const double value = f(s);
        if (value < best_value) {
            best = s;
            best_value = value;
        }
    }
    return best;
}

}  // namespace

OracleResult numeric_min_car(const MarketModel& market, const RiskSpec& spec,
                             const std::optional<ConstraintSpec>& constraint,
                             const OracleConfig& config) {
    if (config.restarts < 4) {
        throw Error(ErrorKind::InvalidInput, "oracle needs at least 4 restarts");
    }
    if (!(config.tolerance > 0.0)) {
        throw Error(ErrorKind::InvalidInput, "oracle tolerance must be positive");
    }
    const Index d = market.dim();
    const double t = spec.horizon();
    const double z = spec.z_alpha();
    const Vector& b = market.excess();

    // Work in exposure coordinates w = sigma' pi, so pi = sigma'^{-1} w.
    auto to_portfolio = [&](const Vector& w) { return market.solve_transpose(w); };
    auto car_of = [&](const Vector& w) {
        const double eps = w.norm();
        return -b.dot(to_portfolio(w)) * t + 0.5 * eps * eps * t - z * eps * std::sqrt(t);
    };
    auto constraint_of = [&](const Vector& w) {
        const auto& bench = constraint->benchmark();
        return constraint->delta() * bench.exposure_norm() * w.norm() + w.dot(bench.exposure());
    };

    auto run_restart = [&](int index) {
        std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ULL);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        Vector w = Vector::Zero(d);
        if (index > 0) {
            for (Index i = 0; i < d; ++i) {
                w(i) = unit(rng);
            }
        }
        RestartOutcome out;
        if (!constraint) {
            auto res = descend(car_of, w, 0.25, config);
            out.exposure = res.x;
            out.converged = res.converged;
            return out;
        }
        bool converged = true;
        double step = 0.25;
        for (double mu = config.penalty_initial; mu <= config.penalty_max * (1.0 + 1e-12);
             mu *= config.penalty_growth) {
            auto penalized = [&](const Vector& x) {
                const double g = std::max(0.0, constraint_of(x));
                return car_of(x) + mu * g * g;
            };
            auto res = descend(penalized, w, step, config);
            w = res.x;
            converged = res.converged;
            step = std::max(1e-4, 1e-2 * w.norm());
        }
        out.exposure = w;
        out.converged = converged;
        return out;
    };

    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
    if (config.parallel) {
        std::vector<std::future<RestartOutcome>> jobs;
        for (int r = 0; r < config.restarts; ++r) {
            jobs.push_back(std::async(std::launch::async, run_restart, r));
        }
        for (int r = 0; r < config.restarts; ++r) {
            outcomes[static_cast<std::size_t>(r)] = jobs[static_cast<std::size_t>(r)].get();
        }
    } else {
        for (int r = 0; r < config.restarts; ++r) {
            outcomes[static_cast<std::size_t>(r)] = run_restart(r);
        }
    }

    OracleResult best;
    best.car = std::numeric_limits<double>::infinity();
    for (auto& outcome : outcomes) {
        Vector w = outcome.exposure;
        if (constraint && constraint_of(w) > 0.0) {
            // Feasibility restoration: g(w - s v) is strictly decreasing in s.
            const Vector& v = constraint->benchmark().exposure();
            double hi = 1e-12;
            while (constraint_of(w - hi * v) > 0.0) {
                hi *= 2.0;
            }
            double lo = 0.0;
            for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) {
                    break;
                }
                (constraint_of(w - mid * v) > 0.0 ? lo : hi) = mid;
            }
            w -= hi * v;
        }
        // The feasible set is a cone, so rescaling w keeps it feasible; a
        // golden-section search on the scale settles points near the apex.
        w *= golden_section([&](double s) { return car_of(s * w); }, 0.0, 2.0);
        const Vector pi = to_portfolio(w);
        const double car = capital_at_risk(market, pi, spec);
        if (outcome.converged) {
            ++best.converged_restarts;
        }
        if (car < best.car) {
            best.car = car;
            best.pi = pi;
            best.violation = constraint ? std::max(0.0, constraint_of(w)) : 0.0;
        }
    }
    if (best.converged_restarts == 0) {
        throw Error(ErrorKind::NoConvergence, "no oracle restart converged");
    }
    return best;
}

}  // namespace carisk
