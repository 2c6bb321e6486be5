// Integration drivers shared by the CLI and the test suites: fixed-step and
// seeded random-ratio runs, frozen-pattern convergence studies, the
// refactorized-vs-one-leg equivalence experiment, and CSV/JSON emission.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dln/adaptivity.hpp"
#include "dln/rng.hpp"

namespace dln {

/// Multiplicative random-ratio pattern: u_0 = 1,
/// u_{i+1} = clamp(u_i * r_i, 1/8, 8) with r_i log-uniform in `bounds`.
/// Steps are k_i = base_k * u_i, so consecutive ratios stay inside `bounds`
/// (the clamp can only pull a ratio toward 1) and the pattern is frozen by
/// the seed: scaling base_k rescales every step without changing ratios.
class StepPattern {
public:
    StepPattern(std::uint64_t seed, std::pair<double, double> bounds)
        : rng_(seed), lo_(bounds.first), hi_(bounds.second) {
        if (!(lo_ > 0.0) || !(hi_ >= lo_))
            throw std::domain_error("StepPattern: ratio bounds must satisfy 0 < lo <= hi");
    }

    /// Unit factor for step i (call with i = 0, 1, 2, ... in order).
    double next_factor() {
        const double f = current_;
        current_ = std::clamp(current_ * rng_.next_log_uniform(lo_, hi_), 0.125, 8.0);
        return f;
    }

private:
    Xorshift64Star rng_;
    double lo_, hi_;
    double current_ = 1.0;
};

namespace detail {

// Shared fixed/random-ratio loop. `next_k` yields the next nominal step; the
// final step is truncated to land on t_end.
template <typename NextK>
IntegrationResult integrate_prescribed(const ProblemInstance& instance,
                                       const Parameters& params, double k0,
                                       const NewtonConfig& newton, NextK&& next_k,
                                       bool use_oneleg) {
    if (!(k0 > 0.0)) throw std::domain_error("integrate: k0 must be positive");
    const OdeSystem& sys = instance.system;
    const double t_end = instance.t_end;
    const double land_tol = 1e-14 * std::max({1.0, std::abs(t_end), std::abs(instance.t0)});

    IntegrationResult out;
    const double k_start = std::min(k0, 0.5 * (t_end - instance.t0));
    StepState state = detail::bootstrap_recorded(sys, instance.t0, instance.y0, k_start,
                                                 newton, out);
    int n = 1;
    while (t_end - state.t_curr > land_tol) {
        const double k_attempt = std::min(next_k(), t_end - state.t_curr);
        StepReport rep = use_oneleg
                             ? dln_step_oneleg(sys, state, params, k_attempt, newton)
                             : dln_step_refactorized(sys, state, params, k_attempt, newton);
        if (!rep.newton.converged)
            throw std::runtime_error("integration: Newton did not converge at t = " +
                                     std::to_string(state.t_curr));

        double lte_scalar = 0.0;
        if (!state.tail.empty()) {
            std::vector<Node> nodes = state.recent_nodes();
            nodes.emplace_back(rep.t_next, rep.y_next);
            if (nodes.size() > 4) nodes.erase(nodes.begin(), nodes.end() - 4);
            const Vec y3 = estimate_third_derivative(nodes);
            const StepWindow win = make_step_window(params, k_attempt, state.k_prev());
            ControllerConfig scale_only;  // diagnostic norm only, default tolerances
            lte_scalar =
                make_lte_estimate(params, rep.coefficients, win, y3, rep.y_next, scale_only)
                    .scalar_error;
        }
        out.records.push_back(detail::record_from_report(n, k_attempt, params, rep, state,
                                                         lte_scalar, true));
        state.advance(rep.t_next, std::move(rep.y_next));
        out.trajectory.emplace_back(state.t_curr, state.y_curr);
        out.accepted += 1;
        ++n;
    }
    return out;
}

}  // namespace detail

inline IntegrationResult integrate_fixed(const ProblemInstance& instance,
                                         const Parameters& params, double k0,
                                         const NewtonConfig& newton,
                                         bool use_oneleg = false) {
    return detail::integrate_prescribed(instance, params, k0, newton,
                                        [k0] { return k0; }, use_oneleg);
}

inline IntegrationResult integrate_random_ratio(const ProblemInstance& instance,
                                                const Parameters& params, double k0,
                                                std::uint64_t seed,
                                                std::pair<double, double> bounds,
                                                const NewtonConfig& newton,
                                                bool use_oneleg = false) {
    StepPattern pattern(seed, bounds);
    return detail::integrate_prescribed(instance, params, k0, newton,
                                        [k0, &pattern] {
                                            return k0 * pattern.next_factor();
                                        },
                                        use_oneleg);
}

/// Max-norm error of the last trajectory node against the exact solution.
inline double terminal_error(const IntegrationResult& res, const OdeSystem& sys) {
    if (!sys.exact) return std::numeric_limits<double>::quiet_NaN();
    const auto& [t, y] = res.trajectory.back();
    return norm_inf_diff(y, sys.exact(t));
}

struct ConvergenceRow {
    int level = 0;
    double base_k = 0.0;
    double terminal_error = 0.0;
    double observed_order = 0.0;  // NaN on level 0
};

enum class StepMode { fixed, random_ratio, adaptive };

/// Halves base_k per level, holding the seeded ratio pattern fixed, and
/// reports observed orders log2(e_{l-1}/e_l). Requires an exact solution.
///
/// The pattern is frozen in time, not by step index: level l splits every
/// level-0 step into 2^l equal substeps, so the step-size profile k(t) is
/// identical across levels up to the overall base_k scale. Interior substep
/// ratios are 1 and junction ratios are the level-0 ratios, so every ratio
/// stays inside `bounds`.
inline std::vector<ConvergenceRow> convergence_study(const ProblemInstance& instance,
                                                     const Parameters& params, int levels,
                                                     StepMode mode, double k0,
                                                     std::uint64_t seed,
                                                     std::pair<double, double> bounds,
                                                     const NewtonConfig& newton) {
    if (!instance.system.exact)
        throw std::invalid_argument("convergence_study: problem '" + instance.system.name +
                                    "' has no exact solution");
    if (mode == StepMode::adaptive)
        throw std::invalid_argument("convergence_study: mode must be fixed or random-ratio");

    StepPattern pattern(seed, bounds);
    std::vector<double> unit;  // level-0 factors, extended on demand
    auto factor_at = [&](std::size_t j) {
        while (unit.size() <= j) unit.push_back(pattern.next_factor());
        return unit[j];
    };

    std::vector<ConvergenceRow> rows;
    double base_k = k0;
    for (int level = 0; level < levels; ++level, base_k *= 0.5) {
        IntegrationResult res;
        if (mode == StepMode::fixed) {
            res = integrate_fixed(instance, params, base_k, newton);
        } else {
            std::size_t i = 0;
            res = detail::integrate_prescribed(
                instance, params, base_k, newton,
                [&, base_k] { return base_k * factor_at(i++ >> level); },
                /*use_oneleg=*/false);
        }
        ConvergenceRow row;
        row.level = level;
        row.base_k = base_k;
        row.terminal_error = terminal_error(res, instance.system);
        row.observed_order =
            rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                         : std::log2(rows.back().terminal_error / row.terminal_error);
        rows.push_back(row);
    }
    return rows;
}

struct EquivalenceReport {
    double max_discrepancy = 0.0;
    int steps = 0;
};

/// Runs the refactorized and one-leg steppers over the same seeded step
/// sequence (two independent trajectories from a common bootstrap) and
/// reports the max infinity-norm discrepancy across all nodes.
inline EquivalenceReport equivalence_run(const ProblemInstance& instance,
                                         const Parameters& params, int steps, double k0,
                                         std::uint64_t seed,
                                         std::pair<double, double> bounds,
                                         const NewtonConfig& newton) {
    const OdeSystem& sys = instance.system;
    StepPattern pattern(seed, bounds);
    StepState refac = bootstrap_first_step(sys, instance.t0, instance.y0, k0, newton);
    StepState oneleg = refac;

    EquivalenceReport rep;
    rep.steps = steps;
    for (int i = 0; i < steps; ++i) {
        const double k = k0 * pattern.next_factor();
        StepReport a = dln_step_refactorized(sys, refac, params, k, newton);
        StepReport b = dln_step_oneleg(sys, oneleg, params, k, newton);
        if (!a.newton.converged || !b.newton.converged)
            throw std::runtime_error("equivalence_run: Newton did not converge at step " +
                                     std::to_string(i));
        rep.max_discrepancy =
            std::max(rep.max_discrepancy, norm_inf_diff(a.y_next, b.y_next));
        refac.advance(a.t_next, std::move(a.y_next));
        oneleg.advance(b.t_next, std::move(b.y_next));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Output

/// %.16e gives 17 significant digits: lossless round-trip for doubles.
inline std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

/// One row per accepted step. The exact_error column is populated on the
/// terminal row only (and only when the problem has an exact solution).
inline void write_run_csv(std::ostream& os, const IntegrationResult& res,
                          const OdeSystem& sys) {
    os << "n,t,k,eps";
    for (int i = 0; i < sys.dim; ++i) os << ",y" << i;
    os << ",lte_scalar,g_norm_sq,dissipation_sq,energy_residual,newton_iters,accepted,"
          "exact_error\n";

    const StepRecord* last = nullptr;
    for (const auto& r : res.records)
        if (r.accepted) last = &r;
    for (const auto& r : res.records) {
        if (!r.accepted) continue;
        os << r.n << ',' << format_full(r.t) << ',' << format_full(r.k) << ','
           << format_full(r.eps);
        for (double v : r.y) os << ',' << format_full(v);
        os << ',' << format_full(r.lte_scalar) << ',' << format_full(r.g_norm_sq) << ','
           << format_full(r.dissipation_sq) << ',' << format_full(r.energy_residual) << ','
           << r.newton_iters << ',' << 1 << ',';
        if (&r == last && sys.exact) os << format_full(norm_inf_diff(r.y, sys.exact(r.t)));
        os << '\n';
    }
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
    os << "level,base_k,terminal_error,observed_order\n";
    for (const auto& r : rows) {
        os << r.level << ',' << format_full(r.base_k) << ',' << format_full(r.terminal_error)
           << ',';
        if (!std::isnan(r.observed_order)) os << format_full(r.observed_order);
        os << '\n';
    }
}

}  // namespace dln
