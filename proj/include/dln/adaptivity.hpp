// Local truncation error estimation from the differentiation defect, a
// divided-difference third-derivative estimator, and the accept/reject step
// controller built on the O(k^3) per-step error scaling.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dln/coefficients.hpp"
#include "dln/diagnostics.hpp"
#include "dln/ode_problem.hpp"
#include "dln/stepper.hpp"

namespace dln {

/// The divided defect (units of y'), the per-step error khat*defect
/// (units of y), and its weighted RMS norm against the tolerances.
struct LteEstimate {
    Vec defect;
    Vec per_step_error;
    double scalar_error = 0.0;
};

struct ControllerConfig {
    double tol_abs = 1e-6;
    double tol_rel = 1e-6;
    double safety = 0.9;
    double ratio_min = 0.5;
    double ratio_max = 2.0;
    double k_min = 1e-12;
    double k_max = 1e6;
    int newton_retry_limit = 10;  // rejections due to Newton failure, per step
};

inline void validate(const ControllerConfig& c) {
    if (!(c.tol_abs > 0.0) || !(c.tol_rel >= 0.0))
        throw std::domain_error("ControllerConfig: tol_abs must be > 0, tol_rel >= 0");
    if (!(c.safety > 0.0 && c.safety < 1.0))
        throw std::domain_error("ControllerConfig: safety must lie in (0,1)");
    if (!(c.ratio_min > 0.0 && c.ratio_min <= 1.0 && c.ratio_max >= 1.0))
        throw std::domain_error("ControllerConfig: need 0 < ratio_min <= 1 <= ratio_max");
    if (!(c.k_min > 0.0 && c.k_min <= c.k_max))
        throw std::domain_error("ControllerConfig: need 0 < k_min <= k_max");
}

/// The bracketed scalar of the defect formula:
/// (1/(3 khat))(k_n^3 - (alpha0/alpha2) k_prev^3)
///   - (1/alpha2)(beta2 k_n - beta0 k_prev)^2.
/// The defect is (y'''/2) times this value.
inline double lte_bracket(const Parameters& p, const CoefficientSet& c, const StepWindow& w) {
    const double kn3 = w.k_n * w.k_n * w.k_n;
    const double kp3 = w.k_prev * w.k_prev * w.k_prev;
    const double lin = (kn3 - (p.alpha0 / p.alpha2) * kp3) / (3.0 * w.khat);
    const double quad = c.beta2 * w.k_n - c.beta0 * w.k_prev;
    return lin - quad * quad / p.alpha2;
}

/// 6x the third-order Newton divided difference over four time-ordered nodes;
/// an O(k) approximation of y''' near the newest nodes.
inline Vec estimate_third_derivative(std::span<const Node> nodes) {
    if (nodes.size() != 4)
        throw std::domain_error("estimate_third_derivative: exactly 4 nodes required");
    for (int i = 0; i + 1 < 4; ++i)
        if (!(nodes[i].first < nodes[i + 1].first))
            throw std::domain_error("estimate_third_derivative: times must strictly increase");

    const std::size_t d = nodes[0].second.size();
    Vec result(d);
    for (std::size_t comp = 0; comp < d; ++comp) {
        double f[4];
        for (int i = 0; i < 4; ++i) f[i] = nodes[i].second[comp];
        // divided-difference table in place
        for (int order = 1; order < 4; ++order)
            for (int i = 3; i >= order; --i)
                f[i] = (f[i] - f[i - 1]) / (nodes[i].first - nodes[i - order].first);
        result[comp] = 6.0 * f[3];
    }
    return result;
}

/// Assembles the estimate: defect = (y'''/2)*bracket, per-step error
/// khat*defect, and the weighted RMS norm with weights
/// 1/(tol_abs + tol_rel*|y_i|).
inline LteEstimate make_lte_estimate(const Parameters& p, const CoefficientSet& c,
                                     const StepWindow& w, const Vec& third_derivative,
                                     const Vec& y_scale, const ControllerConfig& cfg) {
    const double bracket = lte_bracket(p, c, w);
    LteEstimate est;
    est.defect.resize(third_derivative.size());
    est.per_step_error.resize(third_derivative.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < third_derivative.size(); ++i) {
        est.defect[i] = 0.5 * bracket * third_derivative[i];
        est.per_step_error[i] = w.khat * est.defect[i];
        const double wt = cfg.tol_abs + cfg.tol_rel * std::abs(y_scale[i]);
        const double e = est.per_step_error[i] / wt;
        sum += e * e;
    }
    est.scalar_error = std::sqrt(sum / static_cast<double>(third_derivative.size()));
    return est;
}

struct StepProposal {
    bool accept = false;
    double k_next = 0.0;
};

/// Accept iff scalar_error <= 1; next step from the standard order-2
/// controller k * clamp(safety * err^{-1/3}, ratio_min, ratio_max), clamped
/// to [k_min, k_max].
inline StepProposal propose_next_step(const LteEstimate& est, const ControllerConfig& cfg,
                                      double k_n) {
    validate(cfg);
    StepProposal pr;
    pr.accept = est.scalar_error <= 1.0;
    double factor;
    if (est.scalar_error > 0.0)
        factor = std::clamp(cfg.safety * std::pow(est.scalar_error, -1.0 / 3.0),
                            cfg.ratio_min, cfg.ratio_max);
    else
        factor = cfg.ratio_max;
    pr.k_next = std::clamp(k_n * factor, cfg.k_min, cfg.k_max);
    return pr;
}

/// One attempted step as seen by the drivers and the CSV writer.
struct StepRecord {
    int n = 0;
    double t = 0.0;
    double k = 0.0;
    double eps = 0.0;
    Vec y;
    double lte_scalar = 0.0;
    double g_norm_sq = 0.0;
    double dissipation_sq = 0.0;
    double energy_residual = 0.0;
    double energy_lhs = 0.0;  // normalizer for the relative residual check
    int newton_iters = 0;
    bool accepted = false;
};

struct IntegrationResult {
    std::vector<Node> trajectory;      // accepted nodes, initial condition first
    std::vector<StepRecord> records;   // every attempt, bootstrap included
    int accepted = 0;
    int rejected = 0;
};

namespace detail {

inline StepRecord record_from_report(int n, double k, const Parameters& params,
                                     const StepReport& rep, const StepState& state,
                                     double lte_scalar, bool accepted) {
    StepRecord rec;
    rec.n = n;
    rec.t = rep.t_next;
    rec.k = k;
    rec.eps = rep.coefficients.eps;
    rec.y = rep.y_next;
    rec.lte_scalar = lte_scalar;
    const EnergyLedger led =
        energy_ledger(params, rep.coefficients, rep.y_next, state.y_curr, state.y_prev);
    rec.g_norm_sq = led.g_norm_sq_after;
    rec.dissipation_sq = led.dissipation_sq;
    rec.energy_residual = led.residual;
    rec.energy_lhs = led.lhs;
    rec.newton_iters = rep.newton.iterations;
    rec.accepted = accepted;
    return rec;
}

// The bootstrap as the drivers see it: delta=1 step plus its record.
inline StepState bootstrap_recorded(const OdeSystem& sys, double t0, const Vec& y0, double k0,
                                    const NewtonConfig& newton, IntegrationResult& out) {
    const Parameters midpoint = make_parameters(1.0);
    StepState seed{t0 - k0, y0, t0, y0, {}};
    const StepReport rep = dln_step_refactorized(sys, seed, midpoint, k0, newton);
    if (!rep.newton.converged)
        throw std::runtime_error("bootstrap step: Newton did not converge");
    out.trajectory.emplace_back(t0, y0);
    out.trajectory.emplace_back(rep.t_next, rep.y_next);
    out.records.push_back(record_from_report(0, k0, midpoint, rep, seed, 0.0, true));
    out.accepted += 1;
    return StepState{t0, y0, rep.t_next, rep.y_next, {}};
}

}  // namespace detail

/// Adaptive integration to instance.t_end with LTE-based accept/reject.
/// The first two steps run error-blind at k0 (not enough history for the
/// four-node estimator); the final step is truncated to land on t_end.
/// Throws when the controller would push k below k_min or Newton keeps
/// failing past the retry limit.
inline IntegrationResult integrate_adaptive(const ProblemInstance& instance,
                                            const Parameters& params,
                                            const ControllerConfig& ctrl,
                                            const NewtonConfig& newton, double k0) {
    if (!(k0 > 0.0)) throw std::domain_error("integrate_adaptive: k0 must be positive");
    validate(ctrl);
    const OdeSystem& sys = instance.system;
    const double t_end = instance.t_end;
    const double land_tol = 1e-14 * std::max({1.0, std::abs(t_end), std::abs(instance.t0)});

    IntegrationResult out;
    const double k_start = std::min(k0, 0.5 * (t_end - instance.t0));
    StepState state = detail::bootstrap_recorded(sys, instance.t0, instance.y0, k_start,
                                                 newton, out);

    double k = k_start;
    int newton_failures = 0;
    int n = 1;
    while (t_end - state.t_curr > land_tol) {
        const double remaining = t_end - state.t_curr;
        const double k_attempt = std::min(k, remaining);

        StepReport rep = dln_step_refactorized(sys, state, params, k_attempt, newton);
        if (!rep.newton.converged) {
            out.rejected += 1;
            if (++newton_failures > ctrl.newton_retry_limit)
                throw std::runtime_error(
                    "integrate_adaptive: Newton retry limit exceeded at t = " +
                    std::to_string(state.t_curr));
            k = 0.5 * k_attempt;
            if (k < ctrl.k_min)
                throw std::runtime_error(
                    "integrate_adaptive: step size underflow (Newton failures) at t = " +
                    std::to_string(state.t_curr));
            continue;
        }
        newton_failures = 0;

        // Error estimate from the four most recent nodes, candidate included.
        StepProposal prop;
        double lte_scalar = 0.0;
        if (!state.tail.empty()) {
            std::vector<Node> nodes = state.recent_nodes();
            nodes.emplace_back(rep.t_next, rep.y_next);
            if (nodes.size() > 4) nodes.erase(nodes.begin(), nodes.end() - 4);
            const Vec y3 = estimate_third_derivative(nodes);
            const StepWindow win = make_step_window(params, k_attempt, state.k_prev());
            const LteEstimate est =
                make_lte_estimate(params, rep.coefficients, win, y3, rep.y_next, ctrl);
            lte_scalar = est.scalar_error;
            prop = propose_next_step(est, ctrl, k_attempt);
        } else {
            prop = {true, k};  // error-blind warm-up at fixed k0
        }

        out.records.push_back(detail::record_from_report(n, k_attempt, params, rep, state,
                                                         lte_scalar, prop.accept));
        if (prop.accept) {
            state.advance(rep.t_next, std::move(rep.y_next));
            out.trajectory.emplace_back(state.t_curr, state.y_curr);
            out.accepted += 1;
            ++n;
            k = prop.k_next;
        } else {
            out.rejected += 1;
            if (k_attempt <= ctrl.k_min * (1.0 + 1e-12))
                throw std::runtime_error(
                    "integrate_adaptive: step size underflow (error control) at t = " +
                    std::to_string(state.t_curr) + ", k = " + std::to_string(k_attempt));
            k = prop.k_next;
        }
    }
    return out;
}

}  // namespace dln
