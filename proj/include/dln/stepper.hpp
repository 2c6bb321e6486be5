// One DLN step, two ways. The production path is the refactorized pipeline
// pre-process -> backward Euler -> post-process; the direct one-leg solve is
// kept as the equivalence oracle. Both share the Newton core.
#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "dln/coefficients.hpp"
#include "dln/newton.hpp"
#include "dln/ode_problem.hpp"

namespace dln {

using Node = std::pair<double, Vec>;

/// Rolling two-step history (t_prev, y_prev), (t_curr, y_curr), plus up to
/// two older accepted nodes kept for third-derivative estimation.
struct StepState {
    double t_prev = 0.0;
    Vec y_prev;
    double t_curr = 0.0;
    Vec y_curr;
    std::vector<Node> tail;  // oldest first; times increase strictly into t_prev

    double k_prev() const { return t_curr - t_prev; }

    /// Pushes an accepted step into the history, retiring y_prev into the tail.
    void advance(double t_next, Vec y_next) {
        tail.emplace_back(t_prev, std::move(y_prev));
        if (tail.size() > 2) tail.erase(tail.begin());
        t_prev = t_curr;
        y_prev = std::move(y_curr);
        t_curr = t_next;
        y_curr = std::move(y_next);
    }

    /// The most recent nodes, oldest first, ending at (t_curr, y_curr).
    std::vector<Node> recent_nodes() const {
        std::vector<Node> n(tail);
        n.emplace_back(t_prev, y_prev);
        n.emplace_back(t_curr, y_curr);
        return n;
    }
};

/// Everything produced by one step attempt: the proposed node, the backward
/// Euler stage data, the Newton outcome and the coefficients used.
struct StepReport {
    double t_next = 0.0;
    Vec y_next;
    double t_new = 0.0;   // blended time of the stage equation
    Vec y_old_blend;      // a1*y_curr + a0*y_prev
    Vec y_new;            // stage value, equals the beta-blend of the nodes
    double dt_be = 0.0;   // b * khat
    SolveOutcome newton;
    CoefficientSet coefficients;
};

struct PreProcessResult {
    double t_new;
    Vec y_old_blend;
    double dt_be;
};

/// Pre-process: blend the history into the backward Euler data
/// y_old = a1*y_curr + a0*y_prev, t_new = beta-blend of the three times,
/// dt_be = b*khat.
inline PreProcessResult pre_process(const StepState& state, const CoefficientSet& c,
                                    double k_n) {
    PreProcessResult p;
    const double t_next = state.t_curr + k_n;
    p.t_new = c.beta2 * t_next + c.beta1 * state.t_curr + c.beta0 * state.t_prev;
    p.y_old_blend = blend2(c.a1, state.y_curr, c.a0, state.y_prev);
    p.dt_be = c.b * c.khat;
    return p;
}

/// Post-process: y_next = c2*y_new + c1*y_curr + c0*y_prev. Inverts the
/// beta-blend, so feeding it z = beta2*u + beta1*y_curr + beta0*y_prev
/// returns u.
inline Vec post_process(const Vec& y_new, const StepState& state, const CoefficientSet& c) {
    return blend3(c.c2, y_new, c.c1, state.y_curr, c.c0, state.y_prev);
}

/// One DLN step through the refactorized pipeline. On Newton failure the
/// report's newton.converged flags it and y_next is not meaningful; the
/// caller decides whether to reject. `state` is never modified.
inline StepReport dln_step_refactorized(const OdeSystem& sys, const StepState& state,
                                        const Parameters& params, double k_n,
                                        const NewtonConfig& cfg) {
    if (!(k_n > 0.0)) throw std::domain_error("dln_step_refactorized: k_n must be positive");
    const StepWindow win = make_step_window(params, k_n, state.k_prev());
    StepReport rep;
    rep.coefficients = make_coefficients(params, win);
    PreProcessResult pre = pre_process(state, rep.coefficients, k_n);
    rep.t_new = pre.t_new;
    rep.dt_be = pre.dt_be;
    rep.newton = solve_backward_euler(sys, pre.t_new, pre.y_old_blend, pre.dt_be,
                                      state.y_curr, cfg);
    rep.y_old_blend = std::move(pre.y_old_blend);
    rep.y_new = rep.newton.y_new;
    rep.t_next = state.t_curr + k_n;
    rep.y_next = post_process(rep.y_new, state, rep.coefficients);
    return rep;
}

/// One DLN step by solving the one-leg equation directly:
/// (alpha2*u + alpha1*y_curr + alpha0*y_prev)/khat
///   = f(t_beta, beta2*u + beta1*y_curr + beta0*y_prev).
/// Reference oracle for the refactorized path (the two are equivalent).
inline StepReport dln_step_oneleg(const OdeSystem& sys, const StepState& state,
                                  const Parameters& params, double k_n,
                                  const NewtonConfig& cfg) {
    if (!(k_n > 0.0)) throw std::domain_error("dln_step_oneleg: k_n must be positive");
    const StepWindow win = make_step_window(params, k_n, state.k_prev());
    const CoefficientSet c = make_coefficients(params, win);
    const double t_next = state.t_curr + k_n;
    const double t_beta = c.beta2 * t_next + c.beta1 * state.t_curr + c.beta0 * state.t_prev;

    auto blend = [&](const Vec& u) {
        return blend3(c.beta2, u, c.beta1, state.y_curr, c.beta0, state.y_prev);
    };
    auto residual = [&](const Vec& u) {
        Vec r = sys.rhs(t_beta, blend(u));
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] = (params.alpha2 * u[i] + params.alpha1 * state.y_curr[i] +
                    params.alpha0 * state.y_prev[i]) / win.khat - r[i];
        return r;
    };
    auto jac = [&](const Vec& u) {
        const Vec z = blend(u);
        Mat j = sys.jacobian ? sys.jacobian(t_beta, z) : fd_jacobian(sys, t_beta, z);
        const std::size_t n = j.rows();
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t bcol = 0; bcol < n; ++bcol)
                j(a, bcol) = (a == bcol ? params.alpha2 / win.khat : 0.0) - c.beta2 * j(a, bcol);
        return j;
    };

    StepReport rep;
    rep.coefficients = c;
    rep.newton = solve_residual(residual, jac, state.y_curr, cfg);
    rep.t_next = t_next;
    rep.y_next = rep.newton.y_new;
    rep.t_new = t_beta;
    rep.y_old_blend = blend2(c.a1, state.y_curr, c.a0, state.y_prev);
    rep.y_new = blend(rep.newton.y_new);
    rep.dt_be = c.b * win.khat;
    return rep;
}

/// Produces the second history node the two-step method needs. Runs one step
/// of the delta=1 member (the one-step midpoint rule), whose alpha0 = beta0 = 0
/// make the phantom node before t0 irrelevant; a synthetic k_{-1} = k0 keeps
/// eps = 0.
inline StepState bootstrap_first_step(const OdeSystem& sys, double t0, const Vec& y0,
                                      double k0, const NewtonConfig& cfg) {
    if (!(k0 > 0.0)) throw std::domain_error("bootstrap_first_step: k0 must be positive");
    const Parameters midpoint = make_parameters(1.0);
    StepState seed{t0 - k0, y0, t0, y0, {}};
    const StepReport rep = dln_step_refactorized(sys, seed, midpoint, k0, cfg);
    if (!rep.newton.converged)
        throw std::runtime_error("bootstrap_first_step: Newton did not converge");
    return StepState{t0, y0, rep.t_next, rep.y_next, {}};
}

}  // namespace dln
