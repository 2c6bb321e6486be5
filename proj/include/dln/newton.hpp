// Damped Newton iteration on a caller-supplied residual, plus the backward
// Euler stage solve used by the refactorized stepper. Linear solves use dense
// LU with partial pivoting; convergence is tested on the residual max-norm,
// which directly bounds the defect inserted into the step.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dln/linalg.hpp"
#include "dln/ode_problem.hpp"

namespace dln {

struct NewtonConfig {
    double tol = 1e-12;  // absolute max-norm residual tolerance
    int max_iter = 25;
    bool damping = true;  // halve the update up to 8 times if the residual grows
};

struct SolveOutcome {
    Vec y_new;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;  // max-norm after each accepted iterate
};

/// Newton iteration on r(y) = 0 from `guess`. Returns converged=false after
/// max_iter updates without meeting cfg.tol; throws only on a singular Newton
/// matrix.
template <typename ResidualFn, typename JacobianFn>
SolveOutcome solve_residual(const ResidualFn& residual, const JacobianFn& jacobian,
                            Vec guess, const NewtonConfig& cfg) {
    if (!(cfg.tol > 0.0) || cfg.max_iter < 1)
        throw std::domain_error("solve_residual: invalid NewtonConfig");

    SolveOutcome out;
    out.y_new = std::move(guess);
    Vec r = residual(out.y_new);
    double rn = norm_inf(r);
    out.residual_history.push_back(rn);

    while (rn > cfg.tol) {
        if (out.iterations >= cfg.max_iter) {
            out.final_residual = rn;
            out.converged = false;
            return out;
        }
        const Mat j = jacobian(out.y_new);
        const Vec dy = lu_solve(j, r);

        Vec y_best;
        Vec r_best;
        double rn_best = 0.0;
        bool have_best = false;
        double scale = 1.0;
        const int tries = cfg.damping ? 9 : 1;  // full step + up to 8 halvings
        for (int attempt = 0; attempt < tries; ++attempt) {
            Vec y_try(out.y_new.size());
            for (std::size_t i = 0; i < y_try.size(); ++i)
                y_try[i] = out.y_new[i] - scale * dy[i];
            Vec r_try = residual(y_try);
            const double rn_try = norm_inf(r_try);
            if (!have_best || rn_try < rn_best) {
                y_best = std::move(y_try);
                r_best = std::move(r_try);
                rn_best = rn_try;
                have_best = true;
            }
            if (rn_best < rn) break;  // residual decreased, accept
            scale *= 0.5;
        }
        out.y_new = std::move(y_best);
        r = std::move(r_best);
        rn = rn_best;
        ++out.iterations;
        out.residual_history.push_back(rn);
    }
    out.final_residual = rn;
    out.converged = true;
    return out;
}

/// Solves the backward Euler stage y - y_old - dt*f(t_new, y) = 0.
/// The Newton matrix is I - dt*J, with J analytic when available and
/// forward-difference otherwise.
inline SolveOutcome solve_backward_euler(const OdeSystem& sys, double t_new, const Vec& y_old,
                                         double dt, const Vec& guess, const NewtonConfig& cfg) {
    if (!(dt > 0.0)) throw std::domain_error("solve_backward_euler: dt must be positive");

    auto residual = [&](const Vec& y) {
        Vec r = sys.rhs(t_new, y);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - y_old[i] - dt * r[i];
        return r;
    };
    auto jac = [&](const Vec& y) {
        Mat j = sys.jacobian ? sys.jacobian(t_new, y) : fd_jacobian(sys, t_new, y);
        const std::size_t n = j.rows();
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                j(a, b) = (a == b ? 1.0 : 0.0) - dt * j(a, b);
        return j;
    };
    return solve_residual(residual, jac, guess, cfg);
}

}  // namespace dln
