// Two-trajectory contractivity experiment: integrate a problem and a
// perturbed copy over one shared random step sequence and track the G-norm
// of the difference, which G-stability makes non-increasing whenever the
// right-hand side is contractive.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dln/diagnostics.hpp"
#include "dln/drivers.hpp"
#include "dln/stepper.hpp"

namespace dln {

struct ContractivityReport {
    std::vector<double> g_diff_sq;  // squared G-norm of (d_{n+1}, d_n) per step
    MonotonicityReport monotonicity;
    double max_energy_residual_rel = 0.0;  // |residual| / (1 + |lhs|), both twins
    int steps = 0;
};

inline ContractivityReport contractivity_run(const ProblemInstance& instance,
                                             const Parameters& params, int steps, double k0,
                                             std::uint64_t seed,
                                             std::pair<double, double> bounds,
                                             const NewtonConfig& newton,
                                             double perturbation = 1e-3) {
    const OdeSystem& sys = instance.system;
    Vec y0b = instance.y0;
    y0b[0] += perturbation;

    StepPattern pattern(seed, bounds);
    StepState a = bootstrap_first_step(sys, instance.t0, instance.y0, k0, newton);
    StepState b = bootstrap_first_step(sys, instance.t0, y0b, k0, newton);

    std::vector<Vec> diffs;
    diffs.push_back(blend2(1.0, a.y_prev, -1.0, b.y_prev));
    diffs.push_back(blend2(1.0, a.y_curr, -1.0, b.y_curr));

    ContractivityReport rep;
    rep.steps = steps;
    for (int i = 0; i < steps; ++i) {
        const double k = k0 * pattern.next_factor();
        StepReport ra = dln_step_refactorized(sys, a, params, k, newton);
        StepReport rb = dln_step_refactorized(sys, b, params, k, newton);
        if (!ra.newton.converged || !rb.newton.converged)
            throw std::runtime_error("contractivity_run: Newton did not converge at step " +
                                     std::to_string(i));
        for (const auto& [rep_step, state] : {std::pair{&ra, &a}, std::pair{&rb, &b}}) {
            const EnergyLedger led = energy_ledger(params, rep_step->coefficients,
                                                   rep_step->y_next, state->y_curr,
                                                   state->y_prev);
            rep.max_energy_residual_rel =
                std::max(rep.max_energy_residual_rel,
                         std::abs(led.residual) / (1.0 + std::abs(led.lhs)));
        }
        diffs.push_back(blend2(1.0, ra.y_next, -1.0, rb.y_next));
        a.advance(ra.t_next, std::move(ra.y_next));
        b.advance(rb.t_next, std::move(rb.y_next));
    }

    rep.monotonicity = monotonicity_check(diffs, params);
    rep.g_diff_sq.reserve(diffs.size() - 1);
    for (std::size_t n = 1; n < diffs.size(); ++n)
        rep.g_diff_sq.push_back(g_norm_sq(params, diffs[n], diffs[n - 1]));
    return rep;
}

}  // namespace dln
