// G(delta)-norm, numerical dissipation and the per-step energy identity
// <sum alpha_l y, sum beta_l y> = |(y_next,y_curr)|_G^2 - |(y_curr,y_prev)|_G^2
//                                 + |sum gamma_l y|^2,
// which is pure algebra and must balance to roundoff for any vector triple.
#pragma once

#include <cstddef>
#include <vector>

#include "dln/coefficients.hpp"
#include "dln/linalg.hpp"

namespace dln {

/// Squared G(delta) norm of the stacked pair (y_hi, y_lo):
/// ((1+delta)/4)|y_hi|^2 + ((1-delta)/4)|y_lo|^2.
inline double g_norm_sq(const Parameters& p, const Vec& y_hi, const Vec& y_lo) {
    const auto [w_hi, w_lo] = g_weights(p);
    return w_hi * norm2_sq(y_hi) + w_lo * norm2_sq(y_lo);
}

/// Both sides of the energy identity for one step.
struct EnergyLedger {
    double g_norm_sq_before = 0.0;
    double g_norm_sq_after = 0.0;
    double dissipation_sq = 0.0;
    double lhs = 0.0;       // <sum alpha_l y, sum beta_l y>
    double residual = 0.0;  // lhs - (after - before + dissipation_sq)
};

inline EnergyLedger energy_ledger(const Parameters& p, const CoefficientSet& c,
                                  const Vec& y_next, const Vec& y_curr, const Vec& y_prev) {
    EnergyLedger led;
    led.g_norm_sq_before = g_norm_sq(p, y_curr, y_prev);
    led.g_norm_sq_after = g_norm_sq(p, y_next, y_curr);
    const Vec gamma_blend = blend3(c.gamma2, y_next, c.gamma1, y_curr, c.gamma0, y_prev);
    led.dissipation_sq = norm2_sq(gamma_blend);
    const Vec alpha_blend = blend3(p.alpha2, y_next, p.alpha1, y_curr, p.alpha0, y_prev);
    const Vec beta_blend = blend3(c.beta2, y_next, c.beta1, y_curr, c.beta0, y_prev);
    led.lhs = dot(alpha_blend, beta_blend);
    led.residual = led.lhs -
                   (led.g_norm_sq_after - led.g_norm_sq_before + led.dissipation_sq);
    return led;
}

struct MonotonicityReport {
    bool monotone = true;
    std::ptrdiff_t first_violation = -1;  // index n of the first bad transition
};

/// Checks that the G-norm of consecutive state pairs never increases along a
/// trajectory (1e-12 relative slack for roundoff). Meaningful on trajectories
/// of contractive problems, where the method's G-stability guarantees it.
inline MonotonicityReport monotonicity_check(const std::vector<Vec>& trajectory,
                                             const Parameters& p) {
    MonotonicityReport rep;
    for (std::size_t n = 1; n + 1 < trajectory.size(); ++n) {
        const double before = g_norm_sq(p, trajectory[n], trajectory[n - 1]);
        const double after = g_norm_sq(p, trajectory[n + 1], trajectory[n]);
        if (after > before * (1.0 + 1e-12)) {
            rep.monotone = false;
            rep.first_violation = static_cast<std::ptrdiff_t>(n);
            return rep;
        }
    }
    return rep;
}

}  // namespace dln
