// Adaptive integration of the stiff Van der Pol oscillator (mu = 10).
#include <algorithm>
#include <cstdio>

#include "dln/dln.hpp"

int main() {
    dln::ProblemInstance vdp = dln::problems::vanderpol(10.0);
    vdp.t_end = 20.0;
    const dln::Parameters params = dln::make_parameters(2.0 / 3.0);
    dln::ControllerConfig ctrl;
    ctrl.tol_abs = ctrl.tol_rel = 1e-6;
    // two-step window: a huge accepted step floors the next error estimate,
    // so cap k_max well below the slow-phase plateau (see README)
    ctrl.k_max = 0.05;
    const dln::NewtonConfig newton;

    const auto res = dln::integrate_adaptive(vdp, params, ctrl, newton, 1e-3);

    double k_min_seen = 1e300, k_max_seen = 0.0;
    for (const auto& r : res.records)
        if (r.accepted) {
            k_min_seen = std::min(k_min_seen, r.k);
            k_max_seen = std::max(k_max_seen, r.k);
        }
    std::printf("accepted %d steps (%d rejected), k in [%.3e, %.3e]\n", res.accepted,
                res.rejected, k_min_seen, k_max_seen);
    std::printf("y(t_end) = (%.6f, %.6f)\n", res.trajectory.back().second[0],
                res.trajectory.back().second[1]);
    return 0;
}
