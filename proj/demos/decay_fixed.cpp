// Minimal usage: fixed-step integration of y' = -y and its terminal error.
#include <cstdio>

#include "dln/dln.hpp"

int main() {
    const dln::ProblemInstance decay = dln::problems::decay();
    const dln::Parameters params = dln::make_parameters(2.0 / 3.0);
    const dln::NewtonConfig newton;

    for (double k : {0.1, 0.05, 0.025}) {
        const auto res = dln::integrate_fixed(decay, params, k, newton);
        std::printf("k = %-6g steps = %-4d terminal error = %.3e\n", k, res.accepted,
                    dln::terminal_error(res, decay.system));
    }
    return 0;
}
