// Coefficients of the two-step DLN one-leg family and of its refactorization
// as a pre/post-processed backward Euler step. Everything here is a pure
// function of the method parameter delta and the last two step sizes.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace dln {

/// Method parameter delta in [0,1] and the step-size-independent one-leg
/// weights alpha_2, alpha_1, alpha_0. They sum to zero exactly.
struct Parameters {
    double delta;
    double alpha2, alpha1, alpha0;
};

/// The two most recent step sizes, their variability
/// eps = (k_n - k_prev)/(k_n + k_prev) in (-1,1), and the average step
/// khat = alpha2*k_n - alpha0*k_prev > 0.
struct StepWindow {
    double k_n, k_prev;
    double eps;
    double khat;
};

/// Step-dependent coefficients for one step: the interpolation weights
/// beta_l, the refactorization set (a1, a0, b, c2, c1, c0), and the
/// dissipation weights gamma_l. khat and eps are carried along from the
/// StepWindow the set was built from.
struct CoefficientSet {
    double beta2, beta1, beta0;
    double a1, a0;    // pre-process blend, a0 + a1 = 1
    double b;         // backward Euler step scale, dt_BE = b*khat
    double c2, c1, c0;  // post-process blend, sums to 1
    double gamma2, gamma1, gamma0;
    double khat, eps;
};

inline Parameters make_parameters(double delta) {
    if (!(delta >= 0.0 && delta <= 1.0))
        throw std::domain_error("make_parameters: delta must lie in [0,1], got " +
                                std::to_string(delta));
    return {delta, 0.5 * (delta + 1.0), -delta, 0.5 * (delta - 1.0)};
}

inline StepWindow make_step_window(const Parameters& p, double k_n, double k_prev) {
    if (!(k_n > 0.0) || !(k_prev > 0.0))
        throw std::domain_error("make_step_window: step sizes must be positive");
    StepWindow w;
    w.k_n = k_n;
    w.k_prev = k_prev;
    w.eps = (k_n - k_prev) / (k_n + k_prev);
    w.khat = p.alpha2 * k_n - p.alpha0 * k_prev;
    return w;
}

inline CoefficientSet make_coefficients(const Parameters& p, const StepWindow& w) {
    const double d = p.delta;
    const double e = w.eps;
    const double q = 1.0 + e * d;  // positive for |eps| < 1, delta in [0,1]
    const double r = (1.0 - d * d) / (q * q);

    CoefficientSet c;
    c.beta2 = 0.25 * (1.0 + r + e * e * d * r + d);
    c.beta1 = 0.5 * (1.0 - r);
    c.beta0 = 1.0 - c.beta2 - c.beta1;  // partition of unity enforced exactly

    c.a1 = c.beta1 - p.alpha1 * c.beta2 / p.alpha2;
    c.a0 = 1.0 - c.a1;
    c.b = c.beta2 / p.alpha2;
    c.c2 = 1.0 / c.beta2;
    c.c1 = -c.beta1 / c.beta2;
    c.c0 = -c.beta0 / c.beta2;

    c.gamma1 = -std::sqrt(d * (1.0 - d * d)) / (std::sqrt(2.0) * q);
    c.gamma2 = -0.5 * (1.0 - e) * c.gamma1;
    c.gamma0 = -0.5 * (1.0 + e) * c.gamma1;

    c.khat = w.khat;
    c.eps = w.eps;
    return c;
}

/// Diagonal weights of the G(delta) norm: ((1+delta)/4, (1-delta)/4).
inline std::pair<double, double> g_weights(const Parameters& p) {
    return {0.25 * (1.0 + p.delta), 0.25 * (1.0 - p.delta)};
}

}  // namespace dln
