// Right-hand-side abstraction for y' = f(t, y) and the registry of test
// problems driven by the CLI harness and the test suites.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dln/linalg.hpp"

namespace dln {

/// An ODE system y' = f(t, y). `jacobian` and `exact` may be left empty;
/// solvers fall back to finite differences when the Jacobian is absent.
/// `is_contractive` asserts Re<f(t,u)-f(t,v), u-v> <= 0 for this problem.
/// rhs implementations must be stateless (callable concurrently).
struct OdeSystem {
    int dim = 0;
    std::function<Vec(double, const Vec&)> rhs;
    std::function<Mat(double, const Vec&)> jacobian;
    std::function<Vec(double)> exact;
    bool is_contractive = false;
    std::string name;
};

struct ProblemInstance {
    OdeSystem system;
    double t0 = 0.0;
    Vec y0;
    double t_end = 1.0;
};

/// Forward-difference Jacobian: column j = (f(t, y + h_fd e_j) - f(t, y))/h_fd.
inline Mat fd_jacobian(const OdeSystem& sys, double t, const Vec& y, double h_fd) {
    if (!(h_fd > 0.0)) throw std::domain_error("fd_jacobian: h_fd must be positive");
    const std::size_t n = y.size();
    const Vec f0 = sys.rhs(t, y);
    Mat j(n, n);
    Vec yp = y;
    for (std::size_t col = 0; col < n; ++col) {
        yp[col] = y[col] + h_fd;
        const Vec fp = sys.rhs(t, yp);
        for (std::size_t row = 0; row < n; ++row) j(row, col) = (fp[row] - f0[row]) / h_fd;
        yp[col] = y[col];
    }
    return j;
}

/// Same with the standard Newton increment h_j = sqrt(eps_mach)*max(1, |y_j|).
inline Mat fd_jacobian(const OdeSystem& sys, double t, const Vec& y) {
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    const std::size_t n = y.size();
    const Vec f0 = sys.rhs(t, y);
    Mat j(n, n);
    Vec yp = y;
    for (std::size_t col = 0; col < n; ++col) {
        const double h = sqrt_eps * std::max(1.0, std::abs(y[col]));
        yp[col] = y[col] + h;
        const Vec fp = sys.rhs(t, yp);
        for (std::size_t row = 0; row < n; ++row) j(row, col) = (fp[row] - f0[row]) / h;
        yp[col] = y[col];
    }
    return j;
}

namespace problems {

/// y' = -y, exact e^{-t}. Contractive.
inline ProblemInstance decay() {
    OdeSystem s;
    s.dim = 1;
    s.name = "decay";
    s.rhs = [](double, const Vec& y) { return Vec{-y[0]}; };
    s.jacobian = [](double, const Vec&) {
        Mat j(1, 1);
        j(0, 0) = -1.0;
        return j;
    };
    s.exact = [](double t) { return Vec{std::exp(-t)}; };
    s.is_contractive = true;
    return {s, 0.0, Vec{1.0}, 1.0};
}

/// y' = 2t, exact t^2. f is independent of y, so every one-leg solve is linear.
inline ProblemInstance quadratic() {
    OdeSystem s;
    s.dim = 1;
    s.name = "quadratic";
    s.rhs = [](double t, const Vec&) { return Vec{2.0 * t}; };
    s.jacobian = [](double, const Vec&) { return Mat(1, 1); };
    s.exact = [](double t) { return Vec{t * t}; };
    s.is_contractive = false;
    return {s, 0.0, Vec{0.0}, 2.0};
}

/// Damped rotation y' = A y, A = -mu I + omega J with J the 2x2 symplectic
/// matrix. <Ay, y> = -mu |y|^2 <= 0, so the problem is contractive.
inline ProblemInstance oscillator() {
    constexpr double mu = 0.05, omega = 1.0;
    OdeSystem s;
    s.dim = 2;
    s.name = "oscillator";
    s.rhs = [](double, const Vec& y) {
        return Vec{-mu * y[0] + omega * y[1], -omega * y[0] - mu * y[1]};
    };
    s.jacobian = [](double, const Vec&) {
        Mat j(2, 2);
        j(0, 0) = -mu;
        j(0, 1) = omega;
        j(1, 0) = -omega;
        j(1, 1) = -mu;
        return j;
    };
    s.exact = [](double t) {
        const double r = std::exp(-mu * t);
        return Vec{r * std::cos(omega * t), -r * std::sin(omega * t)};
    };
    s.is_contractive = true;
    return {s, 0.0, Vec{1.0, 0.0}, 5.0};
}

/// Non-autonomous scalar test y' = lambda(t) y over C with
/// lambda(t) = -(1 + 0.5 sin t) + i cos t, realified to a 2x2 system.
/// Re lambda <= -1/2 < 0, so the realified system is contractive.
inline ProblemInstance nonauto() {
    OdeSystem s;
    s.dim = 2;
    s.name = "nonauto";
    s.rhs = [](double t, const Vec& y) {
        const double a = -(1.0 + 0.5 * std::sin(t));
        const double b = std::cos(t);
        return Vec{a * y[0] - b * y[1], b * y[0] + a * y[1]};
    };
    s.jacobian = [](double t, const Vec&) {
        const double a = -(1.0 + 0.5 * std::sin(t));
        const double b = std::cos(t);
        Mat j(2, 2);
        j(0, 0) = a;
        j(0, 1) = -b;
        j(1, 0) = b;
        j(1, 1) = a;
        return j;
    };
    // integral of lambda: -t + (cos t - 1)/2 + i sin t
    s.exact = [](double t) {
        const double rho = std::exp(-t + 0.5 * (std::cos(t) - 1.0));
        const double th = std::sin(t);
        return Vec{rho * std::cos(th), rho * std::sin(th)};
    };
    s.is_contractive = true;
    return {s, 0.0, Vec{1.0, 0.0}, 3.0};
}

/// Van der Pol oscillator, stiff for mu >= 10. No closed-form solution.
inline ProblemInstance vanderpol(double mu) {
    OdeSystem s;
    s.dim = 2;
    s.name = "vanderpol";
    s.rhs = [mu](double, const Vec& y) {
        return Vec{y[1], mu * (1.0 - y[0] * y[0]) * y[1] - y[0]};
    };
    s.jacobian = [mu](double, const Vec& y) {
        Mat j(2, 2);
        j(0, 0) = 0.0;
        j(0, 1) = 1.0;
        j(1, 0) = -2.0 * mu * y[0] * y[1] - 1.0;
        j(1, 1) = mu * (1.0 - y[0] * y[0]);
        return j;
    };
    s.is_contractive = false;
    return {s, 0.0, Vec{2.0, 0.0}, 2.0};
}

}  // namespace problems

inline std::vector<std::string> registry_names() {
    return {"decay", "nonauto", "oscillator", "quadratic", "vanderpol"};
}

/// Looks up a fully configured test problem by name. "vanderpol" uses mu = 2;
/// other stiffness levels are available through problems::vanderpol(mu).
inline ProblemInstance registry_lookup(const std::string& name) {
    if (name == "decay") return problems::decay();
    if (name == "quadratic") return problems::quadratic();
    if (name == "oscillator") return problems::oscillator();
    if (name == "nonauto") return problems::nonauto();
    if (name == "vanderpol") return problems::vanderpol(2.0);
    std::string msg = "unknown problem '" + name + "'; available:";
    for (const auto& n : registry_names()) msg += " " + n;
    throw std::invalid_argument(msg);
}

}  // namespace dln
