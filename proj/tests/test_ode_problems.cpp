#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dln/drivers.hpp"
#include "dln/ode_problem.hpp"
#include "dln/rng.hpp"

using namespace dln;
using Catch::Matchers::WithinAbs;

TEST_CASE("registry contents and closed-form values") {
    const ProblemInstance decay = registry_lookup("decay");
    CHECK(decay.system.dim == 1);
    CHECK(decay.system.is_contractive);
    CHECK_THAT(decay.system.exact(1.0)[0], WithinAbs(std::exp(-1.0), 1e-15));
    CHECK_THAT(decay.system.exact(1.0)[0], WithinAbs(0.3678794, 1e-7));

    const ProblemInstance quad = registry_lookup("quadratic");
    CHECK_THAT(quad.system.exact(3.0)[0], WithinAbs(9.0, 1e-14));

    const ProblemInstance vdp = registry_lookup("vanderpol");
    CHECK(vdp.system.dim == 2);
    CHECK_FALSE(static_cast<bool>(vdp.system.exact));
    CHECK(vdp.y0 == Vec{2.0, 0.0});

    CHECK(registry_lookup("oscillator").system.is_contractive);
    CHECK(registry_lookup("nonauto").system.is_contractive);
}

TEST_CASE("unknown names produce a lookup error listing the registry") {
    try {
        registry_lookup("lorenz");
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        for (const auto& name : registry_names())
            CHECK(msg.find(name) != std::string::npos);
    }
}

TEST_CASE("exact solutions satisfy the ODE (finite-difference spot check)") {
    Xorshift64Star rng(7);
    for (const auto& name : registry_names()) {
        const ProblemInstance inst = registry_lookup(name);
        if (!inst.system.exact) continue;
        for (int i = 0; i < 20; ++i) {
            const double t = inst.t0 + (inst.t_end - inst.t0) * rng.next_double();
            const double h = 1e-5;
            const Vec yp = inst.system.exact(t + h);
            const Vec ym = inst.system.exact(t - h);
            const Vec f = inst.system.rhs(t, inst.system.exact(t));
            for (int c = 0; c < inst.system.dim; ++c) {
                const double dydt = (yp[c] - ym[c]) / (2.0 * h);
                INFO(name << " component " << c << " at t = " << t);
                CHECK_THAT(dydt, WithinAbs(f[c], 1e-7));
            }
        }
    }
}

TEST_CASE("exact solutions match the initial condition") {
    for (const auto& name : registry_names()) {
        const ProblemInstance inst = registry_lookup(name);
        if (!inst.system.exact) continue;
        const Vec y = inst.system.exact(inst.t0);
        for (int c = 0; c < inst.system.dim; ++c)
            CHECK_THAT(y[c], WithinAbs(inst.y0[c], 1e-15));
    }
}

TEST_CASE("fd_jacobian on linear and y-independent systems") {
    const ProblemInstance decay = registry_lookup("decay");
    const Mat j = fd_jacobian(decay.system, 0.3, Vec{0.7}, 1e-7);
    CHECK_THAT(j(0, 0), WithinAbs(-1.0, 1e-8));

    const ProblemInstance quad = registry_lookup("quadratic");
    const Mat jq = fd_jacobian(quad.system, 0.5, Vec{0.25}, 1e-7);
    CHECK_THAT(jq(0, 0), WithinAbs(0.0, 1e-12));

    CHECK_THROWS_AS(fd_jacobian(decay.system, 0.0, Vec{1.0}, 0.0), std::domain_error);
}

TEST_CASE("fd_jacobian matches the analytic Van der Pol Jacobian") {
    const ProblemInstance vdp = problems::vanderpol(1.0);
    const Vec y{1.0, 1.0};
    const Mat analytic = vdp.system.jacobian(0.0, y);
    CHECK_THAT(analytic(0, 0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(analytic(0, 1), WithinAbs(1.0, 1e-15));
    CHECK_THAT(analytic(1, 0), WithinAbs(-3.0, 1e-15));
    CHECK_THAT(analytic(1, 1), WithinAbs(0.0, 1e-15));

    const Mat fd = fd_jacobian(vdp.system, 0.0, y, 1e-7);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK_THAT(fd(r, c), WithinAbs(analytic(r, c), 1e-6));
}

TEST_CASE("fd_jacobian agrees with analytic Jacobians across the registry") {
    Xorshift64Star rng(99);
    for (const auto& name : registry_names()) {
        const ProblemInstance inst = registry_lookup(name);
        const int d = inst.system.dim;
        for (int trial = 0; trial < 10; ++trial) {
            const double t = 2.0 * rng.next_double();
            Vec y(d);
            for (auto& v : y) v = -1.0 + 2.0 * rng.next_double();
            const Mat a = inst.system.jacobian(t, y);
            const Mat fd = fd_jacobian(inst.system, t, y, 1e-7);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) {
                    INFO(name << " entry (" << r << "," << c << ")");
                    CHECK(std::abs(fd(r, c) - a(r, c)) <= 1e-5 * (1.0 + std::abs(a(r, c))));
                }
        }
    }
}

TEST_CASE("contractive problems satisfy the one-sided Lipschitz condition") {
    Xorshift64Star rng(2718);
    for (const auto& name : registry_names()) {
        const ProblemInstance inst = registry_lookup(name);
        if (!inst.system.is_contractive) continue;
        const int d = inst.system.dim;
        for (int trial = 0; trial < 100; ++trial) {
            const double t = 10.0 * rng.next_double();
            Vec u(d), v(d);
            for (auto& x : u) x = -2.0 + 4.0 * rng.next_double();
            for (auto& x : v) x = -2.0 + 4.0 * rng.next_double();
            const Vec fu = inst.system.rhs(t, u);
            const Vec fv = inst.system.rhs(t, v);
            double inner = 0.0;
            for (int c = 0; c < d; ++c) inner += (fu[c] - fv[c]) * (u[c] - v[c]);
            INFO(name << " trial " << trial);
            REQUIRE(inner <= 1e-12);
        }
    }
}

TEST_CASE("vanderpol fine-step self-reference") {
    // No closed form: the one-leg oracle at k = 1e-5 serves as the reference,
    // and a coarse refactorized run must sit within the expected O(k^2) band.
    ProblemInstance vdp = problems::vanderpol(2.0);
    vdp.t_end = 0.5;
    const Parameters params = make_parameters(2.0 / 3.0);
    // the one-leg residual carries a 1/khat scale, so at k = 1e-5 an absolute
    // 1e-12 residual sits below the roundoff floor; 1e-9 still means a state
    // error of order 1e-14
    NewtonConfig fine;
    fine.tol = 1e-9;
    const auto ref = integrate_fixed(vdp, params, 1e-5, fine, /*use_oneleg=*/true);
    const auto coarse = integrate_fixed(vdp, params, 2e-3, NewtonConfig{});
    REQUIRE_THAT(ref.trajectory.back().first, WithinAbs(0.5, 1e-9));
    REQUIRE_THAT(coarse.trajectory.back().first, WithinAbs(0.5, 1e-9));
    const double err =
        norm_inf_diff(coarse.trajectory.back().second, ref.trajectory.back().second);
    CHECK(err <= 1e-3);
    CHECK(err > 0.0);
}
