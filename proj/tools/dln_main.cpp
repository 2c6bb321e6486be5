// Command-line harness: fixed/random-ratio/adaptive runs with CSV/JSON
// emission, convergence-order studies, refactorized-vs-one-leg equivalence
// checks, and a G-stability energy audit.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dln/dln.hpp"

namespace {

struct CliOptions {
    std::string problem;
    double delta = 2.0 / 3.0;  // library default, both dissipation weights active
    std::string mode = "fixed";
    double k0 = 0.0;
    double t_end = 0.0;
    bool t_end_set = false;
    double tol_abs = 1e-6;
    double tol_rel = 1e-6;
    std::uint64_t seed = 0;
    double ratio_min = 0.5;
    double ratio_max = 2.0;
    double k_min = 1e-12;
    double k_max = 1e6;
    std::string output = "-";
    std::string format = "csv";
    int levels = 5;
    int steps = 200;
    double newton_tol = 1e-12;
    double perturbation = 1e-3;
};

void write_output(const std::string& path, const std::string& payload) {
    if (path == "-") {
        std::cout << payload;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << payload;
}

std::string run_as_json(const dln::IntegrationResult& res, const dln::OdeSystem& sys,
                        const CliOptions& opt) {
    nlohmann::ordered_json j;
    j["problem"] = opt.problem;
    j["delta"] = opt.delta;
    j["mode"] = opt.mode;
    nlohmann::ordered_json cols = {"n", "t", "k", "eps"};
    for (int i = 0; i < sys.dim; ++i) cols.push_back("y" + std::to_string(i));
    for (const char* c : {"lte_scalar", "g_norm_sq", "dissipation_sq", "energy_residual",
                          "newton_iters", "accepted"})
        cols.push_back(c);
    j["columns"] = cols;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : res.records) {
        if (!r.accepted) continue;
        nlohmann::ordered_json row = {r.n, r.t, r.k, r.eps};
        for (double v : r.y) row.push_back(v);
        for (double v : {r.lte_scalar, r.g_norm_sq, r.dissipation_sq, r.energy_residual})
            row.push_back(v);
        row.push_back(r.newton_iters);
        row.push_back(1);
        rows.push_back(row);
    }
    j["rows"] = rows;
    if (sys.exact) {
        const auto& [t, y] = res.trajectory.back();
        j["terminal_exact_error"] = dln::norm_inf_diff(y, sys.exact(t));
    } else {
        j["terminal_exact_error"] = nullptr;
    }
    return j.dump(2) + "\n";
}

int cmd_run(const CliOptions& opt, bool seed_given, bool k0_given) {
    dln::ProblemInstance instance = dln::registry_lookup(opt.problem);
    if (opt.t_end_set) instance.t_end = opt.t_end;
    if (!(instance.t_end > instance.t0))
        throw std::invalid_argument("t-end must exceed the problem start time");
    const dln::Parameters params = dln::make_parameters(opt.delta);
    dln::NewtonConfig newton;
    newton.tol = opt.newton_tol;

    double k0 = opt.k0;
    dln::IntegrationResult res;
    if (opt.mode == "fixed") {
        if (!k0_given) throw std::invalid_argument("mode=fixed requires --k0");
        res = dln::integrate_fixed(instance, params, k0, newton);
    } else if (opt.mode == "random-ratio") {
        if (!k0_given) throw std::invalid_argument("mode=random-ratio requires --k0");
        if (!seed_given) throw std::invalid_argument("mode=random-ratio requires --seed");
        res = dln::integrate_random_ratio(instance, params, k0, opt.seed,
                                          {opt.ratio_min, opt.ratio_max}, newton);
    } else {  // adaptive
        // default below the warm-up error floor: the first two steps run
        // blind at k0, so k0 must already satisfy the tolerance
        if (!k0_given)
            k0 = std::min((instance.t_end - instance.t0) / 100.0,
                          std::cbrt(24.0 * opt.tol_abs));
        dln::ControllerConfig ctrl;
        ctrl.tol_abs = opt.tol_abs;
        ctrl.tol_rel = opt.tol_rel;
        ctrl.ratio_min = opt.ratio_min;
        ctrl.ratio_max = opt.ratio_max;
        ctrl.k_min = opt.k_min;
        ctrl.k_max = opt.k_max;
        res = dln::integrate_adaptive(instance, params, ctrl, newton, k0);
    }

    if (opt.format == "csv") {
        std::ostringstream os;
        dln::write_run_csv(os, res, instance.system);
        write_output(opt.output, os.str());
    } else {
        write_output(opt.output, run_as_json(res, instance.system, opt));
    }

    std::cerr << "accepted " << res.accepted << " steps, rejected " << res.rejected;
    if (instance.system.exact) {
        const auto& [t, y] = res.trajectory.back();
        std::cerr << ", terminal error "
                  << dln::format_full(dln::norm_inf_diff(y, instance.system.exact(t)));
    }
    std::cerr << "\n";
    return 0;
}

int cmd_converge(const CliOptions& opt) {
    dln::ProblemInstance instance = dln::registry_lookup(opt.problem);
    if (opt.t_end_set) instance.t_end = opt.t_end;
    const dln::Parameters params = dln::make_parameters(opt.delta);
    dln::NewtonConfig newton;
    newton.tol = opt.newton_tol;
    const dln::StepMode mode =
        opt.mode == "fixed" ? dln::StepMode::fixed : dln::StepMode::random_ratio;

    const auto rows = dln::convergence_study(instance, params, opt.levels, mode, opt.k0,
                                             opt.seed, {opt.ratio_min, opt.ratio_max}, newton);
    std::ostringstream os;
    dln::write_convergence_csv(os, rows);
    write_output(opt.output, os.str());

    for (const auto& r : rows)
        if (r.terminal_error < 1e-13) {
            std::cerr << "note: errors at roundoff floor from level " << r.level
                      << "; observed orders not meaningful\n";
            break;
        }
    return 0;
}

int cmd_equivalence(const CliOptions& opt, bool k0_given) {
    dln::ProblemInstance instance = dln::registry_lookup(opt.problem);
    const dln::Parameters params = dln::make_parameters(opt.delta);
    dln::NewtonConfig newton;
    newton.tol = opt.newton_tol;
    const double k0 =
        k0_given ? opt.k0 : (instance.t_end - instance.t0) / static_cast<double>(opt.steps);

    const dln::EquivalenceReport rep = dln::equivalence_run(
        instance, params, opt.steps, k0, opt.seed, {opt.ratio_min, opt.ratio_max}, newton);
    std::cout << "problem " << opt.problem << ", delta " << opt.delta << ", " << rep.steps
              << " steps: max |refactorized - one-leg| = "
              << dln::format_full(rep.max_discrepancy) << "\n";
    return rep.max_discrepancy <= 1e-9 ? 0 : 1;
}

int cmd_energy_audit(const CliOptions& opt, bool k0_given) {
    dln::ProblemInstance instance = dln::registry_lookup(opt.problem);
    if (!instance.system.is_contractive)
        throw std::invalid_argument("energy-audit requires a contractive problem; '" +
                                    opt.problem + "' is not flagged contractive");
    const dln::Parameters params = dln::make_parameters(opt.delta);
    dln::NewtonConfig newton;
    newton.tol = opt.newton_tol;
    const double k0 =
        k0_given ? opt.k0 : (instance.t_end - instance.t0) / static_cast<double>(opt.steps);

    const dln::ContractivityReport rep =
        dln::contractivity_run(instance, params, opt.steps, k0, opt.seed,
                               {opt.ratio_min, opt.ratio_max}, newton, opt.perturbation);

    const bool residual_ok = rep.max_energy_residual_rel <= 1e-12;
    std::cout << "G-norm of twin-trajectory difference non-increasing: "
              << (rep.monotonicity.monotone ? "yes" : "NO") << "\n";
    if (!rep.monotonicity.monotone)
        std::cout << "  first violation at step " << rep.monotonicity.first_violation << "\n";
    std::cout << "max relative energy-identity residual: "
              << dln::format_full(rep.max_energy_residual_rel) << "\n";
    std::cout << "initial G^2 " << dln::format_full(rep.g_diff_sq.front()) << ", final G^2 "
              << dln::format_full(rep.g_diff_sq.back()) << " over " << rep.steps
              << " steps\n";
    const bool pass = rep.monotonicity.monotone && residual_ok;
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-step DLN time integrator (refactorized backward Euler form)"};
    app.require_subcommand(1);
    CliOptions opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--problem", opt.problem, "problem name from the registry")
            ->required();
        sub->add_option("--delta", opt.delta, "method parameter in [0,1]")
            ->capture_default_str();
        sub->add_option("--newton-tol", opt.newton_tol, "Newton residual tolerance")
            ->capture_default_str();
        sub->add_option("--seed", opt.seed, "PRNG seed for random-ratio sequences");
        sub->add_option("--ratio-min", opt.ratio_min, "lower step-ratio bound")
            ->capture_default_str();
        sub->add_option("--ratio-max", opt.ratio_max, "upper step-ratio bound")
            ->capture_default_str();
    };

    CLI::App* run = app.add_subcommand("run", "integrate one problem and emit per-step data");
    add_common(run);
    run->add_option("--mode", opt.mode, "stepping mode")
        ->check(CLI::IsMember({"fixed", "random-ratio", "adaptive"}))
        ->capture_default_str();
    run->add_option("--k0", opt.k0, "base (initial) step size");
    run->add_option("--t-end", opt.t_end, "override the problem's end time");
    run->add_option("--tol-abs", opt.tol_abs, "absolute tolerance (adaptive)")
        ->capture_default_str();
    run->add_option("--tol-rel", opt.tol_rel, "relative tolerance (adaptive)")
        ->capture_default_str();
    run->add_option("--k-min", opt.k_min, "smallest admissible step (adaptive)")
        ->capture_default_str();
    run->add_option("--k-max", opt.k_max, "largest admissible step (adaptive)")
        ->capture_default_str();
    run->add_option("--output", opt.output, "output path, '-' for stdout")
        ->capture_default_str();
    run->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    CLI::App* conv = app.add_subcommand("converge", "order study under halved base steps");
    add_common(conv);
    conv->add_option("--levels", opt.levels, "number of halving levels")
        ->capture_default_str();
    conv->add_option("--mode", opt.mode, "stepping mode")
        ->check(CLI::IsMember({"fixed", "random-ratio"}))
        ->capture_default_str();
    conv->add_option("--k0", opt.k0, "base step at level 0")->required();
    conv->add_option("--t-end", opt.t_end, "override the problem's end time");
    conv->add_option("--output", opt.output, "output path, '-' for stdout")
        ->capture_default_str();

    CLI::App* equiv = app.add_subcommand(
        "equivalence", "compare refactorized and one-leg steppers on one step sequence");
    add_common(equiv);
    equiv->add_option("--steps", opt.steps, "number of steps")->capture_default_str();
    equiv->add_option("--k0", opt.k0, "base step size");

    CLI::App* audit = app.add_subcommand(
        "energy-audit", "G-stability audit of a contractive problem (twin trajectories)");
    add_common(audit);
    audit->add_option("--steps", opt.steps, "number of steps")
        ->default_val(500)
        ->capture_default_str();
    audit->add_option("--k0", opt.k0, "base step size");
    audit->add_option("--perturb", opt.perturbation, "initial-condition perturbation")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        auto given = [&](const std::string& name) {
            const CLI::Option* o = sub->get_option_no_throw(name);
            return o != nullptr && o->count() > 0;
        };
        opt.t_end_set = given("--t-end");
        const bool seed_given = given("--seed");
        const bool k0_given = given("--k0");
        if (sub == run) return cmd_run(opt, seed_given, k0_given);
        if (sub == conv) return cmd_converge(opt);
        if (sub == equiv) return cmd_equivalence(opt, k0_given);
        return cmd_energy_audit(opt, k0_given);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
