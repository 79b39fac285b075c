#include "screen_cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "screen/error.hpp"
#include "screen/newtonian.hpp"
#include "screen/spherical_oracle.hpp"
#include "screen_cli/config.hpp"
#include "screen_cli/io.hpp"
#include "screen_cli/report.hpp"

namespace screen::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kFieldsFile = "fields.vtk";
constexpr const char* kFieldsMeta = "fields.json";

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Vec3 domain_center(const DomainSpec& d) {
    const auto b = d.bounds();
    return b ? b->center() : Vec3{};
}

double bounding_radius(const DomainSpec& d, Vec3 c) {
    double r = 0.0;
    for (const DomainSpec& leaf : d.leaves()) {
        if (const auto* b = std::get_if<Ball>(&leaf.shape())) r = std::max(r, distance(b->center, c) + b->radius);
        if (const auto* a = std::get_if<Annulus>(&leaf.shape())) r = std::max(r, distance(a->center, c) + a->r_outer);
    }
    return r;
}

RunConfig require_config(const Invocation& inv) {
    if (inv.config.empty()) throw ConfigError("--config <path> is required");
    return load_run_config(inv.config);
}

json grid_json(const GridSpec& g) {
    return {{"h", g.spacing()},
            {"origin", {g.origin().x, g.origin().y, g.origin().z}},
            {"dims", {g.dim(0), g.dim(1), g.dim(2)}}};
}

json shells_json(const RadialConfig& c) {
    json out = json::array();
    for (const auto& s : c.shells()) out.push_back({{"r_inner", s.r_inner}, {"r_outer", s.r_outer}, {"sign", s.sign}});
    return out;
}

}  // namespace

int cmd_solve(const Invocation& inv) {
    std::ostream& out = *inv.stdout_stream;
    const RunConfig cfg = require_config(inv);
    const DomainSolution sol = solve_domain(cfg.problem, cfg.grid, cfg.solver);

    FieldSet f{sol.omega_plus, sol.density, sol.phi, sol.omega_minus, sol.theta, sol.kappa};
    const EnergyReport energy = sol.relaxed ? sol.relaxed->energy : energy_of_pair(sol.omega_plus, sol.density);
    const DiagnosticsReport diag = run_diagnostics(f, cfg.problem, cfg.diagnostics, sol.lambda);
    const Checks checks = evaluate_checks(diag, f, sol.lambda);
    const double mass = sol.density.integral();

    json solver = {{"algorithm", std::string(to_string(cfg.solver.algorithm))}, {"converged", sol.converged}};
    if (sol.relaxed) {
        solver["relaxed"] = {{"iterations", sol.relaxed->iterations},
                             {"residual", sol.relaxed->residual},
                             {"multiplier", sol.relaxed->multiplier},
                             {"converged", sol.relaxed->converged}};
    }
    if (sol.obstacle) {
        solver["obstacle"] = {{"sweeps", sol.obstacle->sweeps},
                              {"residual", sol.obstacle->residual},
                              {"converged", sol.obstacle->converged}};
    }
    json grid = grid_json(sol.grid);
    grid["box_growths"] = sol.box_growths;
    grid["support_certified"] = sol.support_certified;
    const json report = {
        {"schema", "coulomb-screen/solve/1"},
        {"seed", cfg.seed},
        {"problem", cfg.problem_json},
        {"m", sol.m},
        {"lambda", sol.lambda},
        {"grid", grid},
        {"solver", solver},
        {"energy", to_json(energy)},
        {"mass", mass},
        {"theta", sol.theta},
        {"kappa", sol.kappa},
        {"diagnostics", to_json(diag)},
        {"checks", to_json(checks)},
    };

    OutputStage stage(inv.out);
    if (cfg.outputs.json_report) stage.add("report.json", dump(report));
    if (cfg.outputs.csv_radial) {
        stage.add("radial.csv", csv_document({"r", "u_mean", "phi_mean", "cells"},
                                             radial_profile_rows(f, domain_center(cfg.problem))));
    }
    if (cfg.outputs.vtk_fields) {
        stage.add(kFieldsFile, vtk_document({{"omega_plus", &f.omega_plus},
                                             {"u", &f.u},
                                             {"phi", &f.phi},
                                             {"omega_minus", &f.omega_minus}},
                                            "coulomb-screen fields"));
        json meta = {{"schema", "coulomb-screen/fields/1"},
                     {"config", json::parse(read_text(inv.config))},
                     {"lambda", sol.lambda},
                     {"theta", sol.theta},
                     {"kappa", sol.kappa}};
        stage.add(kFieldsMeta, dump(meta));
    }
    stage.commit();

    if (!inv.quiet) {
        out << (sol.converged ? "converged" : "NOT CONVERGED") << " energy=" << format_number(energy.total)
            << " mass=" << format_number(mass) << " m=" << format_number(sol.m)
            << " screening=" << format_number(diag.screening_residual)
            << " residual=" << format_number(sol.relaxed ? sol.relaxed->residual : sol.obstacle->residual)
            << (sol.support_certified ? "" : " support=uncertified") << '\n';
    }
    return sol.converged && sol.support_certified ? kExitOk : kExitFlagged;
}

int cmd_verify(const Invocation& inv) {
    fs::path path = !inv.args.empty() ? fs::path(inv.args.front()) : fs::path(inv.config);
    if (path.empty()) throw ConfigError("verify needs a fields file or directory");
    if (fs::is_directory(path)) path /= kFieldsFile;
    if (!fs::exists(path)) throw std::runtime_error(path.string() + ": no such file");
    const fs::path meta_path = path.parent_path() / kFieldsMeta;
    const json meta = json::parse(read_text(meta_path));
    const RunConfig cfg = parse_run_config(meta.at("config").dump());

    auto fields = read_vtk(path);
    const auto take = [&](const char* name) {
        const auto it = fields.find(name);
        if (it == fields.end()) throw std::runtime_error(path.string() + ": missing field " + name);
        return std::move(it->second);
    };
    FieldSet f{take("omega_plus"), take("u"), take("phi"), take("omega_minus"), meta.at("theta").get<double>(),
               meta.at("kappa").get<double>()};
    const double lambda = meta.at("lambda").get<double>();
    const DiagnosticsReport diag = run_diagnostics(f, cfg.problem, cfg.diagnostics, lambda);
    const Checks checks = evaluate_checks(diag, f, lambda);
    const json report = {{"schema", "coulomb-screen/verify/1"},
                         {"fields", path.string()},
                         {"diagnostics", to_json(diag)},
                         {"checks", to_json(checks)}};
    *inv.stdout_stream << dump(report);
    if (!inv.quiet) *inv.stderr_stream << (checks.all() ? "all checks pass\n" : "some checks FAIL\n");
    return checks.all() ? kExitOk : kExitFlagged;
}

int cmd_oracle(const Invocation& inv) {
    const auto& a = inv.args;
    if (a.empty()) throw ConfigError("oracle needs one of: critical-ratio, bilayer R1 R2, annulus R1 R2, ball R, energy <shells>");
    const auto num = [&](std::size_t i) {
        if (i >= a.size()) throw ConfigError("oracle " + a[0] + ": missing argument " + std::to_string(i));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(a[i], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != a[i].size() || !std::isfinite(v)) throw ConfigError("oracle " + a[0] + ": bad number '" + a[i] + "'");
        return v;
    };
    json out;
    const std::string& what = a[0];
    if (what == "critical-ratio") {
        const double r = critical_ratio();
        out = {{"critical_ratio", r}, {"residual", critical_ratio_residual(r)}};
    } else if (what == "bilayer") {
        const double R1 = num(1), R2 = num(2);
        if (R2 / R1 >= critical_ratio()) {
            throw DomainError("bilayer: R2/R1 = " + format_number(R2 / R1) + " >= R* = " + format_number(critical_ratio()) +
                              "; the filled-core branch applies (try: oracle annulus R1 R2)");
        }
        const auto [r1, r2] = optimal_bilayer(R1, R2);
        const RadialConfig c = optimal_configuration(R1, R2);
        out = {{"R1", R1}, {"R2", R2}, {"r1", r1}, {"r2", r2}, {"energy", total_energy_closed_form(c)}};
    } else if (what == "annulus" || what == "ball") {
        const double R1 = what == "ball" ? 0.0 : num(1);
        const double R2 = what == "ball" ? num(1) : num(2);
        const RadialConfig c = optimal_configuration(R1, R2);
        out = {{"R1", R1},
               {"R2", R2},
               {"branch", R1 > 0.0 && R2 / R1 < critical_ratio() ? "bilayer" : "filled_core"},
               {"shells", shells_json(c)},
               {"energy", total_energy_closed_form(c)}};
    } else if (what == "energy") {
        if (a.size() < 2) throw ConfigError("oracle energy: give shells as r_inner,r_outer,sign");
        std::vector<RadialShell> shells;
        for (std::size_t i = 1; i < a.size(); ++i) {
            std::stringstream ss(a[i]);
            RadialShell s;
            char c1 = 0, c2 = 0;
            std::string sign;
            if (!(ss >> s.r_inner >> c1 >> s.r_outer >> c2 >> sign) || c1 != ',' || c2 != ',' ||
                (sign != "+" && sign != "-" && sign != "1" && sign != "-1")) {
                throw ConfigError("oracle energy: bad shell '" + a[i] + "' (expected r_inner,r_outer,+|-)");
            }
            s.sign = (sign == "-" || sign == "-1") ? -1 : 1;
            shells.push_back(s);
        }
        const RadialConfig c(std::move(shells));
        out = {{"shells", shells_json(c)}, {"energy", total_energy_closed_form(c)}};
    } else {
        throw ConfigError("oracle: unknown query '" + what + "'");
    }
    *inv.stdout_stream << dump(out);
    return kExitOk;
}

int cmd_surface(const Invocation& inv) {
    const RunConfig cfg = require_config(inv);
    const SurfaceSolution sol = solve_surface_measure(cfg.problem, cfg.surface.nodes, cfg.solver, cfg.surface.self);
    const auto& q = sol.measure.masses;
    const double mean = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
    double var = 0.0;
    for (double v : q) var += (v - mean) * (v - mean);
    const double rel_std = std::sqrt(var / static_cast<double>(q.size())) / mean;

    const Vec3 c = domain_center(cfg.problem);
    const double rb = bounding_radius(cfg.problem, c);
    json table = json::array();
    for (double factor : cfg.surface.match_factors) {
        table.push_back({{"factor", factor},
                         {"radius", factor * rb},
                         {"mismatch", exterior_mismatch(sol.measure, cfg.problem, c, factor * rb, cfg.surface.samples)}});
    }
    json report = {{"schema", "coulomb-screen/surface/1"},
                   {"problem", cfg.problem_json},
                   {"nodes", q.size()},
                   {"self_interaction", to_string(cfg.surface.self)},
                   {"m", cfg.problem.volume()},
                   {"energy", sol.energy},
                   {"level", sol.level},
                   {"mass_rel_std", rel_std},
                   {"residual", sol.residual},
                   {"iterations", sol.iterations},
                   {"converged", sol.converged},
                   {"exterior_match", table}};
    if (const auto* b = std::get_if<Ball>(&cfg.problem.shape())) {
        report["ball_limit_energy"] = ball_surface_energy(b->radius);
    }
    OutputStage stage(inv.out);
    if (cfg.outputs.json_report) stage.add("surface.json", dump(report));
    if (cfg.outputs.csv_radial) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const Vec3& x = sol.measure.nodes[i];
            rows.push_back({x.x, x.y, x.z, sol.measure.weights[i], q[i]});
        }
        stage.add("surface_nodes.csv", csv_document({"x", "y", "z", "area", "mass"}, rows));
    }
    stage.commit();
    if (!inv.quiet) {
        *inv.stdout_stream << (sol.converged ? "converged" : "NOT CONVERGED") << " F=" << format_number(sol.energy)
                           << " mass_rel_std=" << format_number(rel_std) << " nodes=" << q.size() << '\n';
    }
    return sol.converged ? kExitOk : kExitFlagged;
}

int cmd_sweep(const Invocation& inv) {
    const RunConfig cfg = require_config(inv);
    const SweepConfig& s = cfg.sweep;
    if (!s.has_lambdas && !s.has_epsilons) throw ConfigError("/sweep: give lambdas, lambda_fractions or epsilons");
    OutputStage stage(inv.out);
    bool all_converged = true;
    std::ostringstream summary;
    if (s.has_lambdas) {
        const Box box = cfg.grid.box == BoxPolicy::suggested
                            ? suggested_box(cfg.problem, cfg.grid.margin * std::cbrt(cfg.problem.volume()))
                            : working_box(cfg.problem, cfg.grid.reach);
        const GridSpec grid = grid_for_box(box, cfg.grid.h);
        const ScalarField plus = rasterize(cfg.problem, grid, cfg.grid.subsamples);
        const double m = plus.integral();
        std::vector<double> lambdas = s.lambdas;
        if (s.lambdas_are_fractions)
            for (double& l : lambdas) l *= m;
        const auto curve = energy_curve(plus, lambdas, cfg.solver);
        std::vector<std::vector<double>> rows;
        for (const auto& p : curve) {
            rows.push_back({p.lambda, p.energy, p.mass, p.converged ? 1.0 : 0.0});
            all_converged = all_converged && p.converged;
        }
        stage.add("energy_curve.csv", csv_document({"lambda", "energy", "mass", "converged"}, rows));
        summary << " lambda_points=" << curve.size();
    }
    if (s.has_epsilons) {
        const auto* b = std::get_if<Ball>(&cfg.problem.shape());
        if (b == nullptr) throw ConfigError("/sweep/epsilons: the epsilon sequence needs a ball problem");
        const auto seq = gamma_energy_sequence(cfg.problem, s.epsilons, s.radial_cells);
        const double limit = ball_surface_energy(b->radius);
        std::vector<std::vector<double>> rows;
        for (const auto& p : seq) {
            rows.push_back({p.eps, p.energy, limit, p.converged ? 1.0 : 0.0});
            all_converged = all_converged && p.converged;
        }
        stage.add("gamma_sequence.csv", csv_document({"eps", "energy", "limit", "converged"}, rows));
        summary << " eps_points=" << seq.size();
    }
    stage.commit();
    if (!inv.quiet) *inv.stdout_stream << (all_converged ? "converged" : "NOT CONVERGED") << summary.str() << '\n';
    return all_converged ? kExitOk : kExitFlagged;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal screening of a positive charge distribution: solvers, oracles and diagnostics"};
    app.require_subcommand(1);
    Invocation inv;
    inv.stdout_stream = &out;
    inv.stderr_stream = &err;
    int threads = 1;
    std::string out_dir = ".";
    app.add_option("--threads", threads, "FFT threads (COULOMB_SCREEN_THREADS overrides)")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", inv.quiet, "No summary line");

    const auto common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", inv.config, "Configuration JSON");
        if (needs_config) opt->required();
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--threads", threads, "FFT threads")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", inv.quiet, "No summary line");
    };
    auto* solve = app.add_subcommand("solve", "Solve for the negative phase and write outputs");
    common(solve, true);
    auto* oracle = app.add_subcommand("oracle", "Closed-form values for concentric configurations");
    common(oracle, false);
    oracle->add_option("query", inv.args, "critical-ratio | bilayer R1 R2 | annulus R1 R2 | ball R | energy a,b,+ ...")
        ->required();
    auto* surface = app.add_subcommand("surface", "Solve the boundary-measure limit model");
    common(surface, true);
    auto* verify = app.add_subcommand("verify", "Re-run diagnostics on stored fields");
    common(verify, false);
    verify->add_option("fields", inv.args, "fields.vtk or the directory holding it");
    auto* sweep = app.add_subcommand("sweep", "Energy curve and epsilon sequence as CSV");
    common(sweep, true);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    inv.out = out_dir;
    if (const char* env = std::getenv("COULOMB_SCREEN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            err << "error: COULOMB_SCREEN_THREADS must be a positive integer\n";
            return kExitError;
        }
        threads = static_cast<int>(v);
    }
    try {
        set_fft_threads(threads);
        if (solve->parsed()) return cmd_solve(inv);
        if (oracle->parsed()) return cmd_oracle(inv);
        if (surface->parsed()) return cmd_surface(inv);
        if (verify->parsed()) return cmd_verify(inv);
        return cmd_sweep(inv);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace screen::cli
