#include "screen_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "screen/error.hpp"

namespace screen::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError((where.empty() ? std::string("/") : where) + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.contains(key)) fail(where + "/" + key, "unknown key");
    }
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "expected a finite number");
    return v;
}

double positive(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (!(v > 0.0)) fail(where, "must be positive");
    return v;
}

int integer(const json& j, const std::string& where, int lo) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    const auto v = j.get<std::int64_t>();
    if (v < lo || v > 1'000'000'000) fail(where, "must be an integer >= " + std::to_string(lo));
    return static_cast<int>(v);
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

Vec3 point(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) fail(where, "expected an array of 3 numbers");
    return {number(j[0], where + "/0"), number(j[1], where + "/1"), number(j[2], where + "/2")};
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "/" + std::to_string(i)));
    return out;
}

template <class F>
void with(const json& j, const char* key, const std::string& where, F&& f) {
    if (j.contains(key)) f(j.at(key), where + "/" + key);
}

void parse_grid(const json& j, const std::string& where, DomainSolveOptions& g) {
    only_keys(j, where, {"h", "box", "reach", "margin", "subsamples", "max_box_growth"});
    with(j, "h", where, [&](const json& v, const std::string& w) { g.h = positive(v, w); });
    with(j, "box", where, [&](const json& v, const std::string& w) {
        const std::string s = text(v, w);
        if (s == "working") {
            g.box = BoxPolicy::working;
        } else if (s == "suggested") {
            g.box = BoxPolicy::suggested;
        } else {
            fail(w, "expected \"working\" or \"suggested\"");
        }
    });
    with(j, "reach", where, [&](const json& v, const std::string& w) { g.reach = positive(v, w); });
    with(j, "margin", where, [&](const json& v, const std::string& w) {
        g.margin = number(v, w);
        if (g.margin < 0.0) fail(w, "must be >= 0");
    });
    with(j, "subsamples", where, [&](const json& v, const std::string& w) { g.subsamples = integer(v, w, 1); });
    with(j, "max_box_growth", where, [&](const json& v, const std::string& w) { g.max_box_growth = integer(v, w, 0); });
}

void parse_solver(const json& j, const std::string& where, SolveConfig& s) {
    only_keys(j, where,
              {"algorithm", "step_tau", "max_iters", "max_sweeps", "tol_residual", "sor_omega", "phase_threshold_factor",
               "coarse_levels"});
    with(j, "algorithm", where, [&](const json& v, const std::string& w) {
        const std::string a = text(v, w);
        if (a == "projected_gradient") {
            s.algorithm = Algorithm::projected_gradient;
        } else if (a == "obstacle_pgs") {
            s.algorithm = Algorithm::obstacle_pgs;
        } else if (a == "both") {
            s.algorithm = Algorithm::both;
        } else {
            fail(w, "expected \"projected_gradient\", \"obstacle_pgs\" or \"both\"");
        }
    });
    with(j, "step_tau", where, [&](const json& v, const std::string& w) { s.step_tau = positive(v, w); });
    with(j, "max_iters", where, [&](const json& v, const std::string& w) { s.max_iters = integer(v, w, 0); });
    with(j, "max_sweeps", where, [&](const json& v, const std::string& w) { s.max_sweeps = integer(v, w, 1); });
    with(j, "tol_residual", where, [&](const json& v, const std::string& w) { s.tol_residual = positive(v, w); });
    with(j, "sor_omega", where, [&](const json& v, const std::string& w) {
        s.sor_omega = number(v, w);
        if (!(s.sor_omega > 0.0 && s.sor_omega < 2.0)) fail(w, "must lie in (0, 2)");
    });
    with(j, "phase_threshold_factor", where, [&](const json& v, const std::string& w) {
        s.phase_threshold_factor = number(v, w);
        if (s.phase_threshold_factor < 0.0) fail(w, "must be >= 0");
    });
    with(j, "coarse_levels", where, [&](const json& v, const std::string& w) { s.coarse_levels = integer(v, w, 0); });
}

void parse_outputs(const json& j, const std::string& where, OutputSet& o) {
    if (!j.is_array()) fail(where, "expected an array of output names");
    o = OutputSet{false, false, false};
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string w = where + "/" + std::to_string(i);
        const std::string name = text(j[i], w);
        if (name == "json_report") {
            o.json_report = true;
        } else if (name == "csv_radial") {
            o.csv_radial = true;
        } else if (name == "vtk_fields") {
            o.vtk_fields = true;
        } else {
            fail(w, "expected \"json_report\", \"csv_radial\" or \"vtk_fields\"");
        }
    }
}

void parse_diagnostics(const json& j, const std::string& where, DiagnosticsConfig& d) {
    only_keys(j, where, {"exclusion_shells", "flux_radii", "min_diam_points", "min_diam_radii"});
    with(j, "exclusion_shells", where, [&](const json& v, const std::string& w) { d.exclusion_shells = integer(v, w, 0); });
    with(j, "flux_radii", where, [&](const json& v, const std::string& w) {
        d.flux_radii = numbers(v, w);
        for (std::size_t i = 0; i < d.flux_radii.size(); ++i)
            if (!(d.flux_radii[i] > 0.0)) fail(w + "/" + std::to_string(i), "must be positive");
    });
    with(j, "min_diam_points", where, [&](const json& v, const std::string& w) {
        if (!v.is_array()) fail(w, "expected an array of points");
        d.min_diam_points.clear();
        for (std::size_t i = 0; i < v.size(); ++i) d.min_diam_points.push_back(point(v[i], w + "/" + std::to_string(i)));
    });
    with(j, "min_diam_radii", where, [&](const json& v, const std::string& w) {
        d.min_diam_radii = numbers(v, w);
        if (d.min_diam_radii.empty()) fail(w, "must not be empty");
        for (std::size_t i = 0; i < d.min_diam_radii.size(); ++i)
            if (!(d.min_diam_radii[i] > 0.0)) fail(w + "/" + std::to_string(i), "must be positive");
    });
}

void parse_surface(const json& j, const std::string& where, SurfaceConfig& s) {
    only_keys(j, where, {"nodes", "self_interaction", "match_factors", "samples"});
    with(j, "nodes", where, [&](const json& v, const std::string& w) { s.nodes = integer(v, w, 10); });
    with(j, "self_interaction", where, [&](const json& v, const std::string& w) {
        const std::string t = text(v, w);
        if (t == "consistent") {
            s.self = SelfInteraction::consistent;
        } else if (t == "disk_patch") {
            s.self = SelfInteraction::disk_patch;
        } else if (t == "excluded") {
            s.self = SelfInteraction::excluded;
        } else {
            fail(w, "expected \"consistent\", \"disk_patch\" or \"excluded\"");
        }
    });
    with(j, "match_factors", where, [&](const json& v, const std::string& w) {
        s.match_factors = numbers(v, w);
        for (std::size_t i = 0; i < s.match_factors.size(); ++i)
            if (!(s.match_factors[i] > 1.0)) fail(w + "/" + std::to_string(i), "must exceed 1");
    });
    with(j, "samples", where, [&](const json& v, const std::string& w) { s.samples = integer(v, w, 1); });
}

void parse_sweep(const json& j, const std::string& where, SweepConfig& s) {
    only_keys(j, where, {"lambdas", "lambda_fractions", "epsilons", "radial_cells"});
    if (j.contains("lambdas") && j.contains("lambda_fractions")) {
        fail(where + "/lambda_fractions", "give either lambdas or lambda_fractions");
    }
    const auto lam = [&](const json& v, const std::string& w) {
        s.lambdas = numbers(v, w);
        s.has_lambdas = true;
        if (s.lambdas.empty()) fail(w, "must not be empty");
        for (std::size_t i = 0; i < s.lambdas.size(); ++i) {
            if (!(s.lambdas[i] >= 0.0)) fail(w + "/" + std::to_string(i), "must be >= 0");
            if (i > 0 && !(s.lambdas[i] > s.lambdas[i - 1])) fail(w + "/" + std::to_string(i), "must be ascending");
        }
    };
    with(j, "lambdas", where, lam);
    with(j, "lambda_fractions", where, [&](const json& v, const std::string& w) {
        lam(v, w);
        s.lambdas_are_fractions = true;
    });
    with(j, "epsilons", where, [&](const json& v, const std::string& w) {
        s.epsilons = numbers(v, w);
        s.has_epsilons = true;
        if (s.epsilons.empty()) fail(w, "must not be empty");
        for (std::size_t i = 0; i < s.epsilons.size(); ++i) {
            if (!(s.epsilons[i] > 0.0)) fail(w + "/" + std::to_string(i), "must be positive");
            if (i > 0 && !(s.epsilons[i] < s.epsilons[i - 1])) fail(w + "/" + std::to_string(i), "must be decreasing");
        }
    });
    with(j, "radial_cells", where, [&](const json& v, const std::string& w) { s.radial_cells = integer(v, w, 8); });
}

std::string position(const std::string& text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

DomainSpec parse_domain(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("type")) fail(where, "expected an object with a \"type\"");
    const std::string type = text(j.at("type"), where + "/type");
    try {
        if (type == "ball") {
            only_keys(j, where, {"type", "center", "radius"});
            if (!j.contains("radius")) fail(where + "/radius", "missing");
            const Vec3 c = j.contains("center") ? point(j.at("center"), where + "/center") : Vec3{};
            return DomainSpec::ball(c, positive(j.at("radius"), where + "/radius"));
        }
        if (type == "annulus") {
            only_keys(j, where, {"type", "center", "r_inner", "r_outer"});
            if (!j.contains("r_inner")) fail(where + "/r_inner", "missing");
            if (!j.contains("r_outer")) fail(where + "/r_outer", "missing");
            const Vec3 c = j.contains("center") ? point(j.at("center"), where + "/center") : Vec3{};
            return DomainSpec::annulus(c, number(j.at("r_inner"), where + "/r_inner"),
                                       number(j.at("r_outer"), where + "/r_outer"));
        }
        if (type == "union") {
            only_keys(j, where, {"type", "parts"});
            if (!j.contains("parts") || !j.at("parts").is_array()) fail(where + "/parts", "expected an array of domains");
            std::vector<DomainSpec> parts;
            for (std::size_t i = 0; i < j.at("parts").size(); ++i) {
                parts.push_back(parse_domain(j.at("parts")[i], where + "/parts/" + std::to_string(i)));
            }
            return DomainSpec::union_of(std::move(parts));
        }
    } catch (const PreconditionError& e) {
        fail(where, e.what());
    }
    fail(where + "/type", "expected \"ball\", \"annulus\" or \"union\"");
}

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(position(text, e.byte) + ": malformed JSON");
    }
    only_keys(j, "", {"problem", "lambda", "grid", "solver", "outputs", "seed", "diagnostics", "surface", "sweep"});
    RunConfig cfg;
    if (!j.contains("problem")) fail("/problem", "missing");
    cfg.problem_json = j.at("problem");
    cfg.problem = parse_domain(j.at("problem"), "/problem");
    if (cfg.problem.empty()) fail("/problem", "domain is empty");
    with(j, "lambda", "", [&](const json& v, const std::string& w) {
        if (v.is_string()) {
            if (v.get<std::string>() != "auto") fail(w, "expected a number or \"auto\"");
            cfg.lambda.reset();
        } else {
            const double l = number(v, w);
            if (l < 0.0) fail(w, "must be >= 0");
            cfg.lambda = l;
        }
    });
    with(j, "grid", "", [&](const json& v, const std::string& w) { parse_grid(v, w, cfg.grid); });
    with(j, "solver", "", [&](const json& v, const std::string& w) { parse_solver(v, w, cfg.solver); });
    with(j, "outputs", "", [&](const json& v, const std::string& w) { parse_outputs(v, w, cfg.outputs); });
    with(j, "seed", "", [&](const json& v, const std::string& w) {
        if (!v.is_number_integer()) fail(w, "expected an integer");
        cfg.seed = v.get<std::int64_t>();
    });
    with(j, "diagnostics", "", [&](const json& v, const std::string& w) { parse_diagnostics(v, w, cfg.diagnostics); });
    with(j, "surface", "", [&](const json& v, const std::string& w) { parse_surface(v, w, cfg.surface); });
    with(j, "sweep", "", [&](const json& v, const std::string& w) { parse_sweep(v, w, cfg.sweep); });
    cfg.grid.lambda = cfg.lambda;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_run_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string to_string(SelfInteraction s) {
    switch (s) {
        case SelfInteraction::excluded: return "excluded";
        case SelfInteraction::disk_patch: return "disk_patch";
        case SelfInteraction::consistent: return "consistent";
    }
    return "consistent";
}

}  // namespace screen::cli
