#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "screen_cli/commands.hpp"
#include "screen_cli/config.hpp"
#include "screen_cli/io.hpp"
#include "test_support.hpp"

using namespace screen;
using namespace screen::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const char* base = std::getenv("SCREEN_TEST_TMP");
    fs::path p = fs::path(base ? base : fs::temp_directory_path().string()) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "coulomb-screen");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const char* kBall = R"({
  "problem": {"type": "ball", "center": [0, 0, 0], "radius": 1},
  "lambda": "auto",
  "grid": {"h": 0.125},
  "solver": {"algorithm": "projected_gradient"},
  "outputs": ["json_report", "csv_radial", "vtk_fields"],
  "seed": 3
})";

std::string config_error(const std::string& text) {
    try {
        parse_run_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, ParsesDefaultsAndAuto) {
    const RunConfig c = parse_run_config(kBall);
    EXPECT_FALSE(c.lambda.has_value());
    EXPECT_DOUBLE_EQ(c.grid.h, 0.125);
    EXPECT_TRUE(c.outputs.vtk_fields);
    EXPECT_EQ(c.seed, 3);
    EXPECT_EQ(c.solver.algorithm, Algorithm::projected_gradient);
    EXPECT_DOUBLE_EQ(c.solver.step_tau, 0.4);
    EXPECT_DOUBLE_EQ(c.solver.sor_omega, 1.7);
}

TEST(Config, FieldPreciseErrors) {
    EXPECT_EQ(config_error(R"({"problem": {"type": "ball", "radius": 1}, "bogus": 1})"), "/bogus: unknown key");
    EXPECT_EQ(config_error(R"({"problem": {"type": "ball", "radius": 1}, "grid": {"h": -1}})"), "/grid/h: must be positive");
    EXPECT_EQ(config_error(R"({"problem": {"type": "ball", "radius": 1}, "solver": {"sor_omega": 2.5}})"),
              "/solver/sor_omega: must lie in (0, 2)");
    EXPECT_EQ(config_error(R"({"problem": {"type": "cube", "radius": 1}})"),
              "/problem/type: expected \"ball\", \"annulus\" or \"union\"");
    EXPECT_EQ(config_error(R"({"problem": {"type": "union", "parts": [{"type": "ball", "radius": 0}]}})"),
              "/problem/parts/0/radius: must be positive");
    EXPECT_EQ(config_error(R"({"problem": {"type": "ball", "radius": 1}, "lambda": "most"})"),
              "/lambda: expected a number or \"auto\"");
    EXPECT_EQ(config_error(R"({"grid": {}})"), "/problem: missing");
}

TEST(Config, SyntaxErrorsCarryLineAndColumn) {
    const std::string e = config_error("{\n  \"problem\": {\"type\": \"ball\",\n  \"radius\": }\n}");
    EXPECT_EQ(e.rfind("line 3, column", 0), 0u) << e;
}

TEST(Io, NumbersRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_number(v)), v);
    EXPECT_EQ(csv_document({"a", "b"}, {{0.1, 2.0}}), "a,b\r\n0.10000000000000001,2\r\n");
}

TEST(Io, VtkRoundTripIsExact) {
    const GridSpec g({-0.5, 0.25, 1.0}, 0.125, {4, 5, 6});
    const ScalarField a = screen::testing::random_field(g, 1), b = screen::testing::random_field(g, 2, -1, 1);
    const fs::path dir = scratch("vtk");
    write(dir / "f.vtk", vtk_document({{"a", &a}, {"b", &b}}, "test"));
    const auto back = read_vtk(dir / "f.vtk");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back.at("a").grid(), g);
    for (std::size_t n = 0; n < a.size(); ++n) {
        EXPECT_EQ(back.at("a")[n], a[n]);
        EXPECT_EQ(back.at("b")[n], b[n]);
    }
    write(dir / "bad.vtk", "not vtk\n");
    EXPECT_THROW(read_vtk(dir / "bad.vtk"), std::runtime_error);
}

TEST(Oracle, CriticalRatioAndBranches) {
    Result r = run_cli({"oracle", "critical-ratio"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out).at("critical_ratio").get<double>(), 1.849678069036566, 1e-12);

    r = run_cli({"oracle", "ball", "1"});
    ASSERT_EQ(r.code, 0);
    const json ball = json::parse(r.out);
    EXPECT_NEAR(ball.at("shells").at(1).at("r_outer").get<double>(), std::cbrt(2.0), 1e-14);

    r = run_cli({"oracle", "bilayer", "1", "2.2"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("filled-core"), std::string::npos);

    r = run_cli({"oracle", "bilayer", "1", "1.5"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(json::parse(r.out).at("r1").get<double>(), 0.663713537219, 1e-9);

    r = run_cli({"oracle", "energy", "0,1,+", "1,1.2599210498948732,-"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out).at("energy").get<double>(), 0.3984324365, 1e-9);

    EXPECT_EQ(run_cli({"oracle", "ball", "-1"}).code, 1);
    EXPECT_EQ(run_cli({"oracle", "ball", "abc"}).code, 1);
    EXPECT_EQ(run_cli({"oracle", "nonsense"}).code, 1);
}

TEST(Solve, WritesOutputsDeterministicallyAndVerifies) {
    const fs::path dir = scratch("solve");
    write(dir / "ball.json", kBall);
    const Result a = run_cli({"solve", "--config", (dir / "ball.json").string(), "--out", (dir / "a").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out.rfind("converged", 0), 0u);
    for (const char* f : {"report.json", "radial.csv", "fields.vtk", "fields.json"}) EXPECT_TRUE(fs::exists(dir / "a" / f));
    EXPECT_FALSE(fs::exists(dir / "a" / ".staging"));

    const Result b =
        run_cli({"solve", "--quiet", "--config", (dir / "ball.json").string(), "--out", (dir / "b").string()});
    ASSERT_EQ(b.code, 0);
    EXPECT_TRUE(b.out.empty());
    for (const char* f : {"report.json", "radial.csv", "fields.vtk"}) {
        EXPECT_EQ(read_text(dir / "a" / f), read_text(dir / "b" / f)) << f;
    }

    const json report = json::parse(read_text(dir / "a" / "report.json"));
    EXPECT_NEAR(report.at("mass").get<double>(), report.at("m").get<double>(), 0.01 * report.at("m").get<double>());
    EXPECT_TRUE(report.at("checks").at("all").get<bool>());

    // Round trip through verify: identical diagnostics.
    const Result v = run_cli({"verify", (dir / "a").string()});
    ASSERT_EQ(v.code, 0) << v.err;
    const json again = json::parse(v.out);
    const json& d0 = report.at("diagnostics");
    const json& d1 = again.at("diagnostics");
    EXPECT_NEAR(d1.at("screening_residual").get<double>(), d0.at("screening_residual").get<double>(), 1e-12);
    EXPECT_NEAR(d1.at("neutrality_error").get<double>(), d0.at("neutrality_error").get<double>(), 1e-12);
    EXPECT_NEAR(d1.at("min_phi").get<double>(), d0.at("min_phi").get<double>(), 1e-12);
    EXPECT_NEAR(d1.at("flux").at(0).at("error").get<double>(), d0.at("flux").at(0).at("error").get<double>(), 1e-12);
    EXPECT_EQ(d1.at("support"), d0.at("support"));

    // Tampering: a potential bump far from the charges breaks screening.
    auto fields = read_vtk(dir / "a" / "fields.vtk");
    ScalarField& phi = fields.at("phi");
    phi.at(1, 1, 1) = phi.max();
    const fs::path t = dir / "tampered";
    fs::create_directories(t);
    write(t / "fields.vtk", vtk_document({{"omega_plus", &fields.at("omega_plus")},
                                          {"u", &fields.at("u")},
                                          {"phi", &phi},
                                          {"omega_minus", &fields.at("omega_minus")}},
                                         "tampered"));
    fs::copy_file(dir / "a" / "fields.json", t / "fields.json");
    const Result bad = run_cli({"verify", (t / "fields.vtk").string()});
    EXPECT_EQ(bad.code, 2);
    EXPECT_FALSE(json::parse(bad.out).at("checks").at("screening").get<bool>());

    EXPECT_EQ(run_cli({"verify", (dir / "missing").string()}).code, 1);
}

TEST(Solve, SaturationAtTwiceM) {
    const fs::path dir = scratch("solve2m");
    json cfg = json::parse(kBall);
    cfg["lambda"] = 8.4;
    cfg["outputs"] = json::array({"json_report"});
    write(dir / "c.json", cfg.dump());
    const Result r = run_cli({"solve", "--config", (dir / "c.json").string(), "--out", (dir / "o").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json report = json::parse(read_text(dir / "o" / "report.json"));
    EXPECT_NEAR(report.at("mass").get<double>(), report.at("m").get<double>(), 0.01 * report.at("m").get<double>());
}

TEST(Solve, MalformedConfigLeavesNoOutputs) {
    const fs::path dir = scratch("malformed");
    write(dir / "c.json", "{\"problem\": {\"type\": \"ball\", \"radius\": 1}, \"grid\": {\"h\": 0}}");
    const Result r = run_cli({"solve", "--config", (dir / "c.json").string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("/grid/h"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "o"));
    EXPECT_EQ(run_cli({"solve", "--config", (dir / "absent.json").string()}).code, 1);
    EXPECT_EQ(run_cli({"solve"}).code, 1);
    EXPECT_EQ(run_cli({}).code, 1);
}

TEST(Solve, NonConvergenceIsFlagged) {
    const fs::path dir = scratch("flagged");
    json cfg = json::parse(kBall);
    cfg["solver"]["max_iters"] = 1;
    cfg["solver"]["coarse_levels"] = 0;
    cfg["outputs"] = json::array({"json_report"});
    write(dir / "c.json", cfg.dump());
    const Result r = run_cli({"solve", "--config", (dir / "c.json").string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(fs::exists(dir / "o" / "report.json"));
}

TEST(Surface, UniformSphereAndNodeFloor) {
    const fs::path dir = scratch("surface");
    write(dir / "s.json", R"({"problem": {"type": "ball", "radius": 1}, "surface": {"nodes": 400}})");
    const Result r = run_cli({"surface", "--config", (dir / "s.json").string(), "--out", (dir / "o").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json rep = json::parse(read_text(dir / "o" / "surface.json"));
    EXPECT_LE(rep.at("mass_rel_std").get<double>(), 0.02);
    EXPECT_EQ(rep.at("exterior_match").size(), 3u);
    EXPECT_LE(rep.at("exterior_match").at(1).at("mismatch").get<double>(), 0.01);

    write(dir / "few.json", R"({"problem": {"type": "ball", "radius": 1}, "surface": {"nodes": 5}})");
    EXPECT_EQ(run_cli({"surface", "--config", (dir / "few.json").string(), "--out", (dir / "p").string()}).code, 1);
}

TEST(Sweep, LambdaCurveAndEpsilonSequence) {
    const fs::path dir = scratch("sweep");
    write(dir / "s.json", R"({"problem": {"type": "ball", "radius": 1}, "grid": {"h": 0.125},
        "sweep": {"lambda_fractions": [0.25, 0.5, 0.75, 1.0, 1.5], "epsilons": [1, 0.5, 0.25], "radial_cells": 200}})");
    const Result r = run_cli({"sweep", "--config", (dir / "s.json").string(), "--out", (dir / "o").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream csv(read_text(dir / "o" / "energy_curve.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "lambda,energy,mass,converged\r");
    std::vector<double> e;
    while (std::getline(csv, line)) {
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        std::getline(row, cell, ',');
        e.push_back(std::stod(cell));
    }
    ASSERT_EQ(e.size(), 5u);
    for (std::size_t i = 1; i < 4; ++i) EXPECT_LT(e[i], e[i - 1]);
    EXPECT_TRUE(fs::exists(dir / "o" / "gamma_sequence.csv"));

    write(dir / "empty.json", R"({"problem": {"type": "ball", "radius": 1}, "sweep": {"lambdas": []}})");
    EXPECT_EQ(run_cli({"sweep", "--config", (dir / "empty.json").string(), "--out", (dir / "p").string()}).code, 1);
    EXPECT_FALSE(fs::exists(dir / "p"));
}

TEST(Threads, EnvironmentOverride) {
    ::setenv("COULOMB_SCREEN_THREADS", "zero", 1);
    EXPECT_EQ(run_cli({"oracle", "critical-ratio"}).code, 1);
    ::setenv("COULOMB_SCREEN_THREADS", "2", 1);
    EXPECT_EQ(run_cli({"oracle", "critical-ratio"}).code, 0);
    ::unsetenv("COULOMB_SCREEN_THREADS");
    EXPECT_EQ(run_cli({"--threads", "2", "oracle", "critical-ratio"}).code, 0);
}
