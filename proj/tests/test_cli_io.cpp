#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include "wedge/commands.hpp"
#include "wedge/io.hpp"

using namespace wedge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wedge_cli_io_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// runs the CLI binary; returns its exit code
int cli(const std::string& args, const fs::path& log) {
    const char* exe = std::getenv("WEDGE_CLI");
    REQUIRE_MESSAGE(exe != nullptr, "WEDGE_CLI is not set");
    const std::string cmd = std::string(exe) + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

json small(double eps, int N = 64) {
    return {{"upstream", {{"amplitude", eps}}}, {"grid", {{"N", N}, {"M", N / 2}}}};
}

} // namespace

// ---- config

TEST_CASE("config defaults and round trip") {
    const RunConfig d = config_from_json(json::object());
    CHECK(d.problem.mach == 2.0);
    CHECK(d.problem.wedge_angle_deg == 22.85);
    CHECK(d.problem.branch == "weak");
    CHECK(d.problem.grid.N == 128);
    CHECK(d.problem.solver.tol == 1e-9);
    CHECK(d.verify.fit_slack == 0.15);
    CHECK(d.sweep.amplitudes.empty());

    RunConfig c = d;
    c.problem.gamma = 1.3;
    c.problem.branch = "strong";
    c.problem.upstream.amplitude = 2.5e-4;
    c.problem.upstream.components = {0.5, -1.0, 0.25, 2.0};
    c.problem.solver.linear_method = LinearMethod::krylov;
    c.problem.grid.R = 77.0;
    c.seed = 99;
    c.sweep.amplitudes = {1e-4, 1e-3};
    c.sweep.grids = {32, 64};
    const json j = to_json(c);
    const RunConfig back = config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(config_from_json(json::parse(j.dump())).problem.upstream.components[1] == -1.0);
    CHECK(to_json(config_from_json(to_json(back))) == j);
}

TEST_CASE("config rejects unknown keys and wrong types") {
    auto kind = [](const json& j) {
        try {
            config_from_json(j);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::io;
    };
    CHECK(kind({{"machh", 2.0}}) == ErrorKind::validation);
    CHECK(kind({{"grid", {{"NN", 3}}}}) == ErrorKind::validation);
    CHECK(kind({{"mach", "fast"}}) == ErrorKind::validation);
    CHECK(kind({{"solver", {{"linear_method", "magic"}}}}) == ErrorKind::validation);
    CHECK(kind(json::array()) == ErrorKind::validation);
}

TEST_CASE("config validation") {
    RunConfig c;
    CHECK_NOTHROW(validate(c));
    c.sweep.branches = {"sideways"};
    CHECK_THROWS_AS(validate(c), Error);
    c = RunConfig{};
    c.out_dir.clear();
    CHECK_THROWS_AS(validate(c), Error);
    c = RunConfig{};
    c.problem.mach = 0.8;
    try {
        validate(c);
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::validation);
        CHECK(std::string(e.what()).find("upstream must be supersonic") != std::string::npos);
    }
}

TEST_CASE("wedge angle stays in degrees in the config and is converted once") {
    RunConfig c = config_from_json({{"wedge_angle_deg", 22.8}, {"grid", {{"N", 16}, {"M", 8}}}});
    CHECK(c.problem.wedge_angle_deg == 22.8);
    const WedgeProblem pb(c.problem);
    CHECK(pb.background.deflection == doctest::Approx(22.8 * M_PI / 180.0).epsilon(1e-10));
}

// ---- tables

TEST_CASE("17 significant digits round-trip doubles") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(u(rng) * 30.0));
        CHECK(std::stod(fmt(x)) == x);
    }
}

TEST_CASE("csv round trip and malformed input") {
    const fs::path d = scratch("csv");
    CsvTable t;
    t.header = {"a", "b", "name"};
    t.rows = {{fmt(0.1), fmt(-2.5e-300), "x"}, {fmt(1.0 / 3.0), fmt(7.0), ""}};
    write_csv((d / "t.csv").string(), t);
    const CsvTable r = read_csv((d / "t.csv").string());
    CHECK(r.header == t.header);
    CHECK(r.rows == t.rows);
    CHECK(r.column("name") == 2);
    CHECK_THROWS_AS(r.column("missing"), Error);
    std::ofstream(d / "bad.csv") << "a,b\n1,2,3\n";
    CHECK_THROWS_AS(read_csv((d / "bad.csv").string()), Error);
    CHECK_THROWS_AS(read_csv((d / "none.csv").string()), Error);
}

TEST_CASE("saved fields and trace products reload exactly") {
    ProblemSpec s;
    s.upstream.amplitude = 1e-3;
    s.grid.N = 32;
    s.grid.M = 16;
    const WedgeProblem pb(s);
    const FixedPointResult run = solve_fixed_point(pb);
    const CsvTable f = fields_table(pb, run.solution), sh = shock_table(pb, run);
    const IterationField v = read_iterate(pb, f, sh);
    CHECK(v.dw == run.solution.dw);
    CHECK(v.dp == run.solution.dp);
    CHECK(v.du1 == run.solution.du1);
    CHECK(v.drho == run.solution.drho);
    CHECK(v.dsigma_prime == run.solution.dsigma_prime);
    QStages st;
    read_trace_stages(sh, st);
    CHECK(st.transport.entropy_trace == run.stages.transport.entropy_trace);
    CHECK(st.pressure.consistency == run.stages.pressure.consistency);
    const auto h = read_history(history_table(run.history));
    REQUIRE(h.size() == run.history.size());
    CHECK(h.back().residual == run.history.back().residual);

    ProblemSpec other = s;
    other.grid.N = 34;
    CHECK_THROWS_AS(read_iterate(WedgeProblem(other), f, sh), Error);
}

TEST_CASE("Eulerian shock of the background is the straight shock line") {
    ProblemSpec s;
    s.grid.N = 32;
    s.grid.M = 16;
    const WedgeProblem pb(s);
    const EulerianShock e = eulerian_shock(pb, IterationField::zero(pb.grid));
    for (std::size_t i = 1; i < e.x1.size(); ++i)
        CHECK(e.x1[i] == doctest::Approx(pb.frame.k0 * e.x2[i]).epsilon(1e-12));
}

TEST_CASE("error kinds map to distinct exit codes") {
    CHECK(exit_code_for(ErrorKind::validation) == exit_validation);
    CHECK(exit_code_for(ErrorKind::nonconvergence) == exit_nonconvergence);
    CHECK(exit_code_for(ErrorKind::regime) == exit_guard);
    CHECK(exit_code_for(ErrorKind::fold_over) == exit_guard);
    CHECK(exit_code_for(ErrorKind::io) == exit_io);
    const std::set<int> codes{exit_ok, exit_validation, exit_nonconvergence, exit_guard, exit_io, exit_verify_failed};
    CHECK(codes.size() == 6);
}

// ---- command line

TEST_CASE("cli polar reports detachment and refuses subsonic upstream") {
    const fs::path d = scratch("polar");
    CHECK(cli("polar --config " + write_config(d, json::object()).string() + " --out " + d.string(), d / "log") ==
          0);
    const json j = read_json((d / "polar.json").string());
    CHECK(j["schema_version"] == schema_version);
    CHECK(j["detachment"]["deflection_deg"].get<double>() == doctest::Approx(22.97).epsilon(0.05 / 22.97));
    CHECK(j["roots"]["weak"]["rh_residual_max"].get<double>() <= 1e-10);
    CHECK(read_csv((d / "polar.csv").string()).rows.size() == 181);

    const fs::path m = scratch("polar_sub");
    CHECK(cli("polar --config " + write_config(m, {{"mach", 0.8}}).string() + " --out " + m.string(), m / "log") ==
          exit_validation);
    CHECK(slurp(m / "log").find("upstream must be supersonic") != std::string::npos);
}

TEST_CASE("cli solve: validation, guard and usage errors") {
    const fs::path d = scratch("errors");
    CHECK(cli("solve --config " + write_config(d, {{"wedge_angle_deg", 0.0}}).string() + " --out " + d.string(),
              d / "log") == exit_validation);
    // weak root at 10 degrees is supersonic downstream
    CHECK(cli("solve --config " + write_config(d, {{"wedge_angle_deg", 10.0}}).string() + " --out " + d.string(),
              d / "log") == exit_guard);
    CHECK(cli("solve --config " + (d / "missing.json").string(), d / "log") == exit_io);
    CHECK(cli("solve", d / "log") != 0);
    CHECK(cli("launch --config x", d / "log") != 0);
}

TEST_CASE("cli solve with zero amplitude writes the background and verifies") {
    const fs::path d = scratch("zero");
    const fs::path cfg = write_config(d, small(0.0));
    REQUIRE(cli("solve --config " + cfg.string() + " --out " + d.string(), d / "log") == 0);
    const CsvTable f = read_csv((d / "fields.csv").string());
    for (const char* c : {"du1", "dw", "dp", "drho"}) {
        const std::size_t k = f.column(c);
        for (const auto& r : f.rows) CHECK(std::stod(r[k]) == 0.0);
    }
    const json j = read_json((d / "diagnostics.json").string());
    CHECK(j["status"] == "converged");
    CHECK(j["iterations"] == 1);
    CHECK(j["partial"] == false);
    CHECK(cli("verify --config " + cfg.string() + " --out " + d.string(), d / "vlog") == 0);
    CHECK(read_json((d / "verify.json").string())["passed"] == true);
}

TEST_CASE("cli solve is byte-stable across reruns") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const fs::path cfg = write_config(a, small(1e-3));
    REQUIRE(cli("solve --config " + cfg.string() + " --out " + a.string(), a / "log") == 0);
    REQUIRE(cli("solve --config " + cfg.string() + " --out " + b.string(), b / "log") == 0);
    for (const char* f : {"fields.csv", "shock.csv", "shock_eulerian.csv", "history.csv"})
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    // the embedded config names the output directory, everything else matches
    json ja = read_json((a / "diagnostics.json").string()), jb = read_json((b / "diagnostics.json").string());
    ja.erase("run_config");
    jb.erase("run_config");
    CHECK(ja == jb);
}

TEST_CASE("cli verify names the failing criterion and detects a foreign run") {
    const fs::path d = scratch("verify");
    const fs::path cfg = write_config(d, small(1e-3));
    REQUIRE(cli("solve --config " + cfg.string() + " --out " + d.string(), d / "log") == 0);
    REQUIRE(cli("verify --config " + cfg.string() + " --out " + d.string(), d / "vlog") == 0);
    const json ok = read_json((d / "verify.json").string());
    CHECK(ok["source"] == "saved");
    bool saw_decay = false;
    for (const auto& c : ok["criteria"])
        if (c["name"] == "decay_dp_rays") saw_decay = c["passed"].get<bool>() && c["value"].get<double>() <= -1.0;
    CHECK(saw_decay);

    json strict = small(1e-3);
    strict["verify"] = {{"euler_max", 0.0}};
    CHECK(cli("verify --config " + write_config(d, strict).string() + " --out " + d.string(), d / "vlog") ==
          exit_verify_failed);
    const json bad = read_json((d / "verify.json").string());
    CHECK(bad["passed"] == false);
    for (const auto& c : bad["criteria"])
        if (c["name"] == "euler_residual") CHECK(c["passed"] == false);
    CHECK(slurp(d / "vlog").find("FAIL euler_residual") != std::string::npos);

    CHECK(cli("verify --config " + write_config(d, small(5e-4)).string() + " --out " + d.string(), d / "vlog") ==
          exit_io);
}

TEST_CASE("cli solve flags partial outputs on non-convergence") {
    const fs::path d = scratch("partial");
    json j = small(1e-3);
    j["solver"] = {{"max_iter", 3}};
    CHECK(cli("solve --config " + write_config(d, j).string() + " --out " + d.string(), d / "log") ==
          exit_nonconvergence);
    const json r = read_json((d / "diagnostics.json").string());
    CHECK(r["partial"] == true);
    CHECK(r["status"] == "max_iterations");
    CHECK(read_csv((d / "history.csv").string()).rows.size() == 3);
}

TEST_CASE("cli sweep: empty grid, linear response, refinement order") {
    const fs::path e = scratch("sweep_empty");
    CHECK(cli("sweep --config " + write_config(e, json::object()).string() + " --out " + e.string(), e / "log") == 0);
    const CsvTable empty = read_csv((e / "sweep.csv").string());
    CHECK(empty.rows.empty());
    CHECK(empty.header.size() > 10);

    const fs::path d = scratch("sweep");
    json j = json::object();
    j["sweep"] = {{"amplitudes", {1e-4, 5e-4, 1e-3}}, {"branches", {"weak", "strong"}}, {"grids", {64}}};
    REQUIRE(cli("sweep --config " + write_config(d, j).string() + " --out " + d.string(), d / "log") == 0);
    const CsvTable t = read_csv((d / "sweep.csv").string());
    REQUIRE(t.rows.size() == 6);
    const std::size_t cb = t.column("branch"), cn = t.column("norm_over_amplitude"), cs = t.column("status");
    for (const char* br : {"weak", "strong"}) {
        std::vector<double> ratio;
        for (const auto& r : t.rows)
            if (r[cb] == br) {
                CHECK(r[cs] == "converged");
                ratio.push_back(std::stod(r[cn]));
            }
        REQUIRE(ratio.size() == 3);
        for (double x : ratio) CHECK(std::abs(x / ratio.back() - 1.0) <= 0.10);
    }
    for (int k = 0; k < 6; ++k) CHECK(fs::exists(d / "sweep" / ("run_00" + std::to_string(k)) / "diagnostics.json"));

    const fs::path g = scratch("sweep_grid");
    json h = json::object();
    h["sweep"] = {{"amplitudes", {1e-3}}, {"grids", {64, 128}}};
    REQUIRE(cli("sweep --config " + write_config(g, h).string() + " --out " + g.string(), g / "log") == 0);
    const CsvTable u = read_csv((g / "sweep.csv").string());
    REQUIRE(u.rows.size() == 2);
    for (const char* c : {"euler1", "euler2", "euler3", "euler4"}) {
        const std::size_t k = u.column(c);
        const double order = std::log2(std::stod(u.rows[0][k]) / std::stod(u.rows[1][k]));
        MESSAGE(c << " order " << order);
        CHECK(order >= 1.5);
    }
}
