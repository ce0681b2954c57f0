#include "wedge/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "wedge/diagnostics.hpp"
#include "wedge/io.hpp"

namespace wedge {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::validation:
    case ErrorKind::domain:
    case ErrorKind::no_shock:
    case ErrorKind::detached: return exit_validation;
    case ErrorKind::cavitation:
    case ErrorKind::regime:
    case ErrorKind::degenerate:
    case ErrorKind::tangent_point:
    case ErrorKind::ellipticity:
    case ErrorKind::fold_over: return exit_guard;
    case ErrorKind::solver:
    case ErrorKind::nonconvergence: return exit_nonconvergence;
    case ErrorKind::io: return exit_io;
    }
    return exit_other;
}

namespace {

constexpr double deg = 180.0 / std::numbers::pi;

std::string in_dir(const std::string& dir, const char* file) { return (fs::path(dir) / file).string(); }

FixedPointStatus status_from_string(const std::string& s) {
    for (auto st : {FixedPointStatus::converged, FixedPointStatus::max_iterations, FixedPointStatus::diverged})
        if (s == to_string(st)) return st;
    fail(ErrorKind::io, "unknown run status '" + s + "'");
}

struct SolveOutcome {
    FixedPointResult run;
    bool partial = false;
    std::string message;
};

SolveOutcome run_solver(const WedgeProblem& pb) {
    try {
        return {solve_fixed_point(pb), false, {}};
    } catch (const NonConvergence& e) {
        return {e.partial(), true, e.what()};
    }
}

// the problem part of a config, used to match saved runs
json problem_json(const RunConfig& c) {
    json j = to_json(c);
    for (const char* k : {"output", "polar", "verify", "sweep", "seed"}) j.erase(k);
    return j;
}

void write_run(const RunConfig& cfg, const WedgeProblem& pb, const FixedPointResult& run,
               const DiagnosticsReport& rep, bool partial, std::ostream& log) {
    const std::string& dir = cfg.out_dir;
    write_csv(in_dir(dir, "fields.csv"), fields_table(pb, run.solution));
    write_csv(in_dir(dir, "shock.csv"), shock_table(pb, run));
    write_csv(in_dir(dir, "history.csv"), history_table(run.history));
    try {
        write_csv(in_dir(dir, "shock_eulerian.csv"), eulerian_shock_table(eulerian_shock(pb, run.solution)));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::io) throw;
        log << "shock_eulerian.csv skipped: " << e.what() << '\n';
    }
    json d = report_json(rep);
    d["partial"] = partial;
    d["run_config"] = to_json(cfg);
    write_json(in_dir(dir, "diagnostics.json"), d);
}

json criteria_json(const std::vector<Criterion>& cs) {
    json a = json::array();
    for (const auto& c : cs)
        a.push_back({{"name", c.name},
                     {"applicable", c.applicable},
                     {"passed", c.passed},
                     {"value", c.value},
                     {"threshold", c.threshold},
                     {"detail", c.detail}});
    return a;
}

json root_json(const ShockSolution& s, const GasModel& gas) {
    const auto r = eulerian_rh_residuals(s.upstream, s.downstream, s.k0, gas);
    double worst = 0.0;
    for (double x : r) worst = std::max(worst, std::abs(x));
    return {{"shock_angle_deg", s.shock_angle * deg},
            {"deflection_deg", s.deflection * deg},
            {"branch", to_string(s.branch)},
            {"downstream_mach", mach(s.downstream, gas)},
            {"p", s.downstream.p},
            {"rho", s.downstream.rho},
            {"rh_residual_max", worst}};
}

} // namespace

// ---- polar

int cmd_polar(const RunConfig& cfg, std::ostream& log) {
    const ProblemSpec& p = cfg.problem;
    const GasModel gas(p.gamma);
    if (!(p.mach > 1.0)) fail(ErrorKind::validation, "upstream must be supersonic (Mach number > 1)");
    validate(cfg);
    const EulerState up = uniform_upstream(p.mach, gas);
    const double mu = mach_angle(up, gas);
    const auto [det, det_shock] = detachment_point(up, gas);
    const ShockSolution son = sonic_point(up, gas);

    CsvTable t;
    t.header = {"shock_angle_deg", "deflection_deg", "branch", "downstream_mach", "p", "rho"};
    const int n = cfg.polar_samples;
    for (int k = 1; k <= n; ++k) {
        const double beta = mu + (0.5 * std::numbers::pi - mu) * k / n;
        const ShockSolution s = make_solution(up, beta, gas);
        t.rows.push_back({fmt(beta * deg), fmt(s.deflection * deg), to_string(s.branch),
                          fmt(mach(s.downstream, gas)), fmt(s.downstream.p), fmt(s.downstream.rho)});
    }

    json j;
    j["schema_version"] = schema_version;
    j["gamma"] = p.gamma;
    j["mach"] = p.mach;
    j["mach_angle_deg"] = mu * deg;
    j["detachment"] = {{"deflection_deg", det * deg}, {"shock_angle_deg", det_shock * deg}};
    j["sonic"] = {{"deflection_deg", son.deflection * deg}, {"shock_angle_deg", son.shock_angle * deg}};
    const WedgeRoots roots = solve_wedge(up, p.wedge_angle_deg / deg, gas);
    j["wedge_angle_deg"] = p.wedge_angle_deg;
    j["roots"] = {{"weak", root_json(roots.weak, gas)}, {"strong", root_json(roots.strong, gas)}};

    write_csv(in_dir(cfg.out_dir, "polar.csv"), t);
    write_json(in_dir(cfg.out_dir, "polar.json"), j);
    log << "polar: M = " << p.mach << ", detachment " << det * deg << " deg, sonic " << son.deflection * deg
        << " deg; weak root " << roots.weak.shock_angle * deg << " deg (" << to_string(roots.weak.branch)
        << "), strong root " << roots.strong.shock_angle * deg << " deg -> " << cfg.out_dir << '\n';
    return exit_ok;
}

// ---- solve

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const WedgeProblem pb(cfg.problem);
    const SolveOutcome out = run_solver(pb);
    const DiagnosticsReport rep = diagnose(pb, out.run);
    write_run(cfg, pb, out.run, rep, out.partial || !out.run.converged(), log);
    log << "solve: " << to_string(out.run.status) << " after " << out.run.history.size()
        << " iterations, residual " << out.run.residual << ", " << out.run.wall_time << " s -> " << cfg.out_dir
        << '\n';
    if (!out.run.converged()) {
        log << "partial outputs written";
        if (!out.message.empty()) log << ": " << out.message;
        log << '\n';
        return exit_nonconvergence;
    }
    return exit_ok;
}

// ---- verify

std::vector<Criterion> evaluate_criteria(const WedgeProblem& pb, const FixedPointResult& run,
                                         const DiagnosticsReport& rep, const VerifyThresholds& t,
                                         std::uint64_t seed) {
    std::vector<Criterion> out;
    auto add = [&](std::string name, bool passed, double value, double threshold, std::string detail = {}) {
        out.push_back({std::move(name), true, passed, value, threshold, std::move(detail)});
    };
    auto skip = [&](std::string name, std::string why) {
        out.push_back({std::move(name), false, true, 0.0, 0.0, std::move(why)});
    };

    add("converged", run.converged(), run.residual, pb.spec.solver.tol, to_string(run.status));
    double rh = 0.0, eu = 0.0;
    for (const auto& r : rep.rh) rh = std::max(rh, r.sup);
    for (const auto& r : rep.euler) eu = std::max(eu, r.sup);
    add("rh_residual", rh <= t.rh_max, rh, t.rh_max);
    const double cons_bound = t.consistency_rel * rep.dw_sup;
    {
        std::ostringstream os;
        os << "trace samples with |z| >= " << rep.window.r_min << "; full trace " << rep.consistency_full;
        add("consistency", rep.consistency_window <= cons_bound, rep.consistency_window, cons_bound, os.str());
    }
    add("euler_residual", eu <= t.euler_max, eu, t.euler_max, "sup over the residual window");
    add("subsonic_margin", rep.min_margin > 0.0, rep.min_margin, 0.0, "min (c^2 - q^2) / c^2 over all iterations");

    const bool zero = pb.eps() == 0.0; // the wedge perturbation scales with the same amplitude
    const double bound = t.decay_max + t.fit_slack;
    auto worst_ray = [&](const char* field) {
        double w = -std::numeric_limits<double>::infinity();
        for (double fr : ray_fractions) w = std::max(w, find_fit(rep, field, FitPath::ray, fr * pb.frame.omega0).exponent);
        return w;
    };
    if (zero) {
        for (const char* n : {"decay_dp_rays", "decay_dw_rays", "drho_streamline", "drho_transversal"})
            skip(n, "zero perturbation: nothing to fit");
    } else if (pb.strong()) {
        const double dp = worst_ray("dp");
        add("decay_dp_rays", dp < 0.0, dp, 0.0, "strong branch: exponent strictly negative");
        for (const char* n : {"decay_dw_rays", "drho_streamline", "drho_transversal"})
            skip(n, "weak-branch criterion");
    } else {
        const double dp = worst_ray("dp"), dw = worst_ray("dw");
        add("decay_dp_rays", dp <= bound, dp, bound, "largest exponent over the fit rays");
        add("decay_dw_rays", dw <= bound, dw, bound, "largest exponent over the fit rays");
        const DecayFit s = streamline_fit(pb, run.solution, run.stages.transport, "drho", t.streamline_z2);
        std::ostringstream os;
        os << "streamline z2 = " << t.streamline_z2 << ", r2 " << s.r2;
        add("drho_streamline", s.exponent >= t.streamline_min - t.fit_slack, s.exponent,
            t.streamline_min - t.fit_slack, os.str());
        const DecayFit& pr = rep.farfield.rho_profile;
        if (pr.points > 0) {
            std::ostringstream ps;
            ps << "far-field limit profile against z2, r2 " << pr.r2;
            add("drho_transversal", pr.exponent <= bound, pr.exponent, bound, ps.str());
        } else {
            add("drho_transversal", false, 0.0, bound, "no limit profile available");
        }
    }

    if (t.uniqueness_max < 0.0) {
        skip("uniqueness", "disabled");
    } else if (!run.converged()) {
        add("uniqueness", false, 0.0, t.uniqueness_max, "first run did not converge");
    } else {
        try {
            const FixedPointResult b = solve_fixed_point(pb, random_start(pb, seed));
            const double d = weighted_distance(pb, run.solution, b.solution);
            add("uniqueness", b.converged() && d <= t.uniqueness_max, d, t.uniqueness_max,
                "second start from a randomized iterate");
        } catch (const Error& e) {
            add("uniqueness", false, 0.0, t.uniqueness_max, e.what());
        }
    }
    return out;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const WedgeProblem pb(cfg.problem);
    const std::string& dir = cfg.out_dir;
    const bool saved = fs::exists(in_dir(dir, "fields.csv")) && fs::exists(in_dir(dir, "shock.csv")) &&
                       fs::exists(in_dir(dir, "diagnostics.json"));
    FixedPointResult run;
    std::optional<Criterion> reload;
    if (saved) {
        const json d = read_json(in_dir(dir, "diagnostics.json"));
        if (!d.contains("run_config") || problem_json(config_from_json(d.at("run_config"))) != problem_json(cfg))
            fail(ErrorKind::io, "saved run in " + dir + " was produced with a different problem configuration");
        const CsvTable shock = read_csv(in_dir(dir, "shock.csv"));
        run.solution = read_iterate(pb, read_csv(in_dir(dir, "fields.csv")), shock);
        read_trace_stages(shock, run.stages);
        run.history = read_history(read_csv(in_dir(dir, "history.csv")));
        run.status = status_from_string(d.at("status").get<std::string>());
        run.residual = d.at("residual").get<double>();
        // the saved fields must still be a fixed point
        const QResult q = apply_Q(pb, run.solution);
        const double nq = weighted_norm(pb, q.next);
        const double r = nq > 0.0 ? weighted_distance(pb, q.next, run.solution) / nq : 0.0;
        const double lim = 10.0 * pb.spec.solver.tol;
        reload = Criterion{"reload_fixed_point", true, r <= lim, r, lim, "one application of Q to the saved fields"};
        log << "verify: using the run saved in " << dir << '\n';
    } else {
        log << "verify: no saved run in " << dir << ", solving\n";
        const SolveOutcome out = run_solver(pb);
        run = out.run;
        write_run(cfg, pb, run, diagnose(pb, run), out.partial || !run.converged(), log);
    }
    const DiagnosticsReport rep = diagnose(pb, run);
    std::vector<Criterion> cs = evaluate_criteria(pb, run, rep, cfg.verify, cfg.seed);
    if (reload) cs.push_back(*reload);

    bool all = true;
    for (const auto& c : cs) {
        all = all && c.passed;
        log << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (c.applicable)
            log << "  value " << c.value << "  threshold " << c.threshold;
        else
            log << "  (not applicable)";
        if (!c.detail.empty()) log << "  [" << c.detail << ']';
        log << '\n';
    }
    json j;
    j["schema_version"] = schema_version;
    j["passed"] = all;
    j["source"] = saved ? "saved" : "fresh";
    j["criteria"] = criteria_json(cs);
    j["diagnostics"] = report_json(rep);
    write_json(in_dir(dir, "verify.json"), j);
    return all ? exit_ok : exit_verify_failed;
}

// ---- sweep

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    CsvTable t;
    t.header = {"amplitude", "branch",  "N",       "M",       "status",  "iterations",  "residual",
                "norm",      "norm_over_amplitude", "euler1", "euler2", "euler3", "euler4", "rh_max",
                "dp_exponent", "dw_exponent", "drho_streamline", "drho_profile", "min_margin", "error"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    int index = 0;
    for (double a : cfg.sweep.amplitudes)
        for (const auto& b : cfg.sweep.branches)
            for (int n : cfg.sweep.grids) {
                RunConfig rc = cfg;
                rc.problem.upstream.amplitude = a;
                rc.problem.branch = b;
                rc.problem.grid.N = n;
                rc.problem.grid.M = n / 2;
                char name[32];
                std::snprintf(name, sizeof name, "run_%03d", index++);
                rc.out_dir = (fs::path(cfg.out_dir) / "sweep" / name).string();
                std::vector<std::string> row{fmt(a), b, std::to_string(n), std::to_string(n / 2)};
                try {
                    const WedgeProblem pb(rc.problem);
                    const SolveOutcome out = run_solver(pb);
                    const DiagnosticsReport rep = diagnose(pb, out.run);
                    write_run(rc, pb, out.run, rep, out.partial || !out.run.converged(), log);
                    const double norm = weighted_norm(pb, out.run.solution);
                    double rh = 0.0;
                    for (const auto& r : rep.rh) rh = std::max(rh, r.sup);
                    auto fit_or_nan = [&](const char* f, FitPath p, double w) {
                        try {
                            return find_fit(rep, f, p, w).exponent;
                        } catch (const Error&) {
                            return nan;
                        }
                    };
                    const double mid = 0.5 * pb.frame.omega0;
                    double sl = nan;
                    try {
                        sl = streamline_fit(pb, out.run.solution, out.run.stages.transport, "drho",
                                            cfg.verify.streamline_z2)
                                 .exponent;
                    } catch (const Error&) {
                        // left as nan, e.g. zero amplitude
                    }
                    const double prof = rep.farfield.rho_profile.points > 0 ? rep.farfield.rho_profile.exponent : nan;
                    row.insert(row.end(), {to_string(out.run.status), std::to_string(out.run.history.size()),
                                           fmt(out.run.residual), fmt(norm), fmt(a > 0.0 ? norm / a : nan),
                                           fmt(rep.euler[0].sup), fmt(rep.euler[1].sup), fmt(rep.euler[2].sup),
                                           fmt(rep.euler[3].sup), fmt(rh), fmt(fit_or_nan("dp", FitPath::ray, mid)),
                                           fmt(fit_or_nan("dw", FitPath::ray, mid)), fmt(sl), fmt(prof),
                                           fmt(rep.min_margin), ""});
                } catch (const Error& e) {
                    std::string msg = e.what();
                    std::replace(msg.begin(), msg.end(), ',', ';');
                    row.push_back("error");
                    while (row.size() + 1 < t.header.size()) row.push_back(fmt(nan));
                    row.push_back(std::string(to_string(e.kind())) + ": " + msg);
                }
                log << "sweep " << rc.out_dir << ": " << row[4] << '\n';
                t.rows.push_back(std::move(row));
            }
    write_csv(in_dir(cfg.out_dir, "sweep.csv"), t);
    log << "sweep: " << t.rows.size() << " runs -> " << in_dir(cfg.out_dir, "sweep.csv") << '\n';
    return exit_ok;
}

// ---- dispatch

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    try {
        if (name == "polar") return cmd_polar(cfg, log);
        if (name == "solve") return cmd_solve(cfg, log);
        if (name == "verify") return cmd_verify(cfg, log);
        if (name == "sweep") return cmd_sweep(cfg, log);
        err << "unknown command '" << name << "'\n";
        return exit_validation;
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const json::exception& e) {
        err << "error [io]: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_other;
    }
}

} // namespace wedge
