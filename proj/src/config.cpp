#include "wedge/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "wedge/error.hpp"

namespace wedge {

using nlohmann::json;

namespace {

// object reader that remembers which keys were used
class Section {
public:
    Section(json j, std::string where) : j_(std::move(j)), where_(std::move(where)) {
        if (!j_.is_object()) fail(ErrorKind::validation, where_ + ": expected a JSON object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            fail(ErrorKind::validation, where_ + "." + key + ": " + e.what());
        }
    }

    Section sub(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return Section(it == j_.end() ? json::object() : *it, where_ + "." + key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) fail(ErrorKind::validation, "unknown configuration key " + where_ + "." + k);
    }

private:
    json j_;
    std::string where_;
    std::set<std::string> seen_;
};

} // namespace

json to_json(const RunConfig& c) {
    const ProblemSpec& p = c.problem;
    const SolverSpec& s = p.solver;
    const VerifyThresholds& v = c.verify;
    json j;
    j["gamma"] = p.gamma;
    j["mach"] = p.mach;
    j["wedge_angle_deg"] = p.wedge_angle_deg;
    j["branch"] = p.branch;
    j["upstream"] = {{"family", p.upstream.family},
                     {"amplitude", p.upstream.amplitude},
                     {"decay", p.upstream.decay},
                     {"components", p.upstream.components},
                     {"angular_cutoff_deg", p.upstream.angular_cutoff_deg},
                     {"angular_center_deg", p.upstream.angular_center_deg}};
    j["wedge"] = {{"family", p.wedge.family},
                  {"amplitude_factor", p.wedge.amplitude_factor},
                  {"decay", p.wedge.decay}};
    j["grid"] = {{"R", p.grid.R},
                 {"N", p.grid.N},
                 {"M", p.grid.M},
                 {"grading", p.grid.grading},
                 {"far_stretch", p.grid.far_stretch}};
    j["solver"] = {{"linear_method", to_string(s.linear_method)},
                   {"linear_tol", s.linear_tol},
                   {"tol", s.tol},
                   {"max_iter", s.max_iter},
                   {"damping", s.damping},
                   {"damping_floor", s.damping_floor},
                   {"divergence_window", s.divergence_window},
                   {"truncation", s.truncation},
                   {"norm_beta", s.norm_beta},
                   {"b1_guard", s.b1_guard},
                   {"max_amplitude", s.max_amplitude}};
    j["output"] = {{"dir", c.out_dir}};
    j["seed"] = c.seed;
    j["polar"] = {{"samples", c.polar_samples}};
    j["verify"] = {{"rh_max", v.rh_max},
                   {"consistency_rel", v.consistency_rel},
                   {"euler_max", v.euler_max},
                   {"fit_slack", v.fit_slack},
                   {"decay_max", v.decay_max},
                   {"streamline_min", v.streamline_min},
                   {"streamline_z2", v.streamline_z2},
                   {"uniqueness_max", v.uniqueness_max}};
    j["sweep"] = {{"amplitudes", c.sweep.amplitudes}, {"branches", c.sweep.branches}, {"grids", c.sweep.grids}};
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    ProblemSpec& p = c.problem;
    Section top(j, "config");
    top.get("gamma", p.gamma);
    top.get("mach", p.mach);
    top.get("wedge_angle_deg", p.wedge_angle_deg);
    top.get("branch", p.branch);
    top.get("seed", c.seed);

    Section up = top.sub("upstream");
    up.get("family", p.upstream.family);
    up.get("amplitude", p.upstream.amplitude);
    up.get("decay", p.upstream.decay);
    up.get("components", p.upstream.components);
    up.get("angular_cutoff_deg", p.upstream.angular_cutoff_deg);
    up.get("angular_center_deg", p.upstream.angular_center_deg);
    up.finish();

    Section wd = top.sub("wedge");
    wd.get("family", p.wedge.family);
    wd.get("amplitude_factor", p.wedge.amplitude_factor);
    wd.get("decay", p.wedge.decay);
    wd.finish();

    Section gr = top.sub("grid");
    gr.get("R", p.grid.R);
    gr.get("N", p.grid.N);
    gr.get("M", p.grid.M);
    gr.get("grading", p.grid.grading);
    gr.get("far_stretch", p.grid.far_stretch);
    gr.finish();

    Section so = top.sub("solver");
    std::string method = to_string(p.solver.linear_method);
    so.get("linear_method", method);
    p.solver.linear_method = linear_method_from_string(method);
    so.get("linear_tol", p.solver.linear_tol);
    so.get("tol", p.solver.tol);
    so.get("max_iter", p.solver.max_iter);
    so.get("damping", p.solver.damping);
    so.get("damping_floor", p.solver.damping_floor);
    so.get("divergence_window", p.solver.divergence_window);
    so.get("truncation", p.solver.truncation);
    so.get("norm_beta", p.solver.norm_beta);
    so.get("b1_guard", p.solver.b1_guard);
    so.get("max_amplitude", p.solver.max_amplitude);
    so.finish();

    Section out = top.sub("output");
    out.get("dir", c.out_dir);
    out.finish();

    Section po = top.sub("polar");
    po.get("samples", c.polar_samples);
    po.finish();

    Section ve = top.sub("verify");
    ve.get("rh_max", c.verify.rh_max);
    ve.get("consistency_rel", c.verify.consistency_rel);
    ve.get("euler_max", c.verify.euler_max);
    ve.get("fit_slack", c.verify.fit_slack);
    ve.get("decay_max", c.verify.decay_max);
    ve.get("streamline_min", c.verify.streamline_min);
    ve.get("streamline_z2", c.verify.streamline_z2);
    ve.get("uniqueness_max", c.verify.uniqueness_max);
    ve.finish();

    Section sw = top.sub("sweep");
    sw.get("amplitudes", c.sweep.amplitudes);
    sw.get("branches", c.sweep.branches);
    sw.get("grids", c.sweep.grids);
    sw.finish();

    top.finish();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::validation, path + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const RunConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out << to_json(c).dump(2) << '\n';
    if (!out) fail(ErrorKind::io, "write failed for " + path);
}

void validate(const RunConfig& c) {
    validate(c.problem);
    auto bad = [](const std::string& m) { fail(ErrorKind::validation, m); };
    if (c.out_dir.empty()) bad("output.dir must not be empty");
    if (c.polar_samples < 3) bad("polar.samples must be >= 3");
    const VerifyThresholds& v = c.verify;
    if (!(v.rh_max >= 0.0 && v.consistency_rel >= 0.0 && v.euler_max >= 0.0 && v.fit_slack >= 0.0))
        bad("verify thresholds must be >= 0");
    if (!(v.streamline_z2 >= 0.0)) bad("verify.streamline_z2 must be >= 0");
    for (double a : c.sweep.amplitudes)
        if (!(a >= 0.0)) bad("sweep amplitudes must be >= 0");
    for (const auto& b : c.sweep.branches)
        if (b != "weak" && b != "strong") bad("sweep branch must be 'weak' or 'strong'");
    for (int n : c.sweep.grids)
        if (n < 16) bad("sweep grids must be >= 16");
}

} // namespace wedge
