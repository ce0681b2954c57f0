#include "wedge/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "wedge/error.hpp"

namespace wedge {

using nlohmann::json;

// ---- tables

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::io, "csv: missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    if (ec) fail(ErrorKind::io, "cannot create directory " + parent.string() + ": " + ec.message());
}

void join(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) os << ',';
        os << cells[k];
    }
    os << '\n';
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double x = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        fail(ErrorKind::io, "csv: not a number: '" + s + "'");
    }
}

} // namespace

void write_csv(const std::string& path, const CsvTable& t) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    join(out, t.header);
    for (const auto& r : t.rows) {
        if (r.size() != t.header.size()) fail(ErrorKind::io, "csv: row width differs from header in " + path);
        join(out, r);
    }
    if (!out) fail(ErrorKind::io, "write failed for " + path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::io, "csv: empty file " + path);
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split(line));
        if (t.rows.back().size() != t.header.size()) fail(ErrorKind::io, "csv: ragged row in " + path);
    }
    return t;
}

void write_json(const std::string& path, const json& j) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorKind::io, "write failed for " + path);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::io, path + ": " + e.what());
    }
}

// ---- run artifacts

CsvTable fields_table(const WedgeProblem& pb, const IterationField& v) {
    const WedgeGrid& g = pb.grid;
    CsvTable t;
    t.header = {"i", "j", "z1", "z2", "u1", "u2", "p", "rho", "du1", "dw", "dp", "drho"};
    t.rows.reserve(g.size());
    for (int i = 0; i <= g.N; ++i)
        for (int j = 0; j <= g.M; ++j) {
            const std::size_t n = g.idx(i, j);
            const EulerState s = v.state(pb, n);
            t.rows.push_back({std::to_string(i), std::to_string(j), fmt(g.z1(i, j)), fmt(g.z2(i, j)), fmt(s.u1),
                              fmt(s.u2), fmt(s.p), fmt(s.rho), fmt(v.du1[n]), fmt(v.dw[n]), fmt(v.dp[n]),
                              fmt(v.drho[n])});
        }
    return t;
}

CsvTable shock_table(const WedgeProblem& pb, const FixedPointResult& run) {
    const ShockCurve sc = shock_curve(pb, run.solution);
    const double k1 = pb.frame.k1;
    const TransportResult& tr = run.stages.transport;
    const auto& cons = run.stages.pressure.consistency;
    auto at = [](const std::vector<double>& v, std::size_t i) {
        return i < v.size() ? v[i] : std::numeric_limits<double>::quiet_NaN();
    };
    CsvTable t;
    t.header = {"i", "z2", "sigma", "sigma_prime", "dsigma_prime", "entropy", "bernoulli", "consistency"};
    for (std::size_t i = 0; i < sc.z2().size(); ++i) {
        const double z2 = sc.z2()[i];
        t.rows.push_back({std::to_string(i), fmt(z2), fmt(k1 * z2 + sc.dsigma()[i]),
                          fmt(k1 + sc.dsigma_prime()[i]), fmt(sc.dsigma_prime()[i]), fmt(at(tr.entropy_trace, i)),
                          fmt(at(tr.bernoulli_trace, i)), fmt(at(cons, i))});
    }
    return t;
}

CsvTable history_table(const std::vector<IterationRecord>& h) {
    CsvTable t;
    t.header = {"iteration", "residual", "damping", "norm", "min_margin", "linear_residual"};
    for (const auto& r : h)
        t.rows.push_back({std::to_string(r.iteration), fmt(r.residual), fmt(r.damping), fmt(r.norm),
                          fmt(r.min_margin), fmt(r.linear_residual)});
    return t;
}

EulerianShock eulerian_shock(const WedgeProblem& pb, const IterationField& v) {
    const WedgeGrid& g = pb.grid;
    const ShockCurve sc = shock_curve(pb, v);
    std::vector<double> inv_flux(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const EulerState s = v.state(pb, n);
        inv_flux[n] = 1.0 / (s.rho * s.u1);
    }
    const int samples = 2 * g.M;
    EulerianShock out;
    for (std::size_t i = 0; i < sc.z2().size(); ++i) {
        const double z2 = sc.z2()[i];
        const double y1 = pb.frame.k1 * z2 + sc.dsigma()[i];
        double x2 = pb.wedge.profile(y1);
        if (z2 > 0.0) {
            // trapezoid in psi along the line y1 = const, kept inside the truncated domain
            double acc = 0.0, prev = 0.0;
            for (int k = 0; k <= samples; ++k) {
                const double psi = z2 * k / samples;
                const double z1 = std::clamp(y1 - sc.dsigma_at(psi), pb.frame.k1 * psi, g.R);
                const double f = sample_bilinear(g, inv_flux, std::max(z1, 1e-300), psi);
                if (k) acc += 0.5 * (f + prev) * (z2 / samples);
                prev = f;
            }
            x2 += acc;
        }
        out.x1.push_back(y1);
        out.x2.push_back(x2 + 0.0); // no negative zero at the corner
    }
    return out;
}

CsvTable eulerian_shock_table(const EulerianShock& s) {
    CsvTable t;
    t.header = {"i", "x1", "x2"};
    for (std::size_t i = 0; i < s.x1.size(); ++i) t.rows.push_back({std::to_string(i), fmt(s.x1[i]), fmt(s.x2[i])});
    return t;
}

IterationField read_iterate(const WedgeProblem& pb, const CsvTable& fields, const CsvTable& shock) {
    const WedgeGrid& g = pb.grid;
    if (fields.rows.size() != g.size() || shock.rows.size() != static_cast<std::size_t>(g.N) + 1)
        fail(ErrorKind::io, "saved run does not match the configured grid");
    IterationField v = IterationField::zero(g);
    const std::size_t ci = fields.column("i"), cj = fields.column("j"), cz1 = fields.column("z1"),
                      cz2 = fields.column("z2"), cu = fields.column("du1"), cw = fields.column("dw"),
                      cp = fields.column("dp"), cr = fields.column("drho");
    for (const auto& r : fields.rows) {
        const int i = static_cast<int>(to_double(r[ci])), j = static_cast<int>(to_double(r[cj]));
        if (i < 0 || i > g.N || j < 0 || j > g.M) fail(ErrorKind::io, "saved run: node index out of range");
        const double z1 = to_double(r[cz1]), z2 = to_double(r[cz2]);
        if (std::abs(z1 - g.z1(i, j)) > 1e-9 * (1.0 + z1) || std::abs(z2 - g.z2(i, j)) > 1e-9 * (1.0 + z2))
            fail(ErrorKind::io, "saved run: node coordinates differ from the configured grid");
        const std::size_t n = g.idx(i, j);
        v.du1[n] = to_double(r[cu]);
        v.dw[n] = to_double(r[cw]);
        v.dp[n] = to_double(r[cp]);
        v.drho[n] = to_double(r[cr]);
    }
    const std::size_t si = shock.column("i"), sd = shock.column("dsigma_prime");
    for (const auto& r : shock.rows) {
        const int i = static_cast<int>(to_double(r[si]));
        if (i < 0 || i > g.N) fail(ErrorKind::io, "saved run: trace index out of range");
        v.dsigma_prime[i] = to_double(r[sd]);
    }
    return v;
}

void read_trace_stages(const CsvTable& shock, QStages& st) {
    const std::size_t ce = shock.column("entropy"), cb = shock.column("bernoulli"), cc = shock.column("consistency");
    st.transport.entropy_trace.clear();
    st.transport.bernoulli_trace.clear();
    st.pressure.consistency.clear();
    for (const auto& r : shock.rows) {
        st.transport.entropy_trace.push_back(to_double(r[ce]));
        st.transport.bernoulli_trace.push_back(to_double(r[cb]));
        st.pressure.consistency.push_back(to_double(r[cc]));
    }
}

std::vector<IterationRecord> read_history(const CsvTable& t) {
    std::vector<IterationRecord> h;
    const std::size_t a = t.column("iteration"), b = t.column("residual"), c = t.column("damping"),
                      d = t.column("norm"), e = t.column("min_margin"), f = t.column("linear_residual");
    for (const auto& r : t.rows) {
        IterationRecord x;
        x.iteration = static_cast<int>(to_double(r[a]));
        x.residual = to_double(r[b]);
        x.damping = to_double(r[c]);
        x.norm = to_double(r[d]);
        x.min_margin = to_double(r[e]);
        x.linear_residual = to_double(r[f]);
        h.push_back(x);
    }
    return h;
}

namespace {

json fit_json(const DecayFit& f) {
    return {{"field", f.field}, {"path", to_string(f.path)}, {"where", f.where}, {"exponent", f.exponent},
            {"intercept", f.intercept}, {"r2", f.r2}, {"points", f.points}, {"window", {f.lo, f.hi}}};
}

json corner_json(const CornerFit& c) {
    json j = {{"exponent", c.exponent}, {"r2", c.r2}, {"points", c.points}, {"rejected", c.rejected}};
    if (c.rejected) j["reason"] = c.reason;
    return j;
}

} // namespace

json report_json(const DiagnosticsReport& r) {
    json j;
    j["schema_version"] = schema_version;
    j["status"] = to_string(r.status);
    j["residual"] = r.residual;
    j["iterations"] = r.history.size();
    j["grid"] = {{"N", r.N}, {"M", r.M}, {"R", r.R}};
    j["background"] = {{"branch", r.branch}, {"b1", r.b1},   {"det", r.det}, {"b13", r.b13},
                       {"nu_n", r.nu_n},     {"nu_t", r.nu_t}, {"k1", r.k1}};
    j["window"] = {{"r_min", r.window.r_min}, {"xi_max_frac", r.window.xi_max_frac}};
    json eu = json::array(), rh = json::array();
    for (const auto& e : r.euler) eu.push_back({{"sup", e.sup}, {"l2", e.l2}, {"weighted", e.weighted}});
    for (const auto& e : r.rh) rh.push_back({{"sup", e.sup}, {"l2", e.l2}});
    j["euler_residuals"] = eu;
    j["rh_residuals"] = rh;
    j["upstream_residuals"] = r.upstream;
    j["consistency"] = {{"full", r.consistency_full}, {"window", r.consistency_window}, {"dw_sup", r.dw_sup}};
    json fits = json::array();
    for (const auto& f : r.fits) fits.push_back(fit_json(f));
    j["decay_fits"] = fits;
    j["corner_exponent"] = {{"dw", corner_json(r.corner_w)}, {"dp", corner_json(r.corner_p)}};
    const FarField& ff = r.farfield;
    j["farfield"] = {{"z2", ff.z2},
                     {"rho_inf", ff.rho_inf},
                     {"u1_inf", ff.u1_inf},
                     {"column_xi", ff.column_xi},
                     {"rho_gap", ff.rho_gap},
                     {"u1_gap", ff.u1_gap},
                     {"rho_rate", fit_json(ff.rho_rate)},
                     {"u1_rate", fit_json(ff.u1_rate)}};
    json wn = json::array();
    for (const auto& w : r.weighted) wn.push_back({{"field", w.field}, {"k0", w.k0}, {"k1", w.k1}});
    j["weighted_norms"] = wn;
    j["subsonic_margin"] = r.min_margin;
    json h = json::array();
    for (const auto& x : r.history)
        h.push_back({{"iteration", x.iteration}, {"residual", x.residual}, {"damping", x.damping},
                     {"min_margin", x.min_margin}});
    j["convergence_history"] = h;
    return j;
}

} // namespace wedge
