#include "wedge/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wedge/kernels.hpp"

namespace wedge {

namespace {

// a node is in the residual window when it is interior, away from the corner
// and inside the untruncated part of the grid
bool in_window(const WedgeGrid& g, int i, int j, const ResidualWindow& w) {
    return i >= 1 && i <= g.N - 1 && j >= 1 && j <= g.M - 1 && g.radius(i, j) >= w.r_min &&
           g.xi[i] <= w.xi_max_frac * g.R;
}

double cell_area(const WedgeGrid& g, int i) {
    const double dxi = 0.5 * (g.xi[std::min(i + 1, g.N)] - g.xi[std::max(i - 1, 0)]);
    return dxi * g.d_eta() * g.xi[i] / g.k1;
}

} // namespace

// ---- Euler residuals

std::array<ResidualNorms, 4> euler_residuals(const WedgeProblem& pb, const IterationField& v,
                                             const ResidualWindow& win) {
    const WedgeGrid& g = pb.grid;
    const GasModel& gas = pb.gas;
    const EulerState base = pb.base();
    const ShockCurve shock = shock_curve(pb, v);
    const std::size_t n = g.size();

    // flux perturbations from the background values
    std::vector<double> f1(n), w(n), f2(n), pw(n), u2(n), p(n), B(n), dsp(n);
    const double f10 = 1.0 / (base.rho * base.u1);
    const double f20 = base.u1 + base.p / (base.rho * base.u1);
    const double B0 = bernoulli(base, gas);
    kernels::for_range(n, [&](std::size_t k) {
        const EulerState s = v.state(pb, k);
        f1[k] = 1.0 / (s.rho * s.u1) - f10;
        w[k] = v.dw[k];
        f2[k] = s.u1 + s.p / (s.rho * s.u1) - f20;
        pw[k] = s.p * v.dw[k];
        u2[k] = s.u2;
        p[k] = v.dp[k];
        B[k] = bernoulli(s, gas) - B0;
        const int i = static_cast<int>(k / (g.M + 1)), j = static_cast<int>(k % (g.M + 1));
        dsp[k] = shock.dsigma_prime_at(g.z2(i, j));
    });
    const Gradient G1 = mapped_gradient(g, f1), GW = mapped_gradient(g, w), G2 = mapped_gradient(g, f2),
                   GPW = mapped_gradient(g, pw), GU2 = mapped_gradient(g, u2), GP = mapped_gradient(g, p),
                   GB = mapped_gradient(g, B);

    auto dy2 = [&](const Gradient& G, std::size_t k) { return G.dz2[k] - dsp[k] * G.dz1[k]; };
    std::array<ResidualNorms, 4> out{};
    std::array<double, 4> ss{};
    double area = 0.0;
    for (int i = 1; i < g.N; ++i)
        for (int j = 1; j < g.M; ++j) {
            if (!in_window(g, i, j, win)) continue;
            const std::size_t k = g.idx(i, j);
            const std::array<double, 4> r{G1.dz1[k] - dy2(GW, k), G2.dz1[k] - dy2(GPW, k), GU2.dz1[k] + dy2(GP, k),
                                          GB.dz1[k]};
            const double a = cell_area(g, i);
            const double wt = std::pow(1.0 + g.radius(i, j), 2.0);
            area += a;
            for (int e = 0; e < 4; ++e) {
                out[e].sup = std::max(out[e].sup, std::abs(r[e]));
                out[e].weighted = std::max(out[e].weighted, wt * std::abs(r[e]));
                ss[e] += a * r[e] * r[e];
            }
        }
    for (int e = 0; e < 4; ++e) out[e].l2 = area > 0.0 ? std::sqrt(ss[e] / area) : 0.0;
    return out;
}

// ---- jump residuals

std::array<JumpNorms, 4> rh_residuals(const WedgeProblem& pb, const IterationField& v) {
    const WedgeGrid& g = pb.grid;
    const ShockCurve shock = shock_curve(pb, v);
    const std::vector<double> z2 = g.trace_z2();
    const double k1 = pb.frame.k1;
    std::array<JumpNorms, 4> out{};
    std::array<double, 4> ss{};
    for (int i = 0; i <= g.N; ++i) {
        const EulerState l = pb.upstream(k1 * z2[i] + shock.dsigma_at(z2[i]), z2[i]);
        const EulerState r = v.state(pb, g.idx(i, g.M));
        const double sp = k1 + v.dsigma_prime[i];
        const double wl = l.u2 / l.u1, wr = r.u2 / r.u1;
        const std::array<double, 4> res{
            (1.0 / (r.rho * r.u1) - 1.0 / (l.rho * l.u1)) + (wr - wl) * sp,
            (r.u1 + r.p / (r.rho * r.u1) - l.u1 - l.p / (l.rho * l.u1)) + (r.p * wr - l.p * wl) * sp,
            (r.u2 - l.u2) - (r.p - l.p) * sp,
            bernoulli(r, pb.gas) - bernoulli(l, pb.gas)};
        for (int e = 0; e < 4; ++e) {
            out[e].sup = std::max(out[e].sup, std::abs(res[e]));
            ss[e] += res[e] * res[e];
        }
    }
    for (int e = 0; e < 4; ++e) out[e].l2 = std::sqrt(ss[e] / (g.N + 1));
    return out;
}

// ---- decay fits

const char* to_string(FitPath p) {
    switch (p) {
    case FitPath::ray: return "ray";
    case FitPath::streamline: return "streamline";
    case FitPath::column: return "column";
    case FitPath::profile: return "profile";
    }
    return "?";
}

DecayFit fit_power_law(std::span<const double> s, std::span<const double> f) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (f[k] == 0.0 || !std::isfinite(f[k])) continue;
        x.push_back(std::log1p(s[k]));
        y.push_back(std::log(std::abs(f[k])));
    }
    if (x.size() < 3) fail(ErrorKind::domain, "decay fit: fewer than three usable samples in the window");
    const double nx = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= nx;
    my /= nx;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (!(sxx > 0.0)) fail(ErrorKind::domain, "decay fit: degenerate window");
    DecayFit d;
    d.exponent = sxy / sxx;
    d.intercept = my - d.exponent * mx;
    d.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    d.points = static_cast<int>(x.size());
    return d;
}

DecayFit decay_fit(std::span<const double> field, const WedgeGrid& g, FitPath path, double where,
                   const FitWindow& win, std::span<const double> limit) {
    double lo = win.lo >= 0.0 ? win.lo : 10.0 * g.R / g.N;
    double hi = win.hi;
    if (hi < 0.0) hi = path == FitPath::column ? 0.9 * where / g.k1 : 0.9 * g.R;
    if (path == FitPath::streamline || path == FitPath::profile)
        fail(ErrorKind::domain, "decay fit: streamlines go through streamline_fit, profiles through farfield_limits");
    if (!(hi > lo) || win.samples < 3) {
        std::ostringstream os;
        os << "decay fit: empty window [" << lo << ", " << hi << "]";
        fail(ErrorKind::domain, os.str());
    }
    std::vector<double> s(win.samples), f(win.samples);
    for (int k = 0; k < win.samples; ++k) {
        const double t = static_cast<double>(k) / (win.samples - 1);
        s[k] = lo * std::pow(hi / lo, t);
        double z1 = 0.0, z2 = 0.0;
        switch (path) {
        case FitPath::ray:
            z1 = s[k] * std::cos(where);
            z2 = s[k] * std::sin(where);
            break;
        case FitPath::column:
            z1 = where;
            z2 = s[k];
            break;
        default: break;
        }
        f[k] = sample_bilinear(g, field, z1, z2);
        if (!limit.empty()) f[k] -= sample_bilinear(g, limit, z1, z2);
    }
    DecayFit d = fit_power_law(s, f);
    d.path = path;
    d.where = where;
    d.lo = lo;
    d.hi = hi;
    return d;
}

DecayFit streamline_fit(const WedgeProblem& pb, const IterationField& v, const TransportResult& tr,
                        const std::string& field, double z2, const FitWindow& win) {
    if (field != "drho" && field != "du1") fail(ErrorKind::domain, "streamline fit: unknown field " + field);
    const WedgeGrid& g = pb.grid;
    const GasModel& gas = pb.gas;
    const EulerState& base = pb.base();
    const double foot = g.k1 * z2;
    if (!(z2 >= 0.0) || foot > g.R) fail(ErrorKind::domain, "streamline fit: streamline misses the shock trace");
    double lo = std::max(win.lo >= 0.0 ? win.lo : 0.25 * g.R, foot * (1.0 + 1e-9));
    const double hi = win.hi >= 0.0 ? win.hi : 0.9 * g.R;
    if (!(hi > lo) || win.samples < 3) {
        std::ostringstream os;
        os << "streamline fit: empty window [" << lo << ", " << hi << "]";
        fail(ErrorKind::domain, os.str());
    }
    const double S = Pchip(g.xi, tr.entropy_trace)(foot);
    const double B = Pchip(g.xi, tr.bernoulli_trace)(foot);
    const double S0 = entropy_fn(base, gas);
    const double B0 = static_cast<double>(bernoulli_ext(pb.background.upstream, gas));
    const long double u10 = u1_from_bernoulli_ext(B0, 0.0, base.p, base.rho, gas);
    std::vector<double> s(win.samples), f(win.samples);
    for (int k = 0; k < win.samples; ++k) {
        s[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (win.samples - 1));
        const double p = base.p + sample_bilinear(g, v.dp, s[k], z2);
        const double rho = base.rho * std::pow((p / base.p) * (S0 / S), 1.0 / gas.gamma);
        if (field == "drho") {
            f[k] = rho - base.rho;
        } else {
            const double w = sample_bilinear(g, v.dw, s[k], z2);
            f[k] = static_cast<double>(u1_from_bernoulli_ext(B, w, p, rho, gas) - u10);
        }
    }
    DecayFit d = fit_power_law(s, f);
    d.field = field;
    d.path = FitPath::streamline;
    d.where = z2;
    d.lo = lo;
    d.hi = hi;
    return d;
}

// ---- far field

FarField farfield_limits(const WedgeProblem& pb, const IterationField& v, const TransportResult& tr) {
    const WedgeGrid& g = pb.grid;
    const GasModel& gas = pb.gas;
    const double p0 = pb.base().p;
    FarField ff;
    ff.z2 = g.trace_z2();
    const std::size_t nt = ff.z2.size();
    ff.rho_inf.resize(nt);
    ff.u1_inf.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        ff.rho_inf[i] = std::pow(p0 / tr.entropy_trace[i], 1.0 / gas.gamma);
        ff.u1_inf[i] = u1_from_bernoulli(tr.bernoulli_trace[i], 0.0, p0, ff.rho_inf[i], gas);
    }
    // compare each column with the limit carried by the same streamlines
    const Pchip rho_l(g.xi, ff.rho_inf), u1_l(g.xi, ff.u1_inf);
    for (int i = 1; i <= g.N; ++i) {
        double gr = 0.0, gu = 0.0;
        for (int j = 0; j <= g.M; ++j) {
            const EulerState s = v.state(pb, g.idx(i, j));
            const double foot = g.eta[j] * g.xi[i];
            gr = std::max(gr, std::abs(s.rho - rho_l(foot)));
            gu = std::max(gu, std::abs(s.u1 - u1_l(foot)));
        }
        ff.column_xi.push_back(g.xi[i]);
        ff.rho_gap.push_back(gr);
        ff.u1_gap.push_back(gu);
    }
    // rates over the same window as the ray fits
    const double lo = 10.0 * g.R / g.N, hi = 0.9 * g.R;
    std::vector<double> s, a, b;
    for (std::size_t k = 0; k < ff.column_xi.size(); ++k)
        if (ff.column_xi[k] >= lo && ff.column_xi[k] <= hi) {
            s.push_back(ff.column_xi[k]);
            a.push_back(ff.rho_gap[k]);
            b.push_back(ff.u1_gap[k]);
        }
    auto rate = [&](const std::vector<double>& f, const char* name) {
        DecayFit d;
        try {
            d = fit_power_law(s, f);
        } catch (const Error&) {
            d.points = 0; // all gaps vanish, e.g. zero data
        }
        d.field = name;
        d.path = FitPath::column;
        d.lo = lo;
        d.hi = hi;
        return d;
    };
    ff.rho_rate = rate(ff.rho_gap, "rho_gap");
    ff.u1_rate = rate(ff.u1_gap, "u1_gap");

    // limit profiles against z2, same relative window as the column fits
    const double plo = 10.0 * g.R / g.N, phi = 0.9 * g.R / g.k1;
    const double rho0 = pb.base().rho, u10 = pb.base().u1;
    std::vector<double> zs, pr, pu;
    for (std::size_t i = 0; i < nt; ++i)
        if (ff.z2[i] >= plo && ff.z2[i] <= phi) {
            zs.push_back(ff.z2[i]);
            pr.push_back(ff.rho_inf[i] - rho0);
            pu.push_back(ff.u1_inf[i] - u10);
        }
    auto profile = [&](const std::vector<double>& f, const char* name) {
        DecayFit d;
        try {
            d = fit_power_law(zs, f);
        } catch (const Error&) {
            d.points = 0;
        }
        d.field = name;
        d.path = FitPath::profile;
        d.lo = plo;
        d.hi = phi;
        return d;
    };
    ff.rho_profile = profile(pr, "drho");
    ff.u1_profile = profile(pu, "du1");
    return ff;
}

// ---- weighted norms

double weighted_sup_norm(std::span<const double> field, const WedgeGrid& g, const WeightSpec& w, int k) {
    if (k != 0 && k != 1) fail(ErrorKind::domain, "weighted_sup_norm: only k = 0 and k = 1 are supported");
    Gradient grad;
    if (k == 1) grad = mapped_gradient(g, field);
    const double eo = std::max(w.gamma1 + std::min(static_cast<double>(k), -w.gamma2), 0.0);
    const double ew = std::max(k + w.gamma2, 0.0);
    return kernels::max_range(g.size(), [&](std::size_t n) {
        const int i = static_cast<int>(n / (g.M + 1)), j = static_cast<int>(n % (g.M + 1));
        const double r = g.radius(i, j), z2 = g.z2(i, j);
        double wt = std::pow(r + 1.0, w.tau) * std::pow(z2 + 1.0, w.l + k);
        if (w.corner) wt *= std::pow(std::min(r, 1.0), eo);
        if (w.wall) wt *= std::pow(std::min(z2, 1.0), ew);
        const double val = k == 0 ? std::abs(field[n]) : std::hypot(grad.dz1[n], grad.dz2[n]);
        return wt * val;
    });
}

// ---- upstream

std::array<double, 4> upstream_residuals(const WedgeProblem& pb, int samples) {
    const UpstreamModel& up = pb.upstream;
    const GasModel& gas = pb.gas;
    const double k1 = pb.frame.k1;
    std::array<double, 4> out{};
    // points on rays inside 0 < y1 < (4/3) k1 y2, radii 1 .. R
    for (double frac : {0.2, 0.5, 0.8})
        for (int k = 0; k < samples; ++k) {
            const double r = pb.grid.R * std::pow(1.0 / pb.grid.R, 1.0 - static_cast<double>(k) / (samples - 1));
            const double th = std::atan2(1.0, frac * (4.0 / 3.0) * k1);
            const double y1 = r * std::cos(th), y2 = r * std::sin(th);
            const double h = 1e-4 * (1.0 + r);
            auto at = [&](double a, double b) { return up(a, b); };
            auto d1 = [&](auto f) { return (f(at(y1 + h, y2)) - f(at(y1 - h, y2))) / (2.0 * h); };
            auto d2 = [&](auto f) { return (f(at(y1, y2 + h)) - f(at(y1, y2 - h))) / (2.0 * h); };
            auto F1 = [](const EulerState& s) { return 1.0 / (s.rho * s.u1); };
            auto W = [](const EulerState& s) { return s.u2 / s.u1; };
            auto F2 = [](const EulerState& s) { return s.u1 + s.p / (s.rho * s.u1); };
            auto PW = [](const EulerState& s) { return s.p * s.u2 / s.u1; };
            auto U2 = [](const EulerState& s) { return s.u2; };
            auto P = [](const EulerState& s) { return s.p; };
            auto Bf = [&](const EulerState& s) { return bernoulli(s, gas); };
            const std::array<double, 4> res{d1(F1) - d2(W), d1(F2) - d2(PW), d1(U2) + d2(P), d1(Bf)};
            for (int e = 0; e < 4; ++e) out[e] = std::max(out[e], std::abs(res[e]));
        }
    return out;
}

// ---- report

DiagnosticsReport diagnose(const WedgeProblem& pb, const FixedPointResult& run, const ResidualWindow& win) {
    const WedgeGrid& g = pb.grid;
    const IterationField& v = run.solution;
    DiagnosticsReport r;
    r.N = g.N;
    r.M = g.M;
    r.R = g.R;
    r.window = win;
    r.euler = euler_residuals(pb, v, win);
    r.rh = rh_residuals(pb, v);
    r.upstream = upstream_residuals(pb);
    r.branch = pb.spec.branch;
    r.b1 = pb.coeffs.b1;
    r.det = pb.coeffs.det;
    r.b13 = pb.coeffs.b[0][2];
    r.nu_n = pb.coeffs.nu_n;
    r.nu_t = pb.coeffs.nu_t;
    r.k1 = pb.frame.k1;

    const auto& f = run.stages.pressure.consistency;
    for (int i = 0; i <= g.N && i < static_cast<int>(f.size()); ++i) {
        r.consistency_full = std::max(r.consistency_full, std::abs(f[i]));
        if (g.radius(i, g.M) >= win.r_min) r.consistency_window = std::max(r.consistency_window, std::abs(f[i]));
    }
    for (double x : v.dw) r.dw_sup = std::max(r.dw_sup, std::abs(x));

    auto add_fit = [&](const std::vector<double>& fld, const char* name, FitPath path, double where) {
        try {
            DecayFit d = decay_fit(fld, g, path, where);
            d.field = name;
            r.fits.push_back(d);
        } catch (const Error&) {
            // nothing to fit (identically zero field)
        }
    };
    const double om = pb.frame.omega0;
    for (double fr : ray_fractions) {
        add_fit(v.dp, "dp", FitPath::ray, fr * om);
        add_fit(v.dw, "dw", FitPath::ray, fr * om);
    }
    const TransportResult& tr = run.stages.transport;
    if (!tr.entropy_trace.empty())
        for (double z2 : streamline_levels)
            for (const char* name : {"drho", "du1"}) {
                try {
                    r.fits.push_back(streamline_fit(pb, v, tr, name, z2));
                } catch (const Error&) {
                    // zero field, or a streamline outside the domain
                }
            }
    add_fit(v.drho, "drho", FitPath::column, 0.9 * g.R);
    add_fit(v.du1, "du1", FitPath::column, 0.9 * g.R);

    try {
        r.corner_w = corner_exponent(v.dw, g);
    } catch (const Error& e) {
        r.corner_w.rejected = true;
        r.corner_w.reason = e.what();
    }
    try {
        r.corner_p = corner_exponent(v.dp, g);
    } catch (const Error& e) {
        r.corner_p.rejected = true;
        r.corner_p.reason = e.what();
    }
    if (!tr.entropy_trace.empty()) {
        r.farfield = farfield_limits(pb, v, tr);
        for (const DecayFit* d : {&r.farfield.rho_profile, &r.farfield.u1_profile})
            if (d->points > 0) r.fits.push_back(*d);
    }

    const double ex = pb.strong() ? pb.spec.solver.norm_beta : 1.0 + pb.spec.solver.norm_beta;
    WeightSpec radial;
    radial.tau = ex;
    WeightSpec transversal;
    transversal.l = ex;
    r.weighted.push_back({"dw", weighted_sup_norm(v.dw, g, radial, 0), weighted_sup_norm(v.dw, g, radial, 1)});
    r.weighted.push_back({"dp", weighted_sup_norm(v.dp, g, radial, 0), weighted_sup_norm(v.dp, g, radial, 1)});
    r.weighted.push_back(
        {"du1", weighted_sup_norm(v.du1, g, transversal, 0), weighted_sup_norm(v.du1, g, transversal, 1)});
    r.weighted.push_back(
        {"drho", weighted_sup_norm(v.drho, g, transversal, 0), weighted_sup_norm(v.drho, g, transversal, 1)});

    r.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& h : run.history) r.min_margin = std::min(r.min_margin, h.min_margin);
    if (run.history.empty()) r.min_margin = run.stages.min_margin;
    r.history = run.history;
    r.status = run.status;
    r.residual = run.residual;
    r.wall_time = run.wall_time;
    return r;
}

const DecayFit& find_fit(const DiagnosticsReport& r, const std::string& field, FitPath path, double where) {
    for (const auto& f : r.fits)
        if (f.field == field && f.path == path && std::abs(f.where - where) <= 1e-12 * (1.0 + std::abs(where)))
            return f;
    fail(ErrorKind::domain, "no " + std::string(to_string(path)) + " fit for " + field);
}

} // namespace wedge
