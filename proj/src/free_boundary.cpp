#include "wedge/free_boundary.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "wedge/kernels.hpp"

namespace wedge {

namespace {

std::string node_name(const WedgeGrid& g, std::size_t n) {
    std::ostringstream os;
    os << "node (i=" << n / (g.M + 1) << ", j=" << n % (g.M + 1) << ")";
    return os.str();
}

// run a stage, prefixing any library error with its tag
template <class F>
auto staged(const char* tag, F&& f) {
    try {
        return f();
    } catch (const NonConvergence&) {
        throw;
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("Q[") + tag + "]: " + e.what());
    }
}

double pos_pow(double x, double a) { return a == 0.0 ? 1.0 : std::pow(x, a); }

} // namespace

// ---- decomposition

DecompCoeffs decomp_coeffs(const EulerState& s, const GasModel& gas) {
    if (!(s.u1 > 0.0)) fail(ErrorKind::regime, "decomp_coeffs: u1 must be positive");
    const double c2 = sound_speed_sq(s, gas);
    const double margin = c2 - s.speed_sq();
    if (!(margin > sonic_rel_tol * c2)) fail(ErrorKind::regime, "decomp_coeffs: state is not subsonic");
    const double c = std::sqrt(c2);
    const double root = std::sqrt(margin);
    const double den = c2 - s.u1 * s.u1;
    DecompCoeffs d;
    d.lambdaR = -c2 * s.rho * s.u2 / den;
    d.lambdaI = c * s.rho * s.u1 * root / den;
    d.e = root / (c * s.rho * s.u1 * s.u1);
    return d;
}

EllipticCoeffs elliptic_coeffs(const DecompCoeffs& d, double s) {
    const double den = d.e * d.lambdaI;
    const double mod2 = d.lambdaR * d.lambdaR + d.lambdaI * d.lambdaI;
    const double r = 1.0 - s * d.lambdaR;
    const double t = s * d.lambdaI;
    return {(r * r + t * t) / den, (d.lambdaR - s * mod2) / den, mod2 / den};
}

// ---- problem

void validate(const ProblemSpec& s) {
    auto bad = [](const std::string& m) { fail(ErrorKind::validation, m); };
    if (!(s.gamma > 1.0)) bad("gamma must exceed 1");
    if (!(s.mach > 1.0)) bad("upstream must be supersonic (Mach number > 1)");
    if (!(s.wedge_angle_deg > 0.0)) bad("wedge angle must be positive");
    {
        const GasModel gas(s.gamma);
        const double det = detachment_angle(uniform_upstream(s.mach, gas), gas) * 180.0 / std::numbers::pi;
        if (!(s.wedge_angle_deg < det)) {
            std::ostringstream os;
            os << "wedge angle " << s.wedge_angle_deg << " deg is not below the detachment angle " << det << " deg";
            bad(os.str());
        }
    }
    if (s.branch != "weak" && s.branch != "strong") bad("branch must be 'weak' or 'strong'");
    if (!(s.upstream.amplitude >= 0.0)) bad("perturbation amplitude must be >= 0");
    if (s.upstream.amplitude > s.solver.max_amplitude)
        bad("perturbation amplitude exceeds solver.max_amplitude");
    if (s.grid.N < 8 || s.grid.M < 8) bad("grid needs N, M >= 8");
    if (!(s.grid.R > 0.0)) bad("grid.R must be positive");
    if (!(s.grid.grading >= 1.0)) bad("grid.grading must be >= 1");
    if (!(s.grid.far_stretch >= 0.0)) bad("grid.far_stretch must be >= 0");
    const SolverSpec& v = s.solver;
    if (!(v.tol > 0.0)) bad("solver.tol must be positive");
    if (v.max_iter < 1) bad("solver.max_iter must be >= 1");
    if (!(v.damping > 0.0 && v.damping <= 1.0)) bad("solver.damping must lie in (0, 1]");
    if (!(v.damping_floor > 0.0 && v.damping_floor <= v.damping)) bad("solver.damping_floor must lie in (0, damping]");
    if (v.divergence_window < 1) bad("solver.divergence_window must be >= 1");
    if (v.truncation != "wall" && v.truncation != "zero") bad("solver.truncation must be 'wall' or 'zero'");
    if (!(v.norm_beta >= 0.0)) bad("solver.norm_beta must be >= 0");
    if (!(v.b1_guard >= 0.0)) bad("solver.b1_guard must be >= 0");
    if (!(v.linear_tol > 0.0)) bad("solver.linear_tol must be positive");
}

namespace {

ShockSolution pick_background(const ProblemSpec& s, const GasModel& gas) {
    validate(s);
    const EulerState up = uniform_upstream(s.mach, gas);
    const WedgeRoots roots = solve_wedge(up, s.wedge_angle_deg * std::numbers::pi / 180.0, gas);
    const ShockSolution& bg = s.branch == "strong" ? roots.strong : roots.weak;
    if (bg.branch == Branch::supersonic_weak) {
        const auto [th_det, be_det] = detachment_point(up, gas);
        const ShockSolution son = sonic_point(up, gas);
        std::ostringstream os;
        os.precision(6);
        os << "weak root at wedge angle " << s.wedge_angle_deg << " deg has supersonic downstream (M = "
           << mach(bg.downstream, gas) << "); transonic weak shocks need the wedge angle in ("
           << son.deflection * 180.0 / std::numbers::pi << ", " << th_det * 180.0 / std::numbers::pi
           << ") deg for this Mach number";
        (void)be_det;
        fail(ErrorKind::regime, os.str());
    }
    const double k1 = make_frame(bg).k1;
    if (!(s.grid.R > 2.0 * k1)) {
        std::ostringstream os;
        os << "grid.R = " << s.grid.R << " must exceed twice the background shock slope (2 k1 = " << 2.0 * k1 << ")";
        fail(ErrorKind::validation, os.str());
    }
    return bg;
}

double default_decay(const ProblemSpec& s, double given) {
    if (given >= 0.0) return given;
    return s.branch == "strong" ? s.solver.norm_beta : 1.0 + s.solver.norm_beta;
}

} // namespace

WedgeProblem::WedgeProblem(const ProblemSpec& sp)
    : spec(sp),
      gas(sp.gamma),
      background(pick_background(sp, gas)),
      frame(make_frame(background)),
      grid(frame, sp.grid) {
    const ShockSolution son = sonic_point(background.upstream, gas);
    b1_sonic = std::abs(jump_gradients(son, gas).b1);
    CoeffOptions co;
    co.b1_tol = spec.solver.b1_guard * b1_sonic;
    coeffs = boundary_coeffs(background, gas, co);
    decay = default_decay(spec, spec.upstream.decay);
    upstream = UpstreamModel(background.upstream, spec.upstream, decay, frame.k1, gas);
    wedge = WedgeBoundary(spec.wedge, spec.upstream.amplitude, default_decay(spec, spec.wedge.decay));
    base_slope_ = lagrangian_shock_slope(background.upstream, background.downstream);
}

// ---- iterates

IterationField IterationField::zero(const WedgeGrid& g) {
    IterationField v;
    v.du1.assign(g.size(), 0.0);
    v.drho.assign(g.size(), 0.0);
    v.dw.assign(g.size(), 0.0);
    v.dp.assign(g.size(), 0.0);
    v.dsigma_prime.assign(g.N + 1, 0.0);
    return v;
}

EulerState IterationField::state(const WedgeProblem& pb, std::size_t n) const {
    const EulerState& b = pb.base();
    EulerState s;
    s.u1 = b.u1 + du1[n];
    s.u2 = s.u1 * dw[n];
    s.p = b.p + dp[n];
    s.rho = b.rho + drho[n];
    return s;
}

namespace {

// sum over components of sup(weight * |a - b|); b may be null
double weighted_sup(const WedgeProblem& pb, const IterationField& a, const IterationField* b) {
    const WedgeGrid& g = pb.grid;
    const double ex = pb.strong() ? pb.spec.solver.norm_beta : 1.0 + pb.spec.solver.norm_beta;
    auto diff = [&](const std::vector<double>& x, const std::vector<double>& y, std::size_t n) {
        return b ? std::abs(x[n] - y[n]) : std::abs(x[n]);
    };
    auto node_sup = [&](auto member, bool radial) {
        return kernels::max_range(g.size(), [&](std::size_t n) {
            const int i = static_cast<int>(n / (g.M + 1)), j = static_cast<int>(n % (g.M + 1));
            const double r = radial ? g.radius(i, j) : g.z2(i, j);
            return pos_pow(1.0 + r, ex) * diff(a.*member, b ? b->*member : a.*member, n);
        });
    };
    double s = node_sup(&IterationField::dw, true) + node_sup(&IterationField::dp, true) +
               node_sup(&IterationField::du1, false) + node_sup(&IterationField::drho, false);
    double sh = 0.0;
    for (int i = 0; i <= g.N; ++i) {
        const double d = b ? std::abs(a.dsigma_prime[i] - b->dsigma_prime[i]) : std::abs(a.dsigma_prime[i]);
        sh = std::max(sh, pos_pow(1.0 + g.radius(i, g.M), ex) * d);
    }
    return s + sh;
}

} // namespace

double weighted_norm(const WedgeProblem& pb, const IterationField& v) { return weighted_sup(pb, v, nullptr); }

double weighted_distance(const WedgeProblem& pb, const IterationField& a, const IterationField& b) {
    return weighted_sup(pb, a, &b);
}

ShockCurve shock_curve(const WedgeProblem& pb, const IterationField& v) {
    return ShockCurve(pb.grid.trace_z2(), v.dsigma_prime, pb.frame.k1);
}

IterationField random_start(const WedgeProblem& pb, std::uint64_t seed) {
    IterationField v = apply_Q(pb, IterationField::zero(pb.grid)).next;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> scale(0.5, 1.5);
    for (auto* f : {&v.du1, &v.drho, &v.dw, &v.dp, &v.dsigma_prime}) {
        const double c = scale(rng);
        for (double& x : *f) x *= c;
    }
    return v;
}

std::vector<EulerState> full_states(const WedgeProblem& pb, const IterationField& v) {
    std::vector<EulerState> s(pb.grid.size());
    kernels::for_range(s.size(), [&](std::size_t n) { s[n] = v.state(pb, n); });
    return s;
}

// ---- boundary data

BoundaryData assemble_boundary_data(const WedgeProblem& pb, const IterationField& v,
                                    const std::vector<EllipticCoeffs>& a, const Gradient& grad_w) {
    const WedgeGrid& g = pb.grid;
    const BoundaryCoeffs& c = pb.coeffs;
    const GasModel& gas = pb.gas;
    const EulerState& um0 = pb.background.upstream;
    const EulerState& base = pb.base();
    // differences of nearly equal G values are formed in extended precision
    const long double B0 = bernoulli_ext(um0, gas);
    const long double G10 = jump_G1_ext(um0, 0.0, base.p, base.rho, B0, gas);
    const long double G20 = jump_G2_ext(um0, 0.0, base.p, base.rho, B0, gas);
    const ShockCurve shock = shock_curve(pb, v);
    const std::vector<double> z2 = g.trace_z2();
    const double k1 = pb.frame.k1;

    const std::size_t nt = static_cast<std::size_t>(g.N) + 1;
    BoundaryData bd;
    bd.g1.assign(nt, 0.0);
    bd.g2.assign(nt, 0.0);
    bd.g3.assign(nt, 0.0);
    bd.g4.assign(nt, 0.0);
    bd.g3_prime.assign(nt, 0.0);
    bd.g7.assign(nt, 0.0);
    bd.upstream.resize(nt);
    bd.bernoulli.assign(nt, 0.0);

    kernels::for_range(nt, [&](std::size_t i) {
        const double y2 = z2[i];
        const EulerState um = pb.upstream(k1 * y2 + shock.dsigma_at(y2), y2);
        const long double B = bernoulli_ext(um, gas);
        const std::size_t n = g.idx(static_cast<int>(i), g.M);
        const double w = v.dw[n], p = base.p + v.dp[n], rho = base.rho + v.drho[n];
        const long double G1 = jump_G1_ext(um, w, p, rho, B, gas);
        const long double G2 = jump_G2_ext(um, w, p, rho, B, gas);
        bd.g1[i] = c.b[0][0] * w + c.b[0][1] * v.dp[n] + c.b[0][2] * v.drho[n] - static_cast<double>(G1 - G10);
        bd.g2[i] = c.b[1][0] * w + c.b[1][1] * v.dp[n] + c.b[1][2] * v.drho[n] - static_cast<double>(G2 - G20);
        bd.g3[i] = (c.b[1][2] * bd.g1[i] - c.b[0][2] * bd.g2[i]) / c.det;
        bd.g4[i] = bd.g1[i] / c.b[0][2];
        bd.upstream[i] = um;
        bd.bernoulli[i] = static_cast<double>(B);
    });

    const double a11b = 1.0 / (c.e0 * c.lambdaI0);
    const double a22b = c.lambdaI0 / c.e0;
    kernels::for_range(nt, [&](std::size_t i) {
        const auto& st = g.dxi[i];
        double d = 0.0;
        for (int k = 0; k < 3; ++k) d += st.w[k] * bd.g3[st.first + k];
        bd.g3_prime[i] = k1 * d;
        const std::size_t n = g.idx(static_cast<int>(i), g.M);
        const EllipticCoeffs& an = a[n];
        bd.g7[i] = bd.g3_prime[i] + c.b1 * ((an.a11 - a11b) - k1 * an.a12) * grad_w.dz1[n] -
                   c.b1 * (k1 * (an.a22 - a22b) - an.a12) * grad_w.dz2[n];
    });
    return bd;
}

// ---- pressure

PressureRecovery recover_pressure(const WedgeProblem& pb, const std::vector<EllipticCoeffs>& a,
                                  const std::vector<double>& dw_new, const IterationField& v,
                                  const BoundaryData& bd) {
    const WedgeGrid& g = pb.grid;
    const BoundaryCoeffs& c = pb.coeffs;
    const double k1 = pb.frame.k1;
    if (std::abs(c.b1) < pb.spec.solver.b1_guard * pb.b1_sonic || c.b1 == 0.0)
        fail(ErrorKind::tangent_point, "recover_pressure: |b1| below the tangent-point guard");

    const Gradient gn = mapped_gradient(g, dw_new);
    PressureRecovery pr;
    pr.dp.assign(g.size(), 0.0);
    const double half = 0.5 * g.d_eta();
    kernels::for_range(static_cast<std::size_t>(g.N) + 1, [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        const std::size_t top = g.idx(i, g.M);
        const double p_top = (bd.g3[ii] - dw_new[top]) / c.b1;
        if (i == 0) {
            for (int j = 0; j <= g.M; ++j) pr.dp[g.idx(0, j)] = p_top;
            return;
        }
        auto h = [&](int j) {
            const std::size_t n = g.idx(i, j);
            return -a[n].a11 * gn.dz1[n] - a[n].a12 * gn.dz2[n];
        };
        pr.dp[top] = p_top;
        const double scale = half * g.xi[i] / k1;
        double h_up = h(g.M);
        for (int j = g.M - 1; j >= 0; --j) {
            const double h_lo = h(j);
            pr.dp[g.idx(i, j)] = pr.dp[g.idx(i, j + 1)] - scale * (h_lo + h_up);
            h_up = h_lo;
        }
    });

    // defects of the first momentum relation on the shock edge
    const Gradient go = mapped_gradient(g, v.dw);
    const Gradient gp = mapped_gradient(g, pr.dp);
    const double a11b = 1.0 / (c.e0 * c.lambdaI0);
    const double a22b = c.lambdaI0 / c.e0;
    pr.consistency.assign(g.N + 1, 0.0);
    pr.momentum.assign(g.N + 1, 0.0);
    for (int i = 1; i <= g.N; ++i) {
        const std::size_t n = g.idx(i, g.M);
        const EllipticCoeffs& an = a[n];
        const double d1 = gn.dz1[n] - go.dz1[n], d2 = gn.dz2[n] - go.dz2[n];
        pr.consistency[i] = ((an.a11 - a11b) / k1 - an.a12) * d1 - ((an.a22 - a22b) - an.a12 / k1) * d2;
        pr.momentum[i] = gp.dz1[n] - an.a12 * gn.dz1[n] - an.a22 * gn.dz2[n];
    }
    pr.consistency[0] = pr.consistency[1];
    pr.momentum[0] = pr.momentum[1];
    return pr;
}

// ---- transport

TransportResult transport_state(const WedgeProblem& pb, const std::vector<double>& dw,
                                const std::vector<double>& dp, const BoundaryData& bd) {
    const WedgeGrid& g = pb.grid;
    const BoundaryCoeffs& c = pb.coeffs;
    const GasModel& gas = pb.gas;
    const EulerState& base = pb.base();
    const std::size_t nt = static_cast<std::size_t>(g.N) + 1;

    TransportResult tr;
    tr.entropy_trace.assign(nt, 0.0);
    tr.bernoulli_trace = bd.bernoulli;
    for (std::size_t i = 0; i < nt; ++i) {
        const std::size_t n = g.idx(static_cast<int>(i), g.M);
        EulerState s = base;
        s.p = base.p + dp[n];
        s.rho = base.rho + bd.g4[i] - c.b2 * dw[n] - c.b3 * dp[n];
        if (!(s.p > 0.0) || !(s.rho > 0.0))
            fail(ErrorKind::cavitation, "transport: non-positive pressure or density on the shock edge at " +
                                            node_name(g, n));
        tr.entropy_trace[i] = entropy_fn(s, gas);
    }
    const Pchip S(g.xi, tr.entropy_trace);
    const Pchip B(g.xi, tr.bernoulli_trace);
    const double S0 = entropy_fn(base, gas);
    // same rounding of B as the stored trace values, so zero data give exact zeros
    const double B0 = static_cast<double>(bernoulli_ext(pb.background.upstream, gas));
    const long double u10 = u1_from_bernoulli_ext(B0, 0.0, base.p, base.rho, gas);
    const double inv_gamma = 1.0 / gas.gamma;

    tr.du1.assign(g.size(), 0.0);
    tr.drho.assign(g.size(), 0.0);
    kernels::for_range(g.size(), [&](std::size_t n) {
        const int i = static_cast<int>(n / (g.M + 1)), j = static_cast<int>(n % (g.M + 1));
        const double foot = g.eta[j] * g.xi[i];
        const double p = base.p + dp[n];
        if (!(p > 0.0)) fail(ErrorKind::cavitation, "transport: non-positive pressure at " + node_name(g, n));
        const double rho = base.rho * std::pow((p / base.p) * (S0 / S(foot)), inv_gamma);
        tr.drho[n] = rho - base.rho;
        try {
            tr.du1[n] = static_cast<double>(u1_from_bernoulli_ext(B(foot), dw[n], p, rho, gas) - u10);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " at " + node_name(g, n));
        }
    });
    return tr;
}

// ---- shock

std::vector<double> update_shock(const WedgeProblem& pb, const IterationField& next, const BoundaryData& bd) {
    const WedgeGrid& g = pb.grid;
    std::vector<double> dsp(g.N + 1, 0.0);
    for (int i = 0; i <= g.N; ++i) {
        const EulerState s = next.state(pb, g.idx(i, g.M));
        dsp[i] = lagrangian_shock_slope(bd.upstream[i], s) - pb.base_shock_slope();
        if (!(pb.frame.k1 + dsp[i] > 0.0)) {
            std::ostringstream os;
            os << "update_shock: shock slope k1 + dsigma' = " << pb.frame.k1 + dsp[i] << " at trace sample " << i;
            fail(ErrorKind::fold_over, os.str());
        }
    }
    return dsp;
}

// ---- the map

std::vector<EllipticCoeffs> coefficient_fields(const WedgeProblem& pb, const IterationField& v) {
    const WedgeGrid& g = pb.grid;
    const ShockCurve shock = shock_curve(pb, v);
    std::vector<EllipticCoeffs> a(g.size());
    kernels::for_range(g.size(), [&](std::size_t n) {
        const int i = static_cast<int>(n / (g.M + 1)), j = static_cast<int>(n % (g.M + 1));
        DecompCoeffs d;
        try {
            d = decomp_coeffs(v.state(pb, n), pb.gas);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " at " + node_name(g, n));
        }
        a[n] = elliptic_coeffs(d, shock.dsigma_prime_at(g.z2(i, j)));
    });
    return a;
}

std::pair<std::vector<double>, LinearSolveReport> solve_flow_angle(const WedgeProblem& pb,
                                                                   const std::vector<EllipticCoeffs>& a,
                                                                   const BoundaryData& bd) {
    const WedgeGrid& g = pb.grid;
    const BoundaryCoeffs& c = pb.coeffs;
    EllipticProblem ep;
    ep.grid = &g;
    ep.a11.resize(g.size());
    ep.a12.resize(g.size());
    ep.a22.resize(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        ep.a11[n] = a[n].a11;
        ep.a12[n] = a[n].a12;
        ep.a22[n] = a[n].a22;
    }
    ep.g5.resize(g.N + 1);
    for (int i = 0; i <= g.N; ++i) ep.g5[i] = pb.wedge.slope(g.xi[i]);
    const double far = pb.spec.solver.truncation == "wall" ? ep.g5[g.N] : 0.0;
    ep.gR.assign(g.M + 1, far);
    ep.gR[0] = ep.g5[g.N];
    const double sgn = c.b1 > 0.0 ? 1.0 : -1.0;
    ep.g6.resize(g.N + 1);
    for (int i = 0; i <= g.N; ++i) ep.g6[i] = sgn * bd.g7[i] / c.mu_z_norm;
    ep.nu = c.nu_z;
    ep.edge = EdgeCondition::oblique;
    check_ellipticity(ep);
    SolveOptions so;
    so.method = pb.spec.solver.linear_method;
    so.tol = pb.spec.solver.linear_tol;
    auto [x, rep] = solve(ep, so);
    // slip holds exactly at the wall nodes
    for (int i = 0; i <= g.N; ++i) x[g.idx(i, 0)] = ep.g5[i];
    for (int j = 0; j <= g.M; ++j) x[g.idx(0, j)] = ep.g5[0];
    return {std::move(x), rep};
}

QResult apply_Q(const WedgeProblem& pb, const IterationField& v) {
    const WedgeGrid& g = pb.grid;
    QResult out;
    QStages& st = out.stages;

    st.coeffs = staged("coefficients", [&] { return coefficient_fields(pb, v); });
    const Gradient grad_w = mapped_gradient(g, v.dw);
    st.boundary = staged("boundary_data", [&] { return assemble_boundary_data(pb, v, st.coeffs, grad_w); });
    std::vector<double> dw = staged("flow_angle", [&] {
        auto [x, rep] = solve_flow_angle(pb, st.coeffs, st.boundary);
        st.linear = rep;
        return x;
    });

    st.pressure = staged("pressure", [&] { return recover_pressure(pb, st.coeffs, dw, v, st.boundary); });
    st.transport = staged("transport", [&] { return transport_state(pb, dw, st.pressure.dp, st.boundary); });

    IterationField& nx = out.next;
    nx.dw = std::move(dw);
    nx.dp = st.pressure.dp;
    nx.du1 = st.transport.du1;
    nx.drho = st.transport.drho;
    nx.sweep = v.sweep + 1;
    nx.damping = v.damping;
    nx.dsigma_prime = staged("shock", [&] { return update_shock(pb, nx, st.boundary); });

    st.min_margin = staged("guard", [&] {
        double worst = std::numeric_limits<double>::infinity();
        std::size_t at = 0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            const EulerState s = nx.state(pb, n);
            const double c2 = sound_speed_sq(s, pb.gas);
            const double m = (c2 - s.speed_sq()) / c2;
            if (m < worst) {
                worst = m;
                at = n;
            }
            if (!(s.u1 > 0.0)) fail(ErrorKind::regime, "non-positive u1 at " + node_name(g, n));
        }
        if (!(worst > sonic_rel_tol)) fail(ErrorKind::regime, "sonic or supersonic state at " + node_name(g, at));
        return worst;
    });
    return out;
}

// ---- fixed point

const char* to_string(FixedPointStatus s) {
    switch (s) {
    case FixedPointStatus::converged: return "converged";
    case FixedPointStatus::max_iterations: return "max_iterations";
    case FixedPointStatus::diverged: return "diverged";
    }
    return "?";
}

FixedPointResult solve_fixed_point(const WedgeProblem& pb, std::optional<IterationField> seed) {
    const SolverSpec& ss = pb.spec.solver;
    const auto t0 = std::chrono::steady_clock::now();
    IterationField v = seed ? std::move(*seed) : IterationField::zero(pb.grid);
    if (v.dw.size() != pb.grid.size() || v.dsigma_prime.size() != static_cast<std::size_t>(pb.grid.N) + 1)
        fail(ErrorKind::validation, "solve_fixed_point: seed does not match the grid");

    FixedPointResult res;
    double theta = ss.damping;
    double prev = std::numeric_limits<double>::infinity();
    int growth = 0;
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    for (int it = 1; it <= ss.max_iter; ++it) {
        v.damping = theta;
        QResult q = apply_Q(pb, v);
        const double nq = weighted_norm(pb, q.next);
        const double d = weighted_distance(pb, q.next, v);
        const double r = nq > 0.0 ? d / nq : d;
        res.history.push_back({it, r, theta, nq, q.stages.min_margin, q.stages.linear.residual});
        res.residual = r;
        res.solution = std::move(q.next);
        res.stages = std::move(q.stages);
        if (r <= ss.tol) {
            res.status = FixedPointStatus::converged;
            break;
        }
        if (r > prev) {
            ++growth;
            theta = std::max(0.5 * theta, ss.damping_floor);
        } else {
            growth = 0;
        }
        prev = r;
        if (growth >= ss.divergence_window) {
            res.status = FixedPointStatus::diverged;
            res.wall_time = elapsed();
            std::ostringstream os;
            os << "fixed point diverged: residual grew over " << growth << " consecutive iterations (last "
               << r << ")";
            throw NonConvergence(os.str(), std::move(res));
        }
        const IterationField& qn = res.solution;
        auto blend = [theta](std::vector<double>& a, const std::vector<double>& b) {
            for (std::size_t k = 0; k < a.size(); ++k) a[k] += theta * (b[k] - a[k]);
        };
        blend(v.du1, qn.du1);
        blend(v.drho, qn.drho);
        blend(v.dw, qn.dw);
        blend(v.dp, qn.dp);
        blend(v.dsigma_prime, qn.dsigma_prime);
        v.sweep = it;
    }
    res.wall_time = elapsed();
    return res;
}

} // namespace wedge
