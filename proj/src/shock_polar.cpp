#include "wedge/shock_polar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace wedge {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double angle_tol = 1e-13;

double normal_mach(const EulerState& up, double beta, const GasModel& gas) {
    return up.speed() * std::sin(beta) / sound_speed(up, gas);
}

// bisection for a sign change of f on [lo, hi]
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > angle_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

const char* to_string(Branch b) {
    switch (b) {
    case Branch::supersonic_weak: return "supersonic_weak";
    case Branch::transonic_TS: return "transonic_TS";
    case Branch::transonic_TH: return "transonic_TH";
    }
    return "unknown";
}

EulerState uniform_upstream(double mach_number, const GasModel& gas) {
    EulerState s;
    s.p = 1.0;
    s.rho = 1.0;
    s.u1 = mach_number * std::sqrt(gas.gamma);
    s.u2 = 0.0;
    return s;
}

double mach_angle(const EulerState& upstream, const GasModel& gas) {
    const double m = mach(upstream, gas);
    if (!(m > 1.0)) fail(ErrorKind::domain, "upstream must be supersonic");
    return std::asin(1.0 / m);
}

EulerState rh_downstream(const EulerState& up, double beta, const GasModel& gas) {
    check_state(up, "rh_downstream");
    if (!(beta > 0.0) || beta > 0.5 * pi + 1e-12)
        fail(ErrorKind::domain, "rh_downstream: shock angle outside (0, pi/2]");
    double mn = normal_mach(up, beta, gas);
    if (mn < 1.0 - 1e-12) {
        std::ostringstream os;
        os << "rh_downstream: normal Mach " << mn << " below one, no shock";
        fail(ErrorKind::no_shock, os.str());
    }
    mn = std::max(mn, 1.0);
    const double g = gas.gamma;
    const double mn2 = mn * mn;
    const double rho_ratio = (g + 1.0) * mn2 / ((g - 1.0) * mn2 + 2.0);
    const double p_ratio = 1.0 + 2.0 * g / (g + 1.0) * (mn2 - 1.0);

    const double q = up.speed();
    const double phi = std::atan2(up.u2, up.u1);
    const double un = q * std::sin(beta) / rho_ratio;
    const double ut = q * std::cos(beta);
    const double a = phi + beta;
    EulerState d;
    d.u1 = ut * std::cos(a) + un * std::sin(a);
    d.u2 = ut * std::sin(a) - un * std::cos(a);
    d.p = up.p * p_ratio;
    d.rho = up.rho * rho_ratio;
    return d;
}

double deflection_angle(const EulerState& up, double beta, const GasModel& gas) {
    const EulerState d = rh_downstream(up, beta, gas);
    const double phi_up = std::atan2(up.u2, up.u1);
    const double phi_dn = std::atan2(d.u2, d.u1);
    return phi_dn - phi_up;
}

std::pair<double, double> detachment_point(const EulerState& up, const GasModel& gas) {
    double lo = mach_angle(up, gas);
    double hi = 0.5 * pi;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = deflection_angle(up, x1, gas);
    double f2 = deflection_angle(up, x2, gas);
    for (int it = 0; it < 300 && hi - lo > angle_tol; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = deflection_angle(up, x2, gas);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = deflection_angle(up, x1, gas);
        }
    }
    const double b = 0.5 * (lo + hi);
    return {deflection_angle(up, b, gas), b};
}

double detachment_angle(const EulerState& up, const GasModel& gas) {
    return detachment_point(up, gas).first;
}

ShockSolution make_solution(const EulerState& up, double beta, const GasModel& gas) {
    const EulerState d = rh_downstream(up, beta, gas);
    const double phi_dn = std::atan2(d.u2, d.u1);
    ShockSolution s;
    s.shock_angle = beta;
    s.deflection = phi_dn - std::atan2(up.u2, up.u1);
    s.upstream = rotated(up, -phi_dn);
    s.downstream = d;
    s.downstream.u2 = 0.0;
    // u1 taken from Bernoulli so that B matches bit-for-bit the value the
    // transport step reconstructs
    s.downstream.u1 = u1_from_bernoulli(bernoulli(s.upstream, gas), 0.0, d.p, d.rho, gas);
    s.k0 = 1.0 / std::tan(beta - s.deflection);
    const FlowRegime r = classify(s.downstream, gas);
    s.branch = r.tag == Regime::supersonic ? Branch::supersonic_weak : Branch::transonic_TS;
    return s;
}

WedgeRoots solve_wedge(const EulerState& up, double theta_w, const GasModel& gas) {
    if (!(theta_w > 0.0)) fail(ErrorKind::domain, "solve_wedge: wedge angle must be positive");
    const auto [theta_d, beta_d] = detachment_point(up, gas);
    if (theta_w >= theta_d) {
        std::ostringstream os;
        os << "solve_wedge: wedge angle " << theta_w * 180.0 / pi
           << " deg at or beyond detachment " << theta_d * 180.0 / pi << " deg";
        fail(ErrorKind::detached, os.str());
    }
    const double mu = mach_angle(up, gas);
    auto f = [&](double b) { return deflection_angle(up, b, gas) - theta_w; };
    const double bw = bisect(f, mu, beta_d);
    const double bs = bisect(f, beta_d, 0.5 * pi);
    WedgeRoots r{make_solution(up, bw, gas), make_solution(up, bs, gas)};
    r.strong.branch = Branch::transonic_TH;
    return r;
}

ShockSolution sonic_point(const EulerState& up, const GasModel& gas) {
    const double mu = mach_angle(up, gas);
    auto margin = [&](double b) {
        const EulerState d = rh_downstream(up, b, gas);
        return sound_speed_sq(d, gas) - d.speed_sq();
    };
    const double b = bisect(margin, mu, 0.5 * pi);
    ShockSolution s = make_solution(up, b, gas);
    s.branch = Branch::transonic_TS;
    return s;
}

std::array<double, 4> eulerian_rh_residuals(const EulerState& l, const EulerState& r,
                                            double slope, const GasModel& gas) {
    auto jump = [](double a, double b) { return b - a; };
    const double mass1 = jump(l.rho * l.u1, r.rho * r.u1) - slope * jump(l.rho * l.u2, r.rho * r.u2);
    const double mom1 = jump(l.rho * l.u1 * l.u1 + l.p, r.rho * r.u1 * r.u1 + r.p) -
                        slope * jump(l.rho * l.u1 * l.u2, r.rho * r.u1 * r.u2);
    const double mom2 = jump(l.rho * l.u1 * l.u2, r.rho * r.u1 * r.u2) -
                        slope * jump(l.rho * l.u2 * l.u2 + l.p, r.rho * r.u2 * r.u2 + r.p);
    const double Bl = bernoulli(l, gas), Br = bernoulli(r, gas);
    const double energy = jump(l.rho * l.u1 * Bl, r.rho * r.u1 * Br) -
                          slope * jump(l.rho * l.u2 * Bl, r.rho * r.u2 * Br);
    return {mass1, mom1, mom2, energy};
}

double lagrangian_shock_slope(const EulerState& l, const EulerState& r) {
    const double dp = r.p - l.p;
    if (std::abs(dp) < 1e-14 * std::max(1.0, std::abs(l.p)))
        fail(ErrorKind::degenerate, "shock slope: vanishing pressure jump");
    return (r.u2 - l.u2) / dp;
}

double jump_G1(const EulerState& l, double w, double p, double rho, double B,
               const GasModel& gas) {
    const double u1 = u1_from_bernoulli(B, w, p, rho, gas);
    const double wl = l.u2 / l.u1;
    return (p - l.p) * (1.0 / (rho * u1) - 1.0 / (l.rho * l.u1)) + (w - wl) * (u1 * w - l.u2);
}

double jump_G2(const EulerState& l, double w, double p, double rho, double B,
               const GasModel& gas) {
    const double u1 = u1_from_bernoulli(B, w, p, rho, gas);
    const double wl = l.u2 / l.u1;
    return (p - l.p) * (u1 + p / (rho * u1) - l.u1 - l.p / (l.rho * l.u1)) +
           (p * w - l.p * wl) * (u1 * w - l.u2);
}

long double jump_G1_ext(const EulerState& l, double w, double p, double rho, long double B,
                        const GasModel& gas) {
    const long double u1 = u1_from_bernoulli_ext(B, w, p, rho, gas);
    const long double lu1 = l.u1, lu2 = l.u2, lp = l.p, lr = l.rho, W = w, P = p, R = rho;
    const long double wl = lu2 / lu1;
    return (P - lp) * (1.0L / (R * u1) - 1.0L / (lr * lu1)) + (W - wl) * (u1 * W - lu2);
}

long double jump_G2_ext(const EulerState& l, double w, double p, double rho, long double B,
                        const GasModel& gas) {
    const long double u1 = u1_from_bernoulli_ext(B, w, p, rho, gas);
    const long double lu1 = l.u1, lu2 = l.u2, lp = l.p, lr = l.rho, W = w, P = p, R = rho;
    const long double wl = lu2 / lu1;
    return (P - lp) * (u1 + P / (R * u1) - lu1 - lp / (lr * lu1)) + (P * W - lp * wl) * (u1 * W - lu2);
}

BoundaryCoeffs jump_gradients(const ShockSolution& bg, const GasModel& gas, const CoeffOptions& opt) {
    const EulerState& up = bg.upstream;
    const EulerState& dn = bg.downstream;
    const double B = bernoulli(up, gas);
    const std::array<double, 3> x0{dn.u2 / dn.u1, dn.p, dn.rho};
    const std::array<double, 3> scale{1.0, dn.p, dn.rho};
    auto G = [&](int i, const std::array<double, 3>& x) {
        return i == 0 ? jump_G1(up, x[0], x[1], x[2], B, gas) : jump_G2(up, x[0], x[1], x[2], B, gas);
    };
    auto central = [&](int i, int j, double h) {
        auto xp = x0, xm = x0;
        xp[j] += h;
        xm[j] -= h;
        return (G(i, xp) - G(i, xm)) / (2.0 * h);
    };

    BoundaryCoeffs c;
    double gap = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double h = opt.rel_step * scale[j];
            const double d1 = central(i, j, h);
            const double d2 = central(i, j, 0.5 * h);
            c.b[i][j] = (4.0 * d2 - d1) / 3.0;
            gap = std::max(gap, std::abs(d1 - d2) / std::max(std::abs(c.b[i][j]), 1e-300));
        }
    }
    c.fd_consistency = gap;

    c.det = c.b[0][0] * c.b[1][2] - c.b[1][0] * c.b[0][2];
    if (std::abs(c.det) < opt.det_tol)
        fail(ErrorKind::degenerate, "boundary_coeffs: degenerate linearization (b11 b23 - b21 b13 ~ 0)");
    c.b1 = (c.b[0][1] * c.b[1][2] - c.b[1][1] * c.b[0][2]) / c.det;
    c.b2 = c.b[0][0] / c.b[0][2];
    c.b3 = c.b[0][1] / c.b[0][2];
    return c;
}

BoundaryCoeffs boundary_coeffs(const ShockSolution& bg, const GasModel& gas,
                               const CoeffOptions& opt) {
    if (bg.branch == Branch::supersonic_weak)
        fail(ErrorKind::regime, "boundary_coeffs: supersonic downstream is not a transonic background");
    const EulerState& dn = bg.downstream;
    const FlowRegime reg = classify(dn, gas);
    if (reg.tag != Regime::subsonic)
        fail(ErrorKind::regime, "boundary_coeffs: downstream state is not subsonic");

    BoundaryCoeffs c = jump_gradients(bg, gas, opt);
    if (std::abs(c.b1) < opt.b1_tol || c.b1 == 0.0) {
        std::ostringstream os;
        os << "boundary_coeffs: |b1| = " << std::abs(c.b1) << " below tangent-point tolerance "
           << opt.b1_tol;
        fail(ErrorKind::tangent_point, os.str());
    }

    // background decomposition constants (u2 = 0)
    const double c2 = sound_speed_sq(dn, gas);
    const double cs = std::sqrt(c2);
    const double u = dn.u1;
    const double root = std::sqrt(c2 - u * u);
    c.lambdaI0 = cs * dn.rho * u / root;
    c.e0 = root / (cs * dn.rho * u * u);

    c.k1 = bg.k0 / (dn.rho * dn.u1);
    c.k2 = c.k1 * c.lambdaI0;
    c.omega_bar = std::atan2(1.0, c.k2);

    const double sgn = c.b1 > 0.0 ? 1.0 : -1.0;
    const double mu1 = c.k2 - c.b1 / c.e0;
    const double mu2 = 1.0 + c.b1 * c.k2 / c.e0;
    const double mn = std::hypot(mu1, mu2);
    c.nu = {sgn * mu1 / mn, sgn * mu2 / mn};
    // outward normal and tangent of the shock edge in the rescaled frame
    const double sw = std::sin(c.omega_bar), cw = std::cos(c.omega_bar);
    c.nu_n = -sw * c.nu[0] + cw * c.nu[1];
    c.nu_t = cw * c.nu[0] + sw * c.nu[1];

    const double a11 = 1.0 / (c.e0 * c.lambdaI0);
    const double a22 = c.lambdaI0 / c.e0;
    const double m1 = c.k1 - c.b1 * a11;
    const double m2 = 1.0 + c.b1 * c.k1 * a22;
    c.mu_z_norm = std::hypot(m1, m2);
    c.nu_z = {sgn * m1 / c.mu_z_norm, sgn * m2 / c.mu_z_norm};
    return c;
}

} // namespace wedge
