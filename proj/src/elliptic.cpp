#include "wedge/elliptic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace wedge {

EllipticProblem EllipticProblem::laplace(const WedgeGrid& g) {
    EllipticProblem p;
    p.grid = &g;
    p.a11.assign(g.size(), 1.0);
    p.a12.assign(g.size(), 0.0);
    p.a22.assign(g.size(), 1.0);
    p.g5.assign(g.N + 1, 0.0);
    p.g6.assign(g.N + 1, 0.0);
    p.gR.assign(g.M + 1, 0.0);
    return p;
}

const char* to_string(LinearMethod m) {
    switch (m) {
    case LinearMethod::direct: return "direct";
    case LinearMethod::krylov: return "krylov";
    case LinearMethod::dense: return "dense";
    }
    return "unknown";
}

LinearMethod linear_method_from_string(const std::string& s) {
    if (s == "direct") return LinearMethod::direct;
    if (s == "krylov") return LinearMethod::krylov;
    if (s == "dense") return LinearMethod::dense;
    fail(ErrorKind::validation, "unknown linear method '" + s + "'");
}

std::size_t unknown_index(const WedgeGrid& g, int i, int j) {
    return i == 0 ? 0 : 1 + static_cast<std::size_t>(i - 1) * (g.M + 1) + j;
}

std::size_t unknown_count(const WedgeGrid& g) {
    return 1 + static_cast<std::size_t>(g.N) * (g.M + 1);
}

std::vector<double> to_unknowns(const WedgeGrid& g, std::span<const double> v) {
    std::vector<double> x(unknown_count(g));
    x[0] = v[g.idx(0, 0)];
    for (int i = 1; i <= g.N; ++i)
        for (int j = 0; j <= g.M; ++j) x[unknown_index(g, i, j)] = v[g.idx(i, j)];
    return x;
}

std::vector<double> to_nodes(const WedgeGrid& g, std::span<const double> x) {
    std::vector<double> v(g.size());
    for (int i = 0; i <= g.N; ++i)
        for (int j = 0; j <= g.M; ++j) v[g.idx(i, j)] = x[unknown_index(g, i, j)];
    return v;
}

void check_ellipticity(const EllipticProblem& p) {
    const WedgeGrid& g = *p.grid;
    double worst = INFINITY;
    std::size_t at = 0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double det = p.a11[n] * p.a22[n] - p.a12[n] * p.a12[n];
        const double scale = std::abs(p.a11[n] * p.a22[n]) + 1e-300;
        double q = det / scale;
        if (!(p.a11[n] > 0.0) || !std::isfinite(det)) q = -INFINITY;
        if (q < worst) {
            worst = q;
            at = n;
        }
    }
    if (!(worst > 1e-14)) {
        std::ostringstream os;
        os << "assemble: ellipticity violated at node (i=" << at / (g.M + 1) << ", j=" << at % (g.M + 1)
           << "): a11=" << p.a11[at] << " a12=" << p.a12[at] << " a22=" << p.a22[at];
        fail(ErrorKind::ellipticity, os.str());
    }
}

namespace {

struct RowEntry {
    int i, j;
    double w;
};

// Interior finite-volume row: returns up to 9 stencil weights.
std::array<RowEntry, 9> interior_row(const EllipticProblem& p, int i, int j) {
    const WedgeGrid& g = *p.grid;
    const double k1 = g.k1;
    const double de = g.d_eta();
    const double x = g.xi[i], xm = g.xi[i - 1], xp = g.xi[i + 1];
    const double fw = 0.5 * (xm + x), fe = 0.5 * (x + xp);
    const double dc = fe - fw;
    const double e = g.eta[j];

    auto A = [&](int ii, int jj, int c) {
        const std::size_t n = g.idx(ii, jj);
        return c == 0 ? p.a11[n] : (c == 1 ? p.a12[n] : p.a22[n]);
    };
    auto face = [&](int i0, int j0, int i1, int j1, int c) { return 0.5 * (A(i0, j0, c) + A(i1, j1, c)); };

    // stencil slots: (di, dj) in {-1,0,1}^2, slot = (di+1)*3 + (dj+1)
    std::array<double, 9> w{};
    auto add = [&](int di, int dj, double v) { w[(di + 1) * 3 + (dj + 1)] += v; };

    // east and west faces: P = xi a11 v_xi + (k1 a12 - eta a11) v_eta
    for (int s : {1, -1}) {
        const double a11 = face(i, j, i + s, j, 0), a12 = face(i, j, i + s, j, 1);
        const double xf = s > 0 ? fe : fw;
        const double h = s > 0 ? (xp - x) : (x - xm);
        const double cross = (k1 * a12 - e * a11) / (4.0 * de);
        const double sign = s / dc; // +P_E - P_W
        // xi a11 (v_{i+s} - v_i) / (s h)
        add(s, 0, sign * xf * a11 / (s * h));
        add(0, 0, -sign * xf * a11 / (s * h));
        for (int di : {0, s}) {
            add(di, 1, sign * cross);
            add(di, -1, -sign * cross);
        }
    }
    // north and south faces: Q = (k1 a12 - eta a11) v_xi + c22 / xi v_eta
    for (int s : {1, -1}) {
        const double a11 = face(i, j, i, j + s, 0), a12 = face(i, j, i, j + s, 1), a22 = face(i, j, i, j + s, 2);
        const double ef = e + 0.5 * s * de;
        const double cross = (k1 * a12 - ef * a11) / (2.0 * (xp - xm));
        const double c22 = (ef * ef * a11 - 2.0 * ef * k1 * a12 + k1 * k1 * a22) / x;
        const double sign = s / de;
        add(0, s, sign * c22 / (s * de));
        add(0, 0, -sign * c22 / (s * de));
        for (int dj : {0, s}) {
            add(1, dj, sign * cross);
            add(-1, dj, -sign * cross);
        }
    }
    std::array<RowEntry, 9> out{};
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) out[(di + 1) * 3 + (dj + 1)] = {i + di, j + dj, w[(di + 1) * 3 + (dj + 1)]};
    return out;
}

} // namespace

LinearSystem assemble(const EllipticProblem& p, kernels::Backend be) {
    if (!p.grid) fail(ErrorKind::domain, "assemble: problem has no grid");
    const WedgeGrid& g = *p.grid;
    check_ellipticity(p);
    const int N = g.N, M = g.M;
    const std::size_t n = unknown_count(g);
    const bool has_f = !p.f.empty();

    // rows are built per column in parallel, then stitched in order
    struct ColRows {
        std::vector<std::array<std::pair<int, double>, 9>> rows;
        std::vector<int> len;
        std::vector<double> rhs;
    };
    std::vector<ColRows> cols(N + 1);
    kernels::for_range(static_cast<std::size_t>(N + 1), [&](std::size_t ci) {
        const int i = static_cast<int>(ci);
        ColRows& cr = cols[ci];
        const int nrows = i == 0 ? 1 : M + 1;
        cr.rows.resize(nrows);
        cr.len.assign(nrows, 0);
        cr.rhs.assign(nrows, 0.0);
        auto put = [&](int r, int ii, int jj, double v) {
            const int c = static_cast<int>(unknown_index(g, ii, jj));
            auto& row = cr.rows[r];
            for (int k = 0; k < cr.len[r]; ++k)
                if (row[k].first == c) {
                    row[k].second += v;
                    return;
                }
            row[cr.len[r]++] = {c, v};
        };
        if (i == 0) {
            put(0, 0, 0, 1.0);
            cr.rhs[0] = p.g5[0];
            return;
        }
        for (int j = 0; j <= M; ++j) {
            if (j == 0) {
                put(j, i, j, 1.0);
                cr.rhs[j] = p.g5[i];
            } else if (i == N) {
                put(j, i, j, 1.0);
                cr.rhs[j] = p.gR[j];
            } else if (j == M) {
                if (p.edge == EdgeCondition::dirichlet) {
                    put(j, i, j, 1.0);
                } else {
                    const double nu1 = p.nu[0], nu2 = p.nu[1];
                    const auto& sx = g.dxi[i];
                    const auto& se = g.deta[M];
                    const double ce = (nu2 * g.k1 - nu1) / g.xi[i];
                    for (int k = 0; k < 3; ++k) put(j, sx.first + k, M, nu1 * sx.w[k]);
                    for (int k = 0; k < 3; ++k) put(j, i, se.first + k, ce * se.w[k]);
                }
                cr.rhs[j] = p.g6[i];
            } else {
                for (const RowEntry& e : interior_row(p, i, j))
                    if (e.w != 0.0) put(j, e.i, e.j, e.w);
                cr.rhs[j] = has_f ? g.xi[i] * p.f[g.idx(i, j)] : 0.0;
            }
        }
    }, be);

    LinearSystem s;
    s.rhs.reserve(n);
    for (int i = 0; i <= N; ++i)
        for (std::size_t r = 0; r < cols[i].rows.size(); ++r) {
            for (int k = 0; k < cols[i].len[r]; ++k) s.A.add(cols[i].rows[r][k].first, cols[i].rows[r][k].second);
            s.A.end_row();
            s.rhs.push_back(cols[i].rhs[r]);
        }
    return s;
}

std::vector<double> discrete_residual(const EllipticProblem& p, std::span<const double> v) {
    const LinearSystem s = assemble(p);
    const std::vector<double> x = to_unknowns(*p.grid, v);
    std::vector<double> y(s.A.n);
    s.A.multiply(x, y);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] -= s.rhs[k];
    return to_nodes(*p.grid, y);
}

std::pair<std::vector<double>, LinearSolveReport> solve(const EllipticProblem& p,
                                                        const SolveOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    LinearSystem s = assemble(p, opt.backend);
    const WedgeGrid& g = *p.grid;
    // row equilibration: rows near the corner carry 1/xi sized coefficients
    kernels::for_range(s.A.n, [&](std::size_t r) {
        double m = 0.0;
        for (std::size_t k = s.A.row_ptr[r]; k < s.A.row_ptr[r + 1]; ++k) m = std::max(m, std::abs(s.A.val[k]));
        if (m > 0.0) {
            for (std::size_t k = s.A.row_ptr[r]; k < s.A.row_ptr[r + 1]; ++k) s.A.val[k] /= m;
            s.rhs[r] /= m;
        }
    }, opt.backend);
    LinearSolveReport rep;
    std::vector<double> x;
    const double bnorm = kernels::norm2(s.rhs, opt.backend);

    auto direct = [&] {
        BandedLU lu(s.A, s.A.lower_bandwidth(), s.A.upper_bandwidth());
        x = lu.solve(s.rhs);
    };
    switch (opt.method) {
    case LinearMethod::direct:
        direct();
        rep.method = "banded_lu";
        break;
    case LinearMethod::dense: {
        DenseLU lu(s.A);
        x = lu.solve(s.rhs);
        rep.method = "dense_lu";
        break;
    }
    case LinearMethod::krylov: {
        x.assign(s.A.n, 0.0);
        Ilu0 prec(s.A);
        KrylovOptions ko = opt.krylov;
        ko.tol = opt.tol;
        const KrylovResult kr = gmres(s.A, s.rhs, x, prec, ko, opt.backend);
        rep.iterations = kr.iterations;
        rep.method = "gmres_ilu0";
        if (!kr.converged) {
            direct();
            rep.method = "gmres_ilu0+banded_lu";
            rep.fallback = true;
        }
        break;
    }
    }
    const double rn = residual_norm(s.A, x, s.rhs, opt.backend);
    rep.residual = bnorm > 0.0 ? rn / bnorm : rn;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!(rep.residual <= std::max(opt.tol, 1e-12))) {
        std::ostringstream os;
        os << "elliptic solve (" << rep.method << "): residual " << rep.residual << " above tolerance " << opt.tol;
        fail(ErrorKind::solver, os.str());
    }
    return {to_nodes(g, x), rep};
}

CornerFit corner_exponent(std::span<const double> v, const WedgeGrid& g, double r_lo, double r_hi) {
    CornerFit fit;
    if (r_lo < 0.0) r_lo = 2.0 * g.xi[1];
    const double v0 = v[g.idx(0, 0)];
    double vmax = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) vmax = std::max(vmax, std::abs(v[n] - v0));
    if (!(vmax > 1e-14 * (1.0 + std::abs(v0)))) {
        fit.rejected = true;
        fit.reason = "zero variation";
        return fit;
    }
    // per-ray centring of log values removes the intercepts
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    int rays = 0;
    for (int j = 0; j <= g.M; ++j) {
        std::vector<double> lx, ly;
        for (int i = 1; i <= g.N; ++i) {
            const double r = g.radius(i, j);
            if (r < r_lo || r > r_hi) continue;
            const double d = std::abs(v[g.idx(i, j)] - v0);
            if (!(d > 1e-300)) continue;
            lx.push_back(std::log(r));
            ly.push_back(std::log(d));
        }
        if (lx.size() < 3) continue;
        ++rays;
        double mx = 0.0, my = 0.0;
        for (std::size_t k = 0; k < lx.size(); ++k) {
            mx += lx[k];
            my += ly[k];
        }
        mx /= lx.size();
        my /= lx.size();
        for (std::size_t k = 0; k < lx.size(); ++k) {
            sxx += (lx[k] - mx) * (lx[k] - mx);
            sxy += (lx[k] - mx) * (ly[k] - my);
            syy += (ly[k] - my) * (ly[k] - my);
        }
        fit.points += static_cast<int>(lx.size());
    }
    if (rays == 0 || fit.points < 4 || !(sxx > 0.0))
        fail(ErrorKind::domain, "corner_exponent: insufficient nodes in fit window");
    fit.exponent = sxy / sxx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

} // namespace wedge
