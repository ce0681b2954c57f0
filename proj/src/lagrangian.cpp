#include "wedge/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wedge/kernels.hpp"

namespace wedge {

LagrangianFrame make_frame(const ShockSolution& bg) {
    LagrangianFrame f;
    f.k0 = bg.k0;
    f.rho_u_ref = bg.downstream.rho * bg.downstream.u1;
    f.k1 = f.k0 / f.rho_u_ref;
    f.omega0 = std::atan2(1.0, f.k1);
    if (!(f.k1 > 0.0)) fail(ErrorKind::domain, "make_frame: shock slope must be positive");
    return f;
}

double stream_function_constant(const EulerState& s, double x1, double x2) {
    return s.rho * (s.u1 * x2 - s.u2 * x1);
}

std::array<double, 3> lagrange_d1(double x0, double x1, double x2, double t) {
    return {((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2)),
            ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2)),
            ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1))};
}

// ---- grid

WedgeGrid::WedgeGrid(const LagrangianFrame& frame, const GridSpec& s)
    : N(s.N), M(s.M), R(s.R), k1(frame.k1), spec(s) {
    if (N < 8 || M < 8) fail(ErrorKind::domain, "build_grid: N and M must be at least 8");
    if (!(R > 2.0 * k1)) {
        std::ostringstream os;
        os << "build_grid: truncation radius " << R << " too small (need R > 2 k1 = " << 2.0 * k1 << ")";
        fail(ErrorKind::domain, os.str());
    }
    if (!(s.grading >= 1.0)) fail(ErrorKind::domain, "build_grid: grading must be >= 1");
    if (s.far_stretch < 0.0) fail(ErrorKind::domain, "build_grid: far_stretch must be >= 0");

    xi.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        const double sg = std::pow(static_cast<double>(i) / N, s.grading);
        xi[i] = s.far_stretch > 0.0 ? R * std::expm1(s.far_stretch * sg) / std::expm1(s.far_stretch)
                                    : R * sg;
    }
    xi[0] = 0.0;
    xi[N] = R;
    eta.resize(M + 1);
    for (int j = 0; j <= M; ++j) eta[j] = static_cast<double>(j) / M;

    dxi.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        const int f = i == 0 ? 0 : (i == N ? N - 2 : i - 1);
        dxi[i] = {f, lagrange_d1(xi[f], xi[f + 1], xi[f + 2], xi[i])};
    }
    deta.resize(M + 1);
    for (int j = 0; j <= M; ++j) {
        const int f = j == 0 ? 0 : (j == M ? M - 2 : j - 1);
        deta[j] = {f, lagrange_d1(eta[f], eta[f + 1], eta[f + 2], eta[j])};
    }

    m_eta1.assign(size(), 0.0);
    m_eta2.assign(size(), 0.0);
    for (int i = 1; i <= N; ++i)
        for (int j = 0; j <= M; ++j) {
            m_eta1[idx(i, j)] = -eta[j] / xi[i];
            m_eta2[idx(i, j)] = k1 / xi[i];
        }
}

double WedgeGrid::radius(int i, int j) const { return std::hypot(z1(i, j), z2(i, j)); }

std::vector<double> WedgeGrid::trace_z2() const {
    std::vector<double> t(N + 1);
    for (int i = 0; i <= N; ++i) t[i] = xi[i] / k1;
    return t;
}

Gradient mapped_gradient(const WedgeGrid& g, std::span<const double> v) {
    Gradient out;
    out.dz1.assign(g.size(), 0.0);
    out.dz2.assign(g.size(), 0.0);
    const int M = g.M;
    kernels::for_range(static_cast<std::size_t>(g.N), [&](std::size_t c) {
        const int i = static_cast<int>(c) + 1;
        const auto& sx = g.dxi[i];
        for (int j = 0; j <= M; ++j) {
            const auto& se = g.deta[j];
            double vx = 0.0, ve = 0.0;
            for (int k = 0; k < 3; ++k) {
                vx += sx.w[k] * v[g.idx(sx.first + k, j)];
                ve += se.w[k] * v[g.idx(i, se.first + k)];
            }
            const std::size_t n = g.idx(i, j);
            out.dz1[n] = vx + g.m_eta1[n] * ve;
            out.dz2[n] = g.m_eta2[n] * ve;
        }
    });
    for (int j = 0; j <= M; ++j) {
        out.dz1[g.idx(0, j)] = out.dz1[g.idx(1, j)];
        out.dz2[g.idx(0, j)] = out.dz2[g.idx(1, j)];
    }
    return out;
}

// ---- interpolation

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) fail(ErrorKind::domain, "Pchip: need at least two matching samples");
    for (std::size_t k = 1; k < n; ++k)
        if (!(x_[k] > x_[k - 1])) fail(ErrorKind::domain, "Pchip: abscissae must increase");
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x_[k + 1] - x_[k];
        d[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    m_.assign(n, 0.0);
    if (n == 2) {
        m_[0] = m_[1] = d[0];
        return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (d[k - 1] * d[k] > 0.0) {
            const double w1 = 2.0 * h[k] + h[k - 1];
            const double w2 = h[k] + 2.0 * h[k - 1];
            m_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    // one-sided three-point end slopes, limited
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0)
            m = 0.0;
        else if (d0 * d1 <= 0.0 && std::abs(m) > std::abs(3.0 * d0))
            m = 3.0 * d0;
        return m;
    };
    m_[0] = end_slope(h[0], h[1], d[0], d[1]);
    m_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

double Pchip::operator()(double t) const {
    const std::size_t n = x_.size();
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    const std::size_t kk = std::min(k, n - 2);
    const double h = x_[kk + 1] - x_[kk];
    const double s = (t - x_[kk]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h11 = s3 - s2;
    // written around y_k so constant data is reproduced exactly
    return y_[kk] + h01 * (y_[kk + 1] - y_[kk]) + h * (h10 * m_[kk] + h11 * m_[kk + 1]);
}

double interp_linear(std::span<const double> x, std::span<const double> y, double t) {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
    const double s = (t - x[k]) / (x[k + 1] - x[k]);
    return y[k] + s * (y[k + 1] - y[k]);
}

double sample_bilinear(const WedgeGrid& g, std::span<const double> v, double z1, double z2) {
    if (!(z1 > 0.0) || z1 > g.R * (1.0 + 1e-12) || z2 < -1e-12 || g.k1 * z2 > z1 * (1.0 + 1e-12))
        fail(ErrorKind::domain, "sample_bilinear: point outside the truncated domain");
    const double e = std::clamp(g.k1 * z2 / z1, 0.0, 1.0);
    const double x = std::min(z1, g.R);
    int i = static_cast<int>(std::upper_bound(g.xi.begin(), g.xi.end(), x) - g.xi.begin()) - 1;
    i = std::clamp(i, 0, g.N - 1);
    int j = std::clamp(static_cast<int>(e * g.M), 0, g.M - 1);
    const double s = (x - g.xi[i]) / (g.xi[i + 1] - g.xi[i]);
    const double t = (e - g.eta[j]) * g.M;
    return (1 - s) * (1 - t) * v[g.idx(i, j)] + s * (1 - t) * v[g.idx(i + 1, j)] +
           (1 - s) * t * v[g.idx(i, j + 1)] + s * t * v[g.idx(i + 1, j + 1)];
}

// ---- shock curve

std::vector<double> integrate_trapezoid(std::span<const double> x, std::span<const double> f,
                                        double f0) {
    std::vector<double> F(x.size());
    if (x.empty()) return F;
    F[0] = f0;
    for (std::size_t k = 1; k < x.size(); ++k)
        F[k] = F[k - 1] + 0.5 * (x[k] - x[k - 1]) * (f[k] + f[k - 1]);
    return F;
}

std::vector<double> differentiate_trapezoid(std::span<const double> x, std::span<const double> F,
                                            double slope0) {
    std::vector<double> f(x.size());
    if (x.empty()) return f;
    f[0] = slope0;
    for (std::size_t k = 1; k < x.size(); ++k)
        f[k] = 2.0 * (F[k] - F[k - 1]) / (x[k] - x[k - 1]) - f[k - 1];
    return f;
}

ShockCurve::ShockCurve(std::vector<double> z2, std::vector<double> dsp, double k1)
    : z2_(std::move(z2)), dsp_(std::move(dsp)), k1_(k1) {
    if (z2_.size() != dsp_.size() || z2_.size() < 2)
        fail(ErrorKind::domain, "ShockCurve: sample size mismatch");
    if (z2_.front() != 0.0) fail(ErrorKind::domain, "ShockCurve: samples must start at z2 = 0");
    ds_ = integrate_trapezoid(z2_, dsp_, 0.0);
}

double ShockCurve::dsigma_prime_at(double t) const {
    if (z2_.empty()) return 0.0;
    return interp_linear(z2_, dsp_, t);
}

double ShockCurve::dsigma_at(double t) const {
    if (z2_.empty() || t <= 0.0) return 0.0;
    if (t >= z2_.back()) return ds_.back() + (t - z2_.back()) * dsp_.back();
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(z2_.begin(), z2_.end(), t) - z2_.begin()) - 1;
    const double h = t - z2_[k];
    const double slope = (dsp_[k + 1] - dsp_[k]) / (z2_[k + 1] - z2_[k]);
    return ds_[k] + h * (dsp_[k] + 0.5 * slope * h);
}

ShockSamples reconstruct_shock(const ShockCurve& shock, const LagrangianFrame& frame) {
    ShockSamples s;
    s.y2 = shock.z2();
    s.y1.resize(s.y2.size());
    for (std::size_t k = 0; k < s.y2.size(); ++k) {
        if (!(frame.k1 + shock.dsigma_prime()[k] > 0.0)) {
            std::ostringstream os;
            os << "reconstruct_shock: fold-over at y2 = " << s.y2[k];
            fail(ErrorKind::fold_over, os.str());
        }
        s.y1[k] = frame.k1 * s.y2[k] + shock.dsigma()[k];
    }
    return s;
}

} // namespace wedge
