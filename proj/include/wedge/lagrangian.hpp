#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "wedge/shock_polar.hpp"

namespace wedge {

struct LagrangianFrame {
    double k1 = 0.0;
    double k0 = 0.0;
    double rho_u_ref = 0.0; // rho0+ u10+
    double omega0 = 0.0;    // corner angle of D in the z-plane
};

LagrangianFrame make_frame(const ShockSolution& background);

// psi for a constant state, psi(0) = 0
double stream_function_constant(const EulerState& s, double x1, double x2);

struct GridSpec {
    double R = 100.0;
    int N = 128;
    int M = 64;
    double grading = 2.0;
    // 0 keeps xi = R s^grading; > 0 adds exponential stretching toward R
    double far_stretch = 0.0;
};

// Logically rectangular grid on (xi, eta) in (0, R] x [0, 1] with
// z1 = xi, z2 = eta xi / k1. Column i = 0 is the corner: all its nodes are
// the same point and carry the same value.
class WedgeGrid {
public:
    WedgeGrid(const LagrangianFrame& frame, const GridSpec& spec);

    int N = 0, M = 0;
    double R = 0.0, k1 = 0.0;
    GridSpec spec;
    std::vector<double> xi;  // N+1
    std::vector<double> eta; // M+1

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * (M + 1) + j; }
    std::size_t size() const { return static_cast<std::size_t>(N + 1) * (M + 1); }
    double z1(int i, int /*j*/) const { return xi[i]; }
    double z2(int i, int j) const { return eta[j] * xi[i] / k1; }
    double radius(int i, int j) const;
    double d_eta() const { return 1.0 / M; }

    // three-point derivative stencils; first index of the stencil and weights
    struct Stencil {
        int first = 0;
        std::array<double, 3> w{};
    };
    std::vector<Stencil> dxi;  // per i
    std::vector<Stencil> deta; // per j
    // chain rule: d/dz1 = d/dxi + m_eta1 d/deta, d/dz2 = m_eta2 d/deta
    std::vector<double> m_eta1; // per node, -eta/xi (0 on the corner column)
    std::vector<double> m_eta2; // per node, k1/xi

    // shock trace coordinates z2 = xi / k1 at eta = 1
    std::vector<double> trace_z2() const;
};

// Three-point derivative weights at x[c] using x[f], x[f+1], x[f+2].
std::array<double, 3> lagrange_d1(double x0, double x1, double x2, double at);

struct Gradient {
    std::vector<double> dz1;
    std::vector<double> dz2;
};

// Discrete mapped gradient. The corner column copies column 1.
Gradient mapped_gradient(const WedgeGrid& g, std::span<const double> v);

// ---- one-dimensional interpolation

// Fritsch-Carlson monotone cubic
class Pchip {
public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;
    const std::vector<double>& x() const { return x_; }

private:
    std::vector<double> x_, y_, m_;
};

double interp_linear(std::span<const double> x, std::span<const double> y, double t);

// bilinear sample of a grid field at (z1, z2) inside the truncated domain
double sample_bilinear(const WedgeGrid& g, std::span<const double> v, double z1, double z2);

// ---- shock curve

class ShockCurve {
public:
    ShockCurve() = default;
    ShockCurve(std::vector<double> z2, std::vector<double> dsigma_prime, double k1);

    const std::vector<double>& z2() const { return z2_; }
    const std::vector<double>& dsigma_prime() const { return dsp_; }
    const std::vector<double>& dsigma() const { return ds_; }
    double k1() const { return k1_; }

    // piecewise-linear slope, integrated exactly (consistent with trapezoid)
    double dsigma_prime_at(double z2) const;
    double dsigma_at(double z2) const;

private:
    std::vector<double> z2_, dsp_, ds_;
    double k1_ = 0.0;
};

std::vector<double> integrate_trapezoid(std::span<const double> x, std::span<const double> f,
                                        double f0 = 0.0);
// exact inverse of integrate_trapezoid given the first slope sample
std::vector<double> differentiate_trapezoid(std::span<const double> x, std::span<const double> F,
                                            double slope0);

struct ShockSamples {
    std::vector<double> y2;
    std::vector<double> y1; // sigma(y2) = k1 y2 + dsigma(y2)
};

ShockSamples reconstruct_shock(const ShockCurve& shock, const LagrangianFrame& frame);

// U(y) -> U(z1 + dsigma(z2), z2)
template <class F>
auto shift_to_z(F field, ShockCurve shock) {
    return [field = std::move(field), shock = std::move(shock)](double z1, double z2) {
        return field(z1 + shock.dsigma_at(z2), z2);
    };
}

} // namespace wedge
