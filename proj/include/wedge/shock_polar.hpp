#pragma once

#include <array>
#include <utility>

#include "wedge/gas.hpp"

namespace wedge {

enum class Branch { supersonic_weak, transonic_TS, transonic_TH };

const char* to_string(Branch b);

// A straight oblique shock. Produced by solve_wedge / sonic_point in the
// rotated frame where the downstream flow is horizontal and the shock line
// reads x1 = k0 x2.
struct ShockSolution {
    EulerState upstream;
    EulerState downstream;
    double shock_angle = 0.0; // between shock line and upstream velocity
    double k0 = 0.0;
    Branch branch = Branch::transonic_TS;
    double deflection = 0.0;
};

struct WedgeRoots {
    ShockSolution weak;
    ShockSolution strong;
};

struct BoundaryCoeffs {
    // b[i][j] = dG_{i+1}/d(w, p, rho)_j at the background pair
    std::array<std::array<double, 3>, 2> b{};
    double det = 0.0; // b11 b23 - b21 b13
    double b1 = 0.0, b2 = 0.0, b3 = 0.0;
    double e0 = 0.0, lambdaI0 = 0.0;
    double k1 = 0.0, k2 = 0.0;
    // oblique direction in the rescaled isotropic frame, unit, nu_n > 0
    std::array<double, 2> nu{};
    double nu_n = 0.0, nu_t = 0.0;
    double omega_bar = 0.0; // corner angle in the rescaled frame
    // same direction expressed in the computational z-plane (unit)
    std::array<double, 2> nu_z{};
    double mu_z_norm = 0.0;
    // max relative gap between the h and h/2 central differences
    double fd_consistency = 0.0;
};

struct CoeffOptions {
    double b1_tol = 0.0;
    double det_tol = 1e-12;
    double rel_step = 1e-6;
};

EulerState rh_downstream(const EulerState& upstream, double shock_angle, const GasModel& gas);
double deflection_angle(const EulerState& upstream, double shock_angle, const GasModel& gas);
double mach_angle(const EulerState& upstream, const GasModel& gas);

// returns (max deflection, shock angle where attained)
std::pair<double, double> detachment_point(const EulerState& upstream, const GasModel& gas);
double detachment_angle(const EulerState& upstream, const GasModel& gas);

WedgeRoots solve_wedge(const EulerState& upstream, double theta_w, const GasModel& gas);
ShockSolution sonic_point(const EulerState& upstream, const GasModel& gas);

// Build a rotated-frame solution for an explicit shock angle.
ShockSolution make_solution(const EulerState& upstream, double shock_angle, const GasModel& gas);

// Eulerian jump residuals of the straight shock x1 = slope*x2 (rotated frame).
std::array<double, 4> eulerian_rh_residuals(const EulerState& left, const EulerState& right,
                                            double slope, const GasModel& gas);

// Lagrangian shock functionals with u1 eliminated through Bernoulli. bar = (w, p, rho).
double jump_G1(const EulerState& left, double w, double p, double rho, double B,
               const GasModel& gas);
double jump_G2(const EulerState& left, double w, double p, double rho, double B,
               const GasModel& gas);
long double jump_G1_ext(const EulerState& left, double w, double p, double rho, long double B,
                        const GasModel& gas);
long double jump_G2_ext(const EulerState& left, double w, double p, double rho, long double B,
                        const GasModel& gas);
// slope of the shock in Lagrangian coordinates from RH3: [u2]/[p]
double lagrangian_shock_slope(const EulerState& left, const EulerState& right);

// b-matrix, det, b1..b3 only; no regime or tangent checks
BoundaryCoeffs jump_gradients(const ShockSolution& background, const GasModel& gas,
                              const CoeffOptions& opt = {});
BoundaryCoeffs boundary_coeffs(const ShockSolution& background, const GasModel& gas,
                               const CoeffOptions& opt = {});

// background upstream with p = rho = 1 and horizontal velocity
EulerState uniform_upstream(double mach_number, const GasModel& gas);

} // namespace wedge
