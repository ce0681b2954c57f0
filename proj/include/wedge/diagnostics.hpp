#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "wedge/free_boundary.hpp"

namespace wedge {

// residuals are measured away from the corner and the truncation line
struct ResidualWindow {
    double r_min = 1.0;        // |z| >= r_min
    double xi_max_frac = 0.9;  // xi <= frac * R
};

struct ResidualNorms {
    double sup = 0.0;
    double l2 = 0.0;       // area-weighted RMS over the window
    double weighted = 0.0; // sup (1 + |z|)^2 |r|
};

// Lagrangian Euler equations (mass, two momenta, Bernoulli) in divergence form,
// pulled back to the computational plane through the shock shift
std::array<ResidualNorms, 4> euler_residuals(const WedgeProblem& pb, const IterationField& v,
                                             const ResidualWindow& win = {});

struct JumpNorms {
    double sup = 0.0;
    double l2 = 0.0; // RMS over trace samples
};

// Lagrangian jump conditions along the computed shock, U- taken at the shifted points
std::array<JumpNorms, 4> rh_residuals(const WedgeProblem& pb, const IterationField& v);

// ---- decay fits

enum class FitPath { ray, streamline, column, profile };
const char* to_string(FitPath p);

struct DecayFit {
    std::string field;
    FitPath path = FitPath::ray;
    double where = 0.0; // ray angle (rad), streamline z2, column xi; unused for profiles
    double exponent = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int points = 0;
    double lo = 0.0, hi = 0.0; // fit window in the path variable
};

struct FitWindow {
    double lo = -1.0; // negative: 10 R / N
    double hi = -1.0; // negative: 0.9 R (rays, streamlines) or 0.9 xi / k1 (columns)
    // streamline_fit uses R / 4 for a negative lo
    int samples = 40;
};

// least-squares slope of log|f - limit| against log(1 + s), where s is |z| on
// a ray and z2 on a column. Zero samples are skipped. Bilinear samples mix
// streamlines far out, so streamline paths are refused here.
DecayFit decay_fit(std::span<const double> field, const WedgeGrid& g, FitPath path, double where,
                   const FitWindow& win = {}, std::span<const double> limit = {});

// drho or du1 along the exact streamline z2: the state is rebuilt from the
// transported entropy and Bernoulli values at its foot and the pressure and
// flow angle sampled there, so neighbouring streamlines never mix. The default
// window is the far part [R/4, 0.9 R] of the streamline.
DecayFit streamline_fit(const WedgeProblem& pb, const IterationField& v, const TransportResult& tr,
                        const std::string& field, double z2, const FitWindow& win = {});

// straight least squares through (x, y); throws ErrorKind::domain for fewer than 3 points
DecayFit fit_power_law(std::span<const double> s, std::span<const double> f);

// ---- far field

struct FarField {
    std::vector<double> z2;     // trace abscissae
    std::vector<double> rho_inf;
    std::vector<double> u1_inf;
    std::vector<double> column_xi;
    std::vector<double> rho_gap; // per column sup_j |rho - rho_inf|
    std::vector<double> u1_gap;
    DecayFit rho_rate, u1_rate;       // gap decay in xi
    DecayFit rho_profile, u1_profile; // limit minus background against z2
};

FarField farfield_limits(const WedgeProblem& pb, const IterationField& v, const TransportResult& tr);

// ---- weighted norms

struct WeightSpec {
    bool corner = false; // include the corner distance factor
    bool wall = false;   // include the wall distance factor
    double gamma1 = 0.0, gamma2 = 0.0;
    double tau = 0.0, l = 0.0;
};

// discrete analogue of the weighted sup norm at derivative order k in {0, 1}
double weighted_sup_norm(std::span<const double> field, const WedgeGrid& g, const WeightSpec& w, int k);

// ---- upstream

// Lagrangian Euler residual of the prescribed upstream state, sampled in the
// supersonic region by central differences
std::array<double, 4> upstream_residuals(const WedgeProblem& pb, int samples = 24);

// ---- report

struct WeightedNormEntry {
    std::string field;
    double k0 = 0.0, k1 = 0.0;
};

struct DiagnosticsReport {
    int N = 0, M = 0;
    double R = 0.0;
    ResidualWindow window;
    std::array<ResidualNorms, 4> euler{};
    std::array<JumpNorms, 4> rh{};
    std::array<double, 4> upstream{};
    double consistency_full = 0.0;   // sup over the whole trace
    double consistency_window = 0.0; // sup over trace samples with |z| >= r_min
    double dw_sup = 0.0;
    std::vector<DecayFit> fits;
    CornerFit corner_w, corner_p;
    FarField farfield;
    std::vector<WeightedNormEntry> weighted;
    double min_margin = 0.0;
    std::vector<IterationRecord> history;
    FixedPointStatus status = FixedPointStatus::max_iterations;
    double residual = 0.0;
    double wall_time = 0.0;
    double b1 = 0.0, det = 0.0, b13 = 0.0, nu_n = 0.0, nu_t = 0.0, k1 = 0.0;
    std::string branch;
};

// ray angles used for fits, as fractions of the corner angle
inline constexpr std::array<double, 3> ray_fractions{0.25, 0.5, 0.75};
// streamlines used for fits
inline constexpr std::array<double, 3> streamline_levels{1.0, 5.0, 10.0};

DiagnosticsReport diagnose(const WedgeProblem& pb, const FixedPointResult& run,
                           const ResidualWindow& win = {});

// find a fit in a report; throws ErrorKind::domain when absent
const DecayFit& find_fit(const DiagnosticsReport& r, const std::string& field, FitPath path, double where);

} // namespace wedge
