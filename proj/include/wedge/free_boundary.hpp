#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wedge/elliptic.hpp"
#include "wedge/lagrangian.hpp"
#include "wedge/shock_polar.hpp"
#include "wedge/upstream.hpp"

namespace wedge {

// ---- local decomposition of the linearized system

struct DecompCoeffs {
    double lambdaR = 0.0;
    double lambdaI = 0.0;
    double e = 0.0;
};

// Requires a subsonic state with u1 > 0 (ErrorKind::regime otherwise).
DecompCoeffs decomp_coeffs(const EulerState& s, const GasModel& gas);

struct EllipticCoeffs {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;
};

// second-order coefficients for the flow-angle equation at a state with local
// shock-slope perturbation dsp (extended into the domain along z2)
EllipticCoeffs elliptic_coeffs(const DecompCoeffs& d, double dsp);

// ---- problem description

struct SolverSpec {
    LinearMethod linear_method = LinearMethod::direct;
    double linear_tol = 1e-10;
    double tol = 1e-9;
    int max_iter = 50;
    double damping = 1.0;
    double damping_floor = 0.125;
    int divergence_window = 5;
    // Dirichlet data on the far line: "wall" continues b'(R), "zero" uses 0
    std::string truncation = "wall";
    double norm_beta = 0.5;
    // tangent guard relative to |b1| at the sonic point
    double b1_guard = 1e-3;
    double max_amplitude = 0.1;
};

struct ProblemSpec {
    double gamma = 1.4;
    double mach = 2.0;
    double wedge_angle_deg = 22.85;
    std::string branch = "weak"; // weak | strong
    PerturbationSpec upstream;
    WedgeSpec wedge;
    GridSpec grid;
    SolverSpec solver;
};

void validate(const ProblemSpec& spec);

class WedgeProblem {
public:
    explicit WedgeProblem(const ProblemSpec& spec);

    ProblemSpec spec;
    GasModel gas;
    ShockSolution background;
    LagrangianFrame frame;
    WedgeGrid grid;
    BoundaryCoeffs coeffs;
    double b1_sonic = 0.0; // |b1| at the sonic point of the same polar
    double decay = 1.5;    // exponent shared by upstream and wedge data
    UpstreamModel upstream;
    WedgeBoundary wedge;

    bool strong() const { return spec.branch == "strong"; }
    double eps() const { return spec.upstream.amplitude; }
    // background downstream state in the rotated frame
    const EulerState& base() const { return background.downstream; }
    double base_shock_slope() const { return base_slope_; }

private:
    double base_slope_ = 0.0;
};

// ---- iterates

// Perturbation of the downstream state from the background plus the shock
// slope perturbation sampled on the trace (eta = 1, z2 = xi / k1).
struct IterationField {
    std::vector<double> du1, drho, dw, dp; // per node
    std::vector<double> dsigma_prime;      // per i
    int sweep = 0;
    double damping = 1.0;

    static IterationField zero(const WedgeGrid& g);
    EulerState state(const WedgeProblem& pb, std::size_t n) const;
};

double weighted_norm(const WedgeProblem& pb, const IterationField& v);
double weighted_distance(const WedgeProblem& pb, const IterationField& a, const IterationField& b);

// ---- pieces of one application of the iteration map

struct BoundaryData {
    std::vector<double> g1, g2, g3, g4; // per trace sample
    std::vector<double> g3_prime;       // d g3 / d z2 along the trace
    std::vector<double> g7;             // modified oblique data
    std::vector<EulerState> upstream;   // U- at the shifted shock points
    std::vector<double> bernoulli;      // B carried by each streamline
};

// g terms for the iterate v. Exactly zero for zero data and zero iterate.
BoundaryData assemble_boundary_data(const WedgeProblem& pb, const IterationField& v,
                                    const std::vector<EllipticCoeffs>& a, const Gradient& grad_w);

// coefficient fields of the iterate (regime error names the node)
std::vector<EllipticCoeffs> coefficient_fields(const WedgeProblem& pb, const IterationField& v);

// flow-angle perturbation: slip data on the wall, modified oblique data on the
// shock edge, far-line data per the truncation setting
std::pair<std::vector<double>, LinearSolveReport> solve_flow_angle(const WedgeProblem& pb,
                                                                   const std::vector<EllipticCoeffs>& a,
                                                                   const BoundaryData& bd);

struct PressureRecovery {
    std::vector<double> dp;             // per node
    std::vector<double> consistency;    // defect of the second momentum relation on the trace
    std::vector<double> momentum;       // direct discrete defect on the trace
};

PressureRecovery recover_pressure(const WedgeProblem& pb, const std::vector<EllipticCoeffs>& a,
                                  const std::vector<double>& dw_new, const IterationField& v,
                                  const BoundaryData& bd);

struct TransportResult {
    std::vector<double> du1, drho; // per node
    std::vector<double> entropy_trace, bernoulli_trace;
};

TransportResult transport_state(const WedgeProblem& pb, const std::vector<double>& dw,
                                const std::vector<double>& dp, const BoundaryData& bd);

std::vector<double> update_shock(const WedgeProblem& pb, const IterationField& next,
                                 const BoundaryData& bd);

struct QStages {
    std::vector<EllipticCoeffs> coeffs;
    BoundaryData boundary;
    PressureRecovery pressure;
    TransportResult transport;
    LinearSolveReport linear;
    double min_margin = 0.0; // min (c^2 - q^2) / c^2 over the new iterate
};

struct QResult {
    IterationField next;
    QStages stages;
};

QResult apply_Q(const WedgeProblem& pb, const IterationField& v);

// ---- fixed point

struct IterationRecord {
    int iteration = 0;
    double residual = 0.0;
    double damping = 1.0;
    double norm = 0.0;
    double min_margin = 0.0;
    double linear_residual = 0.0;
};

enum class FixedPointStatus { converged, max_iterations, diverged };
const char* to_string(FixedPointStatus s);

struct FixedPointResult {
    IterationField solution;
    QStages stages; // products of the final application
    std::vector<IterationRecord> history;
    FixedPointStatus status = FixedPointStatus::max_iterations;
    double residual = 0.0;
    double wall_time = 0.0;
    bool converged() const { return status == FixedPointStatus::converged; }
};

// Thrown on divergence; carries the partial run.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& msg, FixedPointResult partial)
        : Error(ErrorKind::nonconvergence, msg), partial_(std::move(partial)) {}
    const FixedPointResult& partial() const { return partial_; }

private:
    FixedPointResult partial_;
};

FixedPointResult solve_fixed_point(const WedgeProblem& pb,
                                   std::optional<IterationField> seed = std::nullopt);

// final state at every node and the reconstructed shock
// a second starting iterate: Q(0) with each component scaled by a factor drawn from [0.5, 1.5]
IterationField random_start(const WedgeProblem& pb, std::uint64_t seed);

std::vector<EulerState> full_states(const WedgeProblem& pb, const IterationField& v);
ShockCurve shock_curve(const WedgeProblem& pb, const IterationField& v);

} // namespace wedge
