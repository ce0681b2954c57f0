#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wedge/lagrangian.hpp"
#include "wedge/sparse.hpp"

namespace wedge {

enum class EdgeCondition { oblique, dirichlet };

// (a_ij v_{z_i})_{z_j} = f on the truncated wedge; v = g5 on the wall,
// nu . grad v = g6 (or v = g6) on the shock edge, v = gR on the far line.
struct EllipticProblem {
    const WedgeGrid* grid = nullptr;
    std::vector<double> a11, a12, a22; // per node
    std::vector<double> f;             // per node, empty means zero
    std::vector<double> g5;            // per i
    std::vector<double> g6;            // per i (entries 1..N-1 used)
    std::vector<double> gR;            // per j
    std::array<double, 2> nu{0.0, 1.0};
    EdgeCondition edge = EdgeCondition::oblique;

    // identity coefficients, zero data
    static EllipticProblem laplace(const WedgeGrid& g);
};

enum class LinearMethod { direct, krylov, dense };
const char* to_string(LinearMethod m);
LinearMethod linear_method_from_string(const std::string& s);

struct LinearSolveReport {
    int iterations = 0;
    double residual = 0.0; // ||b - A x|| / ||b|| (absolute if b = 0)
    std::string method;
    double wall_time = 0.0;
    bool fallback = false;
};

struct LinearSystem {
    CsrMatrix A;
    std::vector<double> rhs;
};

struct SolveOptions {
    LinearMethod method = LinearMethod::direct;
    double tol = 1e-10;
    KrylovOptions krylov;
    kernels::Backend backend = kernels::default_backend();
};

std::size_t unknown_index(const WedgeGrid& g, int i, int j);
std::size_t unknown_count(const WedgeGrid& g);
std::vector<double> to_unknowns(const WedgeGrid& g, std::span<const double> nodes);
std::vector<double> to_nodes(const WedgeGrid& g, std::span<const double> x);

// Throws ErrorKind::ellipticity naming the worst node.
void check_ellipticity(const EllipticProblem& p);

LinearSystem assemble(const EllipticProblem& p, kernels::Backend be = kernels::default_backend());

// residual A v - rhs of the assembled system, in node layout
std::vector<double> discrete_residual(const EllipticProblem& p, std::span<const double> v);

std::pair<std::vector<double>, LinearSolveReport> solve(const EllipticProblem& p,
                                                        const SolveOptions& opt = {});

struct CornerFit {
    double exponent = 0.0;
    double r2 = 0.0;
    int points = 0;
    bool rejected = false;
    std::string reason;
};

// log|v - v(O)| ~ kappa log r with one intercept per eta line
CornerFit corner_exponent(std::span<const double> v, const WedgeGrid& g, double r_lo = -1.0,
                          double r_hi = 0.1);

} // namespace wedge
