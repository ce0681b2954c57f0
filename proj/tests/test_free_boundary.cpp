#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include <omp.h>

#include "wedge/free_boundary.hpp"
#include "wedge/kernels.hpp"

using namespace wedge;

namespace {

ProblemSpec small_case(double eps, const char* branch = "weak", int N = 64) {
    ProblemSpec s;
    s.branch = branch;
    s.upstream.amplitude = eps;
    s.grid.N = N;
    s.grid.M = N / 2;
    return s;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

// ---- decomposition

TEST_CASE("decomposition constants at a sample state") {
    const GasModel gas(1.4);
    const DecompCoeffs d = decomp_coeffs({0.5, 0.0, 1.0, 1.4}, gas);
    CHECK(d.lambdaR == 0.0);
    CHECK(d.lambdaI == doctest::Approx(0.80829).epsilon(1e-5));
    CHECK(d.e == doctest::Approx(2.47436).epsilon(1e-5));
    const EllipticCoeffs a = elliptic_coeffs(d, 0.0);
    CHECK(a.a11 == doctest::Approx(1.0 / (2.47436 * 0.80829)).epsilon(1e-5));
    CHECK(a.a12 == 0.0);
}

TEST_CASE("lambdaI and e vanish monotonically toward the sonic state") {
    const GasModel gas(1.4);
    double li = 1e300, e = 1e300;
    // c = 1 for p = 1, rho = 1.4; walk q toward c along a fixed direction
    for (int k = 0; k <= 25; ++k) {
        const double q = 1.0 - 1e-3 * std::ldexp(1.0, -k);
        const DecompCoeffs d = decomp_coeffs({q * std::cos(0.2), q * std::sin(0.2), 1.0, 1.4}, gas);
        CHECK(d.lambdaI < li);
        CHECK(d.e < e);
        li = d.lambdaI;
        e = d.e;
    }
    CHECK(li < 1e-3);
    CHECK(e < 1e-4);
}

TEST_CASE("decomposition refuses sonic, supersonic and backward states") {
    const GasModel gas(1.4);
    CHECK_THROWS_AS(decomp_coeffs({1.0, 0.0, 1.0, 1.4}, gas), Error);
    try {
        decomp_coeffs({2.0, 0.0, 1.0, 1.4}, gas);
        FAIL("expected regime error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::regime);
    }
    try {
        decomp_coeffs({-0.2, 0.1, 1.0, 1.4}, gas);
        FAIL("expected regime error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::regime);
    }
}

TEST_CASE("elliptic coefficients: background identities and determinant") {
    const GasModel gas(1.4);
    const DecompCoeffs d0 = decomp_coeffs({0.6, 0.0, 2.0, 2.1}, gas);
    const EllipticCoeffs a0 = elliptic_coeffs(d0, 0.0);
    CHECK(a0.a12 == 0.0);
    CHECK(a0.a11 * a0.a22 == doctest::Approx(1.0 / (d0.e * d0.e)).epsilon(1e-13));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const EulerState s{0.6 * (1 + 0.05 * U(rng)), 0.05 * U(rng), 2.0 * (1 + 0.05 * U(rng)), 2.1 * (1 + 0.05 * U(rng))};
        const double sp = 0.05 * U(rng);
        const DecompCoeffs d = decomp_coeffs(s, gas);
        const EllipticCoeffs a = elliptic_coeffs(d, sp);
        const double det = a.a11 * a.a22 - a.a12 * a.a12;
        const double r = 1.0 - sp * d.lambdaR, m2 = d.lambdaR * d.lambdaR + d.lambdaI * d.lambdaI;
        const double det2 = (r * r + sp * sp * d.lambdaI * d.lambdaI) * m2 / std::pow(d.e * d.lambdaI, 2) - a.a12 * a.a12;
        CHECK(det > 0.0);
        CHECK(a.a11 > 0.0);
        CHECK(det == doctest::Approx(det2).epsilon(1e-11));
        // with lambdaR, lambdaI the determinant reduces to 1 / e^2
        CHECK(det == doctest::Approx(1.0 / (d.e * d.e)).epsilon(1e-10));
    }
}

// ---- problem setup

TEST_CASE("weak root outside the transonic window is refused") {
    ProblemSpec s = small_case(1e-3);
    s.wedge_angle_deg = 10.0;
    try {
        WedgeProblem pb(s);
        FAIL("expected regime error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::regime);
        CHECK(std::string(e.what()).find("supersonic") != std::string::npos);
    }
    s.branch = "strong";
    CHECK_NOTHROW(WedgeProblem{s});
}

TEST_CASE("background shock slope in Lagrangian variables equals k1") {
    for (const char* br : {"weak", "strong"}) {
        const WedgeProblem pb(small_case(0.0, br));
        CHECK(pb.base_shock_slope() == doctest::Approx(pb.frame.k1).epsilon(1e-12));
        CHECK(pb.coeffs.k1 == doctest::Approx(pb.frame.k1).epsilon(1e-14));
    }
    const WedgeProblem w(small_case(0.0, "weak"));
    const WedgeProblem s(small_case(0.0, "strong"));
    CHECK(w.coeffs.b1 < 0.0);
    CHECK(s.coeffs.b1 > 0.0);
    CHECK(w.decay == doctest::Approx(1.5));
    CHECK(s.decay == doctest::Approx(0.5));
}

TEST_CASE("configuration checks") {
    ProblemSpec s = small_case(1e-3);
    s.upstream.amplitude = 0.5;
    CHECK_THROWS_AS(validate(s), Error);
    s = small_case(1e-3);
    s.solver.damping = 0.0;
    CHECK_THROWS_AS(validate(s), Error);
    s = small_case(1e-3);
    s.branch = "medium";
    CHECK_THROWS_AS(validate(s), Error);
    s = small_case(1e-3);
    s.upstream.family = "spiral";
    CHECK_THROWS_AS(WedgeProblem{s}, Error);

    auto kind_of = [](const ProblemSpec& p) {
        try {
            WedgeProblem pb(p);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::io; // not thrown
    };
    s = small_case(1e-3);
    s.mach = 0.8;
    CHECK(kind_of(s) == ErrorKind::validation);
    try {
        validate(s);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("upstream must be supersonic") != std::string::npos);
    }
    s = small_case(1e-3);
    s.wedge_angle_deg = 0.0;
    CHECK(kind_of(s) == ErrorKind::validation);
    s.wedge_angle_deg = 23.0; // beyond detachment at Mach 2
    CHECK(kind_of(s) == ErrorKind::validation);
    s = small_case(1e-3);
    s.grid.R = 0.5;
    CHECK(kind_of(s) == ErrorKind::validation);
}

// ---- boundary data and stages

TEST_CASE("zero data gives identically zero boundary data and zero Q") {
    const WedgeProblem pb(small_case(0.0));
    const IterationField z = IterationField::zero(pb.grid);
    const auto a = coefficient_fields(pb, z);
    const BoundaryData bd = assemble_boundary_data(pb, z, a, mapped_gradient(pb.grid, z.dw));
    for (const auto* g : {&bd.g1, &bd.g2, &bd.g3, &bd.g4, &bd.g7, &bd.g3_prime}) CHECK(max_abs(*g) == 0.0);

    const QResult q = apply_Q(pb, z);
    CHECK(max_abs(q.next.dw) == 0.0);
    CHECK(max_abs(q.next.dp) == 0.0);
    CHECK(max_abs(q.next.du1) == 0.0);
    CHECK(max_abs(q.next.drho) == 0.0);
    CHECK(max_abs(q.next.dsigma_prime) == 0.0);

    const PressureRecovery pr = recover_pressure(pb, a, z.dw, z, bd);
    CHECK(max_abs(pr.dp) == 0.0);
}

TEST_CASE("boundary data scale linearly with the upstream amplitude") {
    auto g_at = [](double eps) {
        ProblemSpec s = small_case(eps);
        s.wedge.family = "zero";
        const WedgeProblem pb(s);
        const IterationField z = IterationField::zero(pb.grid);
        return assemble_boundary_data(pb, z, coefficient_fields(pb, z), mapped_gradient(pb.grid, z.dw));
    };
    for (double eps : {1e-3, 5e-4, 1e-4}) {
        const BoundaryData a = g_at(eps), b = g_at(2.0 * eps);
        for (int k : {0, 5, 20, 64}) {
            CHECK(b.g1[k] / a.g1[k] == doctest::Approx(2.0).epsilon(0.05));
            CHECK(b.g2[k] / a.g2[k] == doctest::Approx(2.0).epsilon(0.05));
            CHECK(b.g3[k] / a.g3[k] == doctest::Approx(2.0).epsilon(0.05));
            CHECK(b.g4[k] / a.g4[k] == doctest::Approx(2.0).epsilon(0.05));
        }
    }
}

TEST_CASE("g4 and g3 follow the elimination of the linearized jump system") {
    const WedgeProblem pb(small_case(1e-3));
    const IterationField z = IterationField::zero(pb.grid);
    const BoundaryData bd = assemble_boundary_data(pb, z, coefficient_fields(pb, z), mapped_gradient(pb.grid, z.dw));
    const auto& c = pb.coeffs;
    for (int i = 0; i <= pb.grid.N; i += 7) {
        CHECK(bd.g4[i] == doctest::Approx(bd.g1[i] / c.b[0][2]).epsilon(1e-14));
        // any (w, p) with w + b1 p = g3 and rho = g4 - b2 w - b3 p solves both linear equations
        const double w = 0.3 * bd.g3[i], p = (bd.g3[i] - w) / c.b1, rho = bd.g4[i] - c.b2 * w - c.b3 * p;
        CHECK(c.b[0][0] * w + c.b[0][1] * p + c.b[0][2] * rho == doctest::Approx(bd.g1[i]).epsilon(1e-9));
        CHECK(c.b[1][0] * w + c.b[1][1] * p + c.b[1][2] * rho == doctest::Approx(bd.g2[i]).epsilon(1e-9));
    }
}

TEST_CASE("pure wedge perturbation: slip exact on the wall, bounded response, second order") {
    // nested grids: node (i, j) of N is node (2i, 2j) of 2N
    std::vector<std::vector<double>> w;
    std::vector<WedgeGrid> grids;
    for (int N : {32, 64, 128}) {
        ProblemSpec s = small_case(1e-3, "weak", N);
        s.upstream.family = "zero";
        const WedgeProblem pb(s);
        const IterationField z = IterationField::zero(pb.grid);
        const auto a = coefficient_fields(pb, z);
        const BoundaryData bd = assemble_boundary_data(pb, z, a, mapped_gradient(pb.grid, z.dw));
        auto [x, rep] = solve_flow_angle(pb, a, bd);
        for (int i = 0; i <= pb.grid.N; ++i) CHECK(x[pb.grid.idx(i, 0)] == pb.wedge.slope(pb.grid.xi[i]));
        CHECK(max_abs(x) <= 1e-3 * (1.0 + 1e-12));
        w.push_back(std::move(x));
        grids.push_back(pb.grid);
    }
    double d[2] = {0.0, 0.0};
    const WedgeGrid& g = grids[0];
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i <= g.N; ++i)
            for (int j = 0; j <= g.M; ++j) {
                const int f = 1 << k;
                d[k] = std::max(d[k], std::abs(w[k][grids[k].idx(i * f, j * f)] -
                                               w[k + 1][grids[k + 1].idx(2 * i * f, 2 * j * f)]));
            }
    MESSAGE("successive differences " << d[0] << " " << d[1]);
    CHECK(std::log2(d[0] / d[1]) >= 1.8);
}

// ---- fixed point

TEST_CASE("zero amplitude converges in one iteration to the background") {
    const WedgeProblem pb(small_case(0.0, "weak", 128));
    const FixedPointResult r = solve_fixed_point(pb);
    CHECK(r.converged());
    CHECK(r.history.size() == 1);
    CHECK(r.residual <= 1e-12);
    CHECK(weighted_norm(pb, r.solution) == 0.0);
}

TEST_CASE("weak case: convergence, transport invariants and exact slip") {
    const WedgeProblem pb(small_case(1e-3));
    const FixedPointResult r = solve_fixed_point(pb);
    REQUIRE(r.converged());
    CHECK(r.history.size() <= 50);
    CHECK(r.residual <= 1e-9);
    for (const auto& h : r.history) CHECK(h.min_margin > 0.0);

    const WedgeGrid& g = pb.grid;
    const IterationField& v = r.solution;
    for (int i = 0; i <= g.N; ++i) CHECK(v.dw[g.idx(i, 0)] == pb.wedge.slope(g.xi[i]));

    // entropy and Bernoulli reproduce their shock-edge values along streamlines
    const Pchip S(g.xi, r.stages.transport.entropy_trace);
    const Pchip B(g.xi, r.stages.transport.bernoulli_trace);
    double es = 0.0, eb = 0.0;
    for (int i = 0; i <= g.N; ++i)
        for (int j = 0; j <= g.M; ++j) {
            const EulerState s = v.state(pb, g.idx(i, j));
            const double foot = g.eta[j] * g.xi[i];
            es = std::max(es, std::abs(entropy_fn(s, pb.gas) / S(foot) - 1.0));
            eb = std::max(eb, std::abs(bernoulli(s, pb.gas) / B(foot) - 1.0));
        }
    CHECK(es <= 1e-12);
    CHECK(eb <= 1e-12);

    // the shock-edge density satisfies the eliminated jump relation
    const auto& c = pb.coeffs;
    const auto& bd = r.stages.boundary;
    for (int i = 0; i <= g.N; i += 5) {
        const std::size_t n = g.idx(i, g.M);
        CHECK(v.drho[n] == doctest::Approx(bd.g4[i] - c.b2 * v.dw[n] - c.b3 * v.dp[n]).epsilon(1e-9));
    }
}

TEST_CASE("amplitude linearity of the shock response") {
    auto shock = [](double eps) {
        const WedgeProblem pb(small_case(eps));
        return solve_fixed_point(pb).solution.dsigma_prime;
    };
    const auto a = shock(2.5e-4), b = shock(5e-4);
    for (int i : {1, 8, 32, 60}) CHECK(b[i] / a[i] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Q maps a ball into itself and successive updates shrink") {
    const WedgeProblem pb(small_case(1e-3));
    const IterationField z = IterationField::zero(pb.grid);
    const IterationField q0 = apply_Q(pb, z).next;
    const double c0 = 2.0 * weighted_norm(pb, q0) / pb.eps();
    MESSAGE("measured ball constant C0 = " << c0);
    for (double scale : {0.5, 1.5, 1.9}) {
        IterationField v = q0;
        for (auto* f : {&v.du1, &v.drho, &v.dw, &v.dp, &v.dsigma_prime})
            for (double& x : *f) x *= scale;
        CHECK(weighted_norm(pb, v) <= c0 * pb.eps());
        CHECK(weighted_norm(pb, apply_Q(pb, v).next) <= c0 * pb.eps());
    }
    const IterationField q1 = apply_Q(pb, q0).next;
    const IterationField q2 = apply_Q(pb, q1).next;
    CHECK(weighted_distance(pb, q1, q0) < weighted_distance(pb, q0, z));
    CHECK(weighted_distance(pb, q2, q1) < weighted_distance(pb, q1, q0));
}

TEST_CASE("two initial iterates reach the same fixed point") {
    const WedgeProblem pb(small_case(1e-3));
    const FixedPointResult a = solve_fixed_point(pb);
    const IterationField seed = random_start(pb, 11);
    CHECK(weighted_distance(pb, seed, a.solution) > 1e-2 * weighted_norm(pb, a.solution));
    const FixedPointResult b = solve_fixed_point(pb, seed);
    REQUIRE(a.converged());
    REQUIRE(b.converged());
    CHECK(weighted_distance(pb, a.solution, b.solution) <= 1e-8);
}

TEST_CASE("strong branch converges with the same pipeline") {
    const WedgeProblem pb(small_case(1e-3, "strong"));
    const FixedPointResult r = solve_fixed_point(pb);
    CHECK(r.converged());
    CHECK(r.stages.min_margin > 0.0);
}

TEST_CASE("stage errors carry the stage tag and the node") {
    const WedgeProblem pb(small_case(1e-3));
    IterationField v = IterationField::zero(pb.grid);
    v.du1[pb.grid.idx(5, 3)] = 2.0; // pushes that node supersonic
    try {
        apply_Q(pb, v);
        FAIL("expected regime error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::regime);
        const std::string m = e.what();
        CHECK(m.find("Q[coefficients]") != std::string::npos);
        CHECK(m.find("node (i=5, j=3)") != std::string::npos);
    }
}

TEST_CASE("residual growth is reported as non-convergence with history") {
    ProblemSpec s = small_case(1e-4, "weak", 32);
    s.solver.tol = 1e-15; // below the round-off floor
    s.solver.divergence_window = 2;
    const WedgeProblem pb(s);
    try {
        solve_fixed_point(pb);
        FAIL("expected non-convergence");
    } catch (const NonConvergence& e) {
        CHECK(e.kind() == ErrorKind::nonconvergence);
        CHECK(e.partial().status == FixedPointStatus::diverged);
        CHECK(e.partial().history.size() >= 3);
    }
}

TEST_CASE("iteration budget exhaustion is reported, not thrown") {
    ProblemSpec s = small_case(1e-3, "weak", 32);
    s.solver.max_iter = 3;
    const WedgeProblem pb(s);
    const FixedPointResult r = solve_fixed_point(pb);
    CHECK(r.status == FixedPointStatus::max_iterations);
    CHECK(r.history.size() == 3);
}

TEST_CASE("one application of Q is identical on both backends") {
    const WedgeProblem pb(small_case(1e-3));
    const IterationField v = apply_Q(pb, IterationField::zero(pb.grid)).next;
    QResult ref, par;
    {
        kernels::ScopedBackend sb(kernels::Backend::serial);
        ref = apply_Q(pb, v);
    }
    omp_set_num_threads(3);
    {
        kernels::ScopedBackend sb(kernels::Backend::openmp);
        par = apply_Q(pb, v);
    }
    CHECK(ref.next.dw == par.next.dw);
    CHECK(ref.next.dp == par.next.dp);
    CHECK(ref.next.du1 == par.next.du1);
    CHECK(ref.next.drho == par.next.drho);
    CHECK(ref.next.dsigma_prime == par.next.dsigma_prime);
}
