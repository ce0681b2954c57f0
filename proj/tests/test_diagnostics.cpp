#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "wedge/diagnostics.hpp"

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

// one converged weak run shared by several cases
const FixedPointResult& weak_run(const WedgeProblem& pb) {
    static const FixedPointResult run = solve_fixed_point(pb);
    return run;
}

const WedgeProblem& weak_problem() {
    static const WedgeProblem pb(small_case(1e-3));
    return pb;
}

std::vector<double> synthetic(const WedgeGrid& g, double eps, double power, bool transversal) {
    std::vector<double> f(g.size());
    for (int i = 0; i <= g.N; ++i)
        for (int j = 0; j <= g.M; ++j) {
            const double s = transversal ? g.z2(i, j) : g.radius(i, j);
            f[g.idx(i, j)] = eps * std::pow(1.0 + s, power);
        }
    return f;
}

} // namespace

// ---- residuals

TEST_CASE("residuals vanish on the background state") {
    const WedgeProblem pb(small_case(0.0));
    const IterationField v = IterationField::zero(pb.grid);
    for (const auto& r : euler_residuals(pb, v)) {
        CHECK(r.sup <= 1e-12);
        CHECK(r.l2 <= 1e-12);
        CHECK(r.weighted <= 1e-12);
    }
    for (const auto& r : rh_residuals(pb, v)) CHECK(r.sup <= 1e-12);
}

TEST_CASE("converged run: jump residuals at fixed-point tolerance, random field far off") {
    const WedgeProblem& pb = weak_problem();
    const FixedPointResult& run = weak_run(pb);
    REQUIRE(run.converged());
    for (const auto& r : rh_residuals(pb, run.solution)) CHECK(r.sup <= 10.0 * pb.spec.solver.tol);

    const auto conv = euler_residuals(pb, run.solution);
    IterationField noise = run.solution;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (auto* f : {&noise.du1, &noise.drho, &noise.dw, &noise.dp})
        for (double& x : *f) x = u(rng);
    const auto bad = euler_residuals(pb, noise);
    for (int e = 0; e < 4; ++e) {
        CHECK(std::isfinite(conv[e].sup));
        CHECK(bad[e].sup >= 1e3 * conv[e].sup);
    }
}

TEST_CASE("shock slope offset shows up linearly in the tangential jump") {
    const WedgeProblem pb(small_case(0.0));
    auto probe = [&](double d) {
        IterationField v = IterationField::zero(pb.grid);
        for (double& x : v.dsigma_prime) x = d;
        return rh_residuals(pb, v);
    };
    const auto a = probe(1e-3), b = probe(2e-3);
    const double jump_p = pb.base().p - pb.background.upstream.p;
    CHECK(a[2].sup == doctest::Approx(std::abs(jump_p) * 1e-3).epsilon(1e-6));
    CHECK(b[2].sup / a[2].sup == doctest::Approx(2.0).epsilon(1e-6));
}

// ---- fits

TEST_CASE("decay fit recovers a synthetic exponent on three grids") {
    for (int N : {64, 128, 256}) {
        const WedgeProblem pb(small_case(0.0, "weak", N));
        const WedgeGrid& g = pb.grid;
        const auto f = synthetic(g, 1e-3, -2.0, false);
        for (double fr : ray_fractions) {
            const DecayFit d = decay_fit(f, g, FitPath::ray, fr * pb.frame.omega0);
            CHECK(d.exponent == doctest::Approx(-2.0).epsilon(0.025));
            CHECK(d.points == 40);
        }
        const auto t = synthetic(g, 1e-3, -2.0, true);
        CHECK(decay_fit(t, g, FitPath::column, 0.9 * g.R).exponent == doctest::Approx(-2.0).epsilon(0.025));
        CHECK_THROWS_AS(decay_fit(t, g, FitPath::streamline, 5.0), Error);
    }
}

TEST_CASE("decay fit subtracts a limit field") {
    const WedgeProblem pb(small_case(0.0));
    const WedgeGrid& g = pb.grid;
    auto f = synthetic(g, 1e-3, -1.5, false);
    const std::vector<double> limit(g.size(), 0.25);
    for (double& x : f) x += 0.25;
    const DecayFit d = decay_fit(f, g, FitPath::ray, 0.5 * pb.frame.omega0, {}, limit);
    CHECK(d.exponent == doctest::Approx(-1.5).epsilon(0.03));
}

TEST_CASE("degenerate fit windows are rejected") {
    const WedgeProblem pb(small_case(0.0));
    const WedgeGrid& g = pb.grid;
    const auto f = synthetic(g, 1e-3, -2.0, false);
    FitWindow w;
    w.lo = 10.0;
    w.hi = 10.0;
    CHECK_THROWS_AS(decay_fit(f, g, FitPath::ray, 0.3, w), Error);
    w.hi = 20.0;
    w.samples = 2;
    CHECK_THROWS_AS(decay_fit(f, g, FitPath::ray, 0.3, w), Error);
    const std::vector<double> zero(g.size(), 0.0);
    CHECK_THROWS_AS(decay_fit(zero, g, FitPath::ray, 0.3), Error);
    const std::vector<double> s{1.0, 1.0, 1.0}, v{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(fit_power_law(s, v), Error);
}

TEST_CASE("power law fit is exact on exact data") {
    std::vector<double> s, f;
    for (int k = 0; k < 10; ++k) {
        s.push_back(std::pow(2.0, k));
        f.push_back(-3.0 * std::pow(1.0 + s.back(), -1.25));
    }
    const DecayFit d = fit_power_law(s, f);
    CHECK(d.exponent == doctest::Approx(-1.25).epsilon(1e-12));
    CHECK(d.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(d.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("streamline fits rebuild the transported state") {
    const WedgeProblem& pb = weak_problem();
    const FixedPointResult& run = weak_run(pb);
    const TransportResult& tr = run.stages.transport;
    CHECK_THROWS_AS(streamline_fit(pb, run.solution, tr, "dp", 5.0), Error);
    CHECK_THROWS_AS(streamline_fit(pb, run.solution, tr, "drho", 1e6), Error);
    // on the wall streamline at node abscissae the rebuild equals the stored nodes
    FitWindow w;
    w.lo = pb.grid.xi[40];
    w.hi = pb.grid.xi[60];
    w.samples = 3;
    const DecayFit d = streamline_fit(pb, run.solution, tr, "drho", 0.0, w);
    CHECK(d.points == 3);
    const double a = run.solution.drho[pb.grid.idx(40, 0)], b = run.solution.drho[pb.grid.idx(60, 0)];
    const double slope = std::log(std::abs(b / a)) / std::log((1.0 + pb.grid.xi[60]) / (1.0 + pb.grid.xi[40]));
    CHECK(std::abs(d.exponent - slope) <= 1e-3);
}

// ---- far field

TEST_CASE("far field limits are the background for zero data") {
    const WedgeProblem pb(small_case(0.0));
    const FixedPointResult run = solve_fixed_point(pb);
    const FarField ff = farfield_limits(pb, run.solution, run.stages.transport);
    for (double x : ff.rho_inf) CHECK(x == doctest::Approx(pb.base().rho).epsilon(1e-14));
    for (double x : ff.u1_inf) CHECK(x == doctest::Approx(pb.base().u1).epsilon(1e-14));
    for (double x : ff.rho_gap) CHECK(x <= 1e-13);
    CHECK(ff.rho_rate.points == 0);
    CHECK(ff.rho_profile.points == 0);
}

TEST_CASE("far field density follows the entropy identity") {
    const WedgeProblem& pb = weak_problem();
    const FixedPointResult& run = weak_run(pb);
    const TransportResult& tr = run.stages.transport;
    const FarField ff = farfield_limits(pb, run.solution, tr);
    const GasModel& gas = pb.gas;
    const double p0 = pb.base().p;
    for (std::size_t i = 0; i < ff.z2.size(); ++i) {
        CHECK(std::abs(std::pow(ff.rho_inf[i], gas.gamma) * tr.entropy_trace[i] / p0 - 1.0) <= 1e-12);
        const EulerState s{ff.u1_inf[i], 0.0, p0, ff.rho_inf[i]};
        CHECK(std::abs(bernoulli(s, gas) - tr.bernoulli_trace[i]) <= 1e-12 * tr.bernoulli_trace[i]);
    }
    CHECK(ff.rho_profile.points > 10);
    CHECK(ff.rho_profile.exponent < 0.0);
}

// ---- weighted norms

TEST_CASE("weighted norm of a constant with zero exponents is the constant") {
    const WedgeProblem pb(small_case(0.0));
    const std::vector<double> c(pb.grid.size(), 0.37);
    CHECK(weighted_sup_norm(c, pb.grid, {}, 0) == doctest::Approx(0.37).epsilon(1e-15));
    CHECK(weighted_sup_norm(c, pb.grid, {}, 1) <= 1e-12);
    CHECK_THROWS_AS(weighted_sup_norm(c, pb.grid, {}, 2), Error);
}

TEST_CASE("weighted norm balances a matching decay and grows with the radial exponent") {
    const WedgeProblem pb(small_case(0.0));
    const auto f = synthetic(pb.grid, 1.0, -1.0, false);
    WeightSpec w;
    double prev = 0.0;
    for (double tau : {0.0, 1.0, 2.0}) {
        w.tau = tau;
        const double n = weighted_sup_norm(f, pb.grid, w, 0);
        if (tau == 1.0) CHECK(n == doctest::Approx(1.0).epsilon(0.05));
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("corner and wall factors only shrink the weight") {
    const WedgeProblem pb(small_case(0.0));
    const auto f = synthetic(pb.grid, 1.0, -1.0, false);
    WeightSpec plain;
    plain.tau = 1.0;
    WeightSpec full = plain;
    full.corner = full.wall = true;
    full.gamma1 = 0.5;
    full.gamma2 = 0.25;
    for (int k : {0, 1}) CHECK(weighted_sup_norm(f, pb.grid, full, k) <= weighted_sup_norm(f, pb.grid, plain, k));
}

// ---- upstream and report

TEST_CASE("upstream residual is reported and scales with the amplitude") {
    const WedgeProblem a(small_case(1e-3)), b(small_case(2e-3));
    const auto ra = upstream_residuals(a), rb = upstream_residuals(b);
    for (int e = 0; e < 4; ++e) {
        CHECK(ra[e] > 0.0);
        CHECK(rb[e] / ra[e] == doctest::Approx(2.0).epsilon(0.05));
    }
    const WedgeProblem z(small_case(0.0));
    for (double r : upstream_residuals(z)) CHECK(r <= 1e-9);
}

TEST_CASE("report collects every fit and finite norms") {
    const WedgeProblem& pb = weak_problem();
    const FixedPointResult& run = weak_run(pb);
    const DiagnosticsReport r = diagnose(pb, run);
    CHECK(r.status == FixedPointStatus::converged);
    for (double fr : ray_fractions) {
        CHECK_NOTHROW(find_fit(r, "dp", FitPath::ray, fr * pb.frame.omega0));
        CHECK_NOTHROW(find_fit(r, "dw", FitPath::ray, fr * pb.frame.omega0));
    }
    for (double z2 : streamline_levels) CHECK_NOTHROW(find_fit(r, "drho", FitPath::streamline, z2));
    CHECK_NOTHROW(find_fit(r, "drho", FitPath::profile, 0.0));
    CHECK_NOTHROW(find_fit(r, "du1", FitPath::column, 0.9 * pb.grid.R));
    CHECK_THROWS_AS(find_fit(r, "nope", FitPath::ray, 0.0), Error);
    for (const auto& e : r.euler) CHECK((std::isfinite(e.sup) && e.sup >= 0.0));
    for (const auto& w : r.weighted) CHECK((std::isfinite(w.k0) && std::isfinite(w.k1) && w.k0 >= 0.0));
    CHECK(r.min_margin > 0.0);
    CHECK(r.consistency_window <= r.consistency_full);
    CHECK(r.history.size() == run.history.size());
}

TEST_CASE("wall and zero truncation data agree away from the truncation line") {
    auto gap = [](double R) {
        ProblemSpec s = small_case(1e-3);
        s.grid.R = R;
        const WedgeProblem a(s);
        s.solver.truncation = "zero";
        const WedgeProblem b(s);
        const auto va = solve_fixed_point(a).solution, vb = solve_fixed_point(b).solution;
        double d = 0.0, n = 0.0;
        for (int i = 0; i <= a.grid.N; ++i)
            for (int j = 0; j <= a.grid.M; ++j) {
                if (a.grid.radius(i, j) > 10.0) continue;
                const std::size_t k = a.grid.idx(i, j);
                d = std::max(d, std::abs(va.dw[k] - vb.dw[k]));
                n = std::max(n, std::abs(va.dw[k]));
            }
        return d / n;
    };
    const double g50 = gap(50.0), g100 = gap(100.0);
    MESSAGE("truncation gap R=50: " << g50 << ", R=100: " << g100);
    CHECK(g100 < g50);
    CHECK(g100 < 0.5);
}
