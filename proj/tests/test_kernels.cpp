#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <omp.h>
#include <random>

#include "wedge/elliptic.hpp"
#include "wedge/kernels.hpp"
#include "wedge/sparse.hpp"

using namespace wedge;
using kernels::Backend;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> random_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(gen);
    return v;
}

} // namespace

TEST_CASE("reductions are bit-identical across backends and thread counts") {
    const auto a = random_vector(100003, 1), b = random_vector(100003, 2);
    const double ref = kernels::dot(a, b, Backend::serial);
    for (int t : {1, 2, 3, 8}) {
        omp_set_num_threads(t);
        const double d = kernels::dot(a, b, Backend::openmp);
        CHECK(std::memcmp(&d, &ref, sizeof d) == 0);
        CHECK(kernels::max_abs(a, Backend::openmp) == kernels::max_abs(a, Backend::serial));
    }
    double plain = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) plain += a[i] * b[i];
    CHECK(ref == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("spmv, gradient and assembly agree bitwise between backends") {
    LagrangianFrame f;
    f.k1 = 0.37;
    f.k0 = 0.37;
    f.rho_u_ref = 1.0;
    GridSpec s;
    s.R = 20.0;
    s.N = 40;
    s.M = 24;
    const WedgeGrid g(f, s);
    EllipticProblem p = EllipticProblem::laplace(g);
    const auto noise = random_vector(g.size(), 3);
    for (std::size_t n = 0; n < g.size(); ++n) {
        p.a11[n] = 1.0 + 0.1 * noise[n];
        p.a22[n] = 2.0 - 0.1 * noise[n];
        p.a12[n] = 0.05 * noise[n];
    }
    p.nu = {0.3, 0.9539392014169456};
    const LinearSystem s1 = assemble(p, Backend::serial);
    omp_set_num_threads(4);
    const LinearSystem s2 = assemble(p, Backend::openmp);
    CHECK(same_bits(s1.A.val, s2.A.val));
    CHECK(s1.A.col == s2.A.col);

    const auto x = random_vector(s1.A.n, 4);
    std::vector<double> y1(s1.A.n), y2(s1.A.n);
    s1.A.multiply(x, y1, Backend::serial);
    s1.A.multiply(x, y2, Backend::openmp);
    CHECK(same_bits(y1, y2));

    std::vector<double> v(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) v[n] = noise[n];
    Gradient ga, gb;
    {
        kernels::ScopedBackend sb(Backend::serial);
        ga = mapped_gradient(g, v);
    }
    {
        kernels::ScopedBackend sb(Backend::openmp);
        gb = mapped_gradient(g, v);
    }
    CHECK(same_bits(ga.dz1, gb.dz1));
    CHECK(same_bits(ga.dz2, gb.dz2));
}

TEST_CASE("banded, dense and Krylov solvers agree") {
    // random diagonally dominant banded system
    const int n = 300, bw = 7;
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    CsrMatrix A;
    for (int r = 0; r < n; ++r) {
        for (int c = std::max(0, r - bw); c <= std::min(n - 1, r + bw); ++c) A.add(c, c == r ? 0.2 : d(gen));
        A.end_row();
    }
    // pivoting is exercised: small diagonal
    const auto b = random_vector(n, 6);
    const BandedLU lu(A, bw, bw);
    const DenseLU dl(A);
    const auto x1 = lu.solve(b), x2 = dl.solve(b);
    double diff = 0.0, mag = 0.0;
    for (int k = 0; k < n; ++k) {
        diff = std::max(diff, std::abs(x1[k] - x2[k]));
        mag = std::max(mag, std::abs(x2[k]));
    }
    CHECK(diff <= 1e-9 * mag);
    CHECK(residual_norm(A, x1, b) <= 1e-10 * kernels::norm2(b));

    CsrMatrix D;
    for (int r = 0; r < n; ++r) {
        for (int c = std::max(0, r - bw); c <= std::min(n - 1, r + bw); ++c) D.add(c, c == r ? 20.0 : d(gen));
        D.end_row();
    }
    std::vector<double> x(n, 0.0);
    const Ilu0 prec(D);
    const KrylovResult kr = gmres(D, b, x, prec, {});
    CHECK(kr.converged);
    const auto xd = DenseLU(D).solve(b);
    for (int k = 0; k < n; ++k) CHECK(std::abs(x[k] - xd[k]) < 1e-9);
}
