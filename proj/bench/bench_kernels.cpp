// serial reference vs OpenMP backend on the hot kernels
#include <benchmark/benchmark.h>

#include <map>
#include <random>
#include <vector>

#include "wedge/elliptic.hpp"
#include "wedge/free_boundary.hpp"
#include "wedge/kernels.hpp"

using namespace wedge;
using kernels::Backend;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(gen);
    return v;
}

Backend backend_arg(const benchmark::State& st) { return st.range(0) ? Backend::openmp : Backend::serial; }

const WedgeProblem& problem(int N) {
    static std::map<int, WedgeProblem> cache;
    auto it = cache.find(N);
    if (it == cache.end()) {
        ProblemSpec s;
        s.upstream.amplitude = 1e-3;
        s.grid.N = N;
        s.grid.M = N / 2;
        it = cache.emplace(N, WedgeProblem(s)).first;
    }
    return it->second;
}

EllipticProblem varied(const WedgeGrid& g) {
    EllipticProblem p = EllipticProblem::laplace(g);
    const auto r = noise(g.size(), 3);
    for (std::size_t n = 0; n < g.size(); ++n) {
        p.a11[n] = 1.0 + 0.1 * r[n];
        p.a22[n] = 2.0 - 0.1 * r[n];
        p.a12[n] = 0.05 * r[n];
    }
    p.nu = {0.3, 0.9539392014169456};
    return p;
}

} // namespace

// ---- vector kernels

void bm_dot(benchmark::State& st) {
    const auto a = noise(st.range(1), 1), b = noise(st.range(1), 2);
    const Backend be = backend_arg(st);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::dot(a, b, be));
    st.SetItemsProcessed(st.iterations() * st.range(1));
    st.SetLabel(kernels::to_string(be));
}
BENCHMARK(bm_dot)->ArgsProduct({{0, 1}, {1 << 14, 1 << 20}});

void bm_axpy(benchmark::State& st) {
    const auto x = noise(st.range(1), 1);
    auto y = noise(st.range(1), 2);
    const Backend be = backend_arg(st);
    for (auto _ : st) {
        kernels::axpy(1e-9, x, y, be);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * st.range(1));
    st.SetLabel(kernels::to_string(be));
}
BENCHMARK(bm_axpy)->ArgsProduct({{0, 1}, {1 << 14, 1 << 20}});

// ---- grid kernels, second argument is N

void bm_spmv(benchmark::State& st) {
    const WedgeGrid& g = problem(static_cast<int>(st.range(1))).grid;
    const LinearSystem s = assemble(varied(g), Backend::serial);
    const auto x = noise(s.A.n, 4);
    std::vector<double> y(s.A.n);
    const Backend be = backend_arg(st);
    for (auto _ : st) {
        s.A.multiply(x, y, be);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * s.A.val.size());
    st.SetLabel(kernels::to_string(be));
}
BENCHMARK(bm_spmv)->ArgsProduct({{0, 1}, {128, 256}});

void bm_assemble(benchmark::State& st) {
    const WedgeGrid& g = problem(static_cast<int>(st.range(1))).grid;
    const EllipticProblem p = varied(g);
    const Backend be = backend_arg(st);
    for (auto _ : st) benchmark::DoNotOptimize(assemble(p, be));
    st.SetLabel(kernels::to_string(be));
}
BENCHMARK(bm_assemble)->ArgsProduct({{0, 1}, {128, 256}})->Unit(benchmark::kMillisecond);

void bm_mapped_gradient(benchmark::State& st) {
    const WedgeGrid& g = problem(static_cast<int>(st.range(1))).grid;
    const auto v = noise(g.size(), 5);
    kernels::ScopedBackend sb(backend_arg(st));
    for (auto _ : st) benchmark::DoNotOptimize(mapped_gradient(g, v));
    st.SetLabel(kernels::to_string(backend_arg(st)));
}
BENCHMARK(bm_mapped_gradient)->ArgsProduct({{0, 1}, {128, 256}});

void bm_gmres(benchmark::State& st) {
    const WedgeGrid& g = problem(static_cast<int>(st.range(1))).grid;
    const LinearSystem s = assemble(varied(g), Backend::serial);
    const Ilu0 prec(s.A);
    const auto b = noise(s.A.n, 6);
    const Backend be = backend_arg(st);
    for (auto _ : st) {
        std::vector<double> x(s.A.n, 0.0);
        benchmark::DoNotOptimize(gmres(s.A, b, x, prec, KrylovOptions{}, be));
    }
    st.SetLabel(kernels::to_string(be));
}
BENCHMARK(bm_gmres)->ArgsProduct({{0, 1}, {128}})->Unit(benchmark::kMillisecond);

// one application of the iteration map, everything included
void bm_apply_Q(benchmark::State& st) {
    const WedgeProblem& pb = problem(static_cast<int>(st.range(1)));
    const IterationField v = apply_Q(pb, IterationField::zero(pb.grid)).next;
    kernels::ScopedBackend sb(backend_arg(st));
    for (auto _ : st) benchmark::DoNotOptimize(apply_Q(pb, v));
    st.SetLabel(kernels::to_string(backend_arg(st)));
}
BENCHMARK(bm_apply_Q)->ArgsProduct({{0, 1}, {128}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
