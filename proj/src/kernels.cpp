#include "wedge/kernels.hpp"

#include <atomic>
#include <cmath>
#include <omp.h>

namespace wedge::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::openmp};
}

Backend default_backend() { return g_backend.load(); }
void set_default_backend(Backend b) { g_backend.store(b); }

const char* to_string(Backend b) { return b == Backend::openmp ? "openmp" : "serial"; }

int max_threads() { return omp_get_max_threads(); }

double dot(std::span<const double> a, std::span<const double> b, Backend be) {
    return sum_range(a.size(), [&](std::size_t i) { return a[i] * b[i]; }, be);
}

double norm2(std::span<const double> a, Backend be) { return std::sqrt(dot(a, a, be)); }

double max_abs(std::span<const double> a, Backend be) {
    return max_range(a.size(), [&](std::size_t i) { return std::abs(a[i]); }, be);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y, Backend be) {
    for_range(x.size(), [&](std::size_t i) { y[i] += alpha * x[i]; }, be);
}

void xpby(std::span<const double> x, double beta, std::span<double> y, Backend be) {
    for_range(x.size(), [&](std::size_t i) { y[i] = x[i] + beta * y[i]; }, be);
}

} // namespace wedge::kernels
