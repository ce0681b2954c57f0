#pragma once

// Loop and reduction kernels with two backends. The serial backend is the
// reference; the OpenMP backend must reproduce it bit for bit, so reductions
// always sum a fixed set of chunks in a fixed order.

#include <cstddef>
#include <exception>
#include <span>

namespace wedge::kernels {

enum class Backend { serial, openmp };

Backend default_backend();
void set_default_backend(Backend b);
const char* to_string(Backend b);

class ScopedBackend {
public:
    explicit ScopedBackend(Backend b) : saved_(default_backend()) { set_default_backend(b); }
    ~ScopedBackend() { set_default_backend(saved_); }
    ScopedBackend(const ScopedBackend&) = delete;
    ScopedBackend& operator=(const ScopedBackend&) = delete;

private:
    Backend saved_;
};

inline constexpr std::size_t reduction_chunks = 64;

template <class F>
void for_range(std::size_t n, F&& f, Backend b = default_backend()) {
    if (b == Backend::openmp) {
        // exceptions may not cross the parallel region; keep the one from the
        // lowest index so the serial backend would have thrown the same
        const long long nn = static_cast<long long>(n);
        std::exception_ptr err;
        long long err_at = nn;
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < nn; ++i) {
            try {
                f(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(wedge_for_range)
                if (i < err_at) {
                    err_at = i;
                    err = std::current_exception();
                }
            }
        }
        if (err) std::rethrow_exception(err);
    } else {
        for (std::size_t i = 0; i < n; ++i) f(i);
    }
}

// sum_i f(i), evaluated as reduction_chunks partial sums added in order
template <class F>
double sum_range(std::size_t n, F&& f, Backend b = default_backend()) {
    double part[reduction_chunks] = {};
    const std::size_t chunk = (n + reduction_chunks - 1) / reduction_chunks;
    auto body = [&](std::size_t c) {
        const std::size_t lo = c * chunk;
        const std::size_t hi = lo + chunk < n ? lo + chunk : n;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        part[c] = s;
    };
    for_range(reduction_chunks, body, b);
    double s = 0.0;
    for (double v : part) s += v;
    return s;
}

// max is order independent, so a plain parallel max is already deterministic
template <class F>
double max_range(std::size_t n, F&& f, Backend b = default_backend()) {
    double m = 0.0;
    if (b == Backend::openmp) {
        const long long nn = static_cast<long long>(n);
#pragma omp parallel for reduction(max : m) schedule(static)
        for (long long i = 0; i < nn; ++i) {
            const double v = f(static_cast<std::size_t>(i));
            if (v > m) m = v;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = f(i);
            if (v > m) m = v;
        }
    }
    return m;
}

double dot(std::span<const double> a, std::span<const double> b, Backend be = default_backend());
double norm2(std::span<const double> a, Backend be = default_backend());
double max_abs(std::span<const double> a, Backend be = default_backend());
// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y, Backend be = default_backend());
// y = x + beta y
void xpby(std::span<const double> x, double beta, std::span<double> y, Backend be = default_backend());

int max_threads();

} // namespace wedge::kernels
