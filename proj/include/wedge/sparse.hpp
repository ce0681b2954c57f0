#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wedge/kernels.hpp"

namespace wedge {

struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<int> col;
    std::vector<double> val;

    // rows are appended in order; duplicate columns within a row are merged
    void begin_row() {}
    void add(int c, double v);
    void end_row();

    void multiply(std::span<const double> x, std::span<double> y,
                  kernels::Backend b = kernels::default_backend()) const;
    double at(std::size_t r, int c) const;
    int lower_bandwidth() const;
    int upper_bandwidth() const;

private:
    std::size_t row_start_ = 0;
};

// ||b - A x||_2
double residual_norm(const CsrMatrix& A, std::span<const double> x, std::span<const double> b,
                     kernels::Backend be = kernels::default_backend());

// Gaussian elimination with partial pivoting inside the band.
class BandedLU {
public:
    BandedLU(const CsrMatrix& A, int kl, int ku);
    std::vector<double> solve(std::span<const double> b) const;

private:
    std::size_t n_ = 0;
    int kl_ = 0, ku_ = 0, w_ = 0;
    std::vector<double> a_;  // row r holds columns [r-kl, r+ku+kl]
    std::vector<double> l_;  // multipliers, kl per step
    std::vector<std::size_t> piv_;
    double& at(std::size_t r, std::size_t c) { return a_[r * w_ + (c + kl_ - r)]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * w_ + (c + kl_ - r)]; }
};

// Dense partial-pivoting LU; test oracle for small systems.
class DenseLU {
public:
    explicit DenseLU(const CsrMatrix& A);
    std::vector<double> solve(std::span<const double> b) const;

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
    std::vector<std::size_t> piv_;
};

class Ilu0 {
public:
    explicit Ilu0(const CsrMatrix& A);
    void apply(std::span<const double> r, std::span<double> z) const; // z = M^{-1} r

private:
    CsrMatrix f_;
    std::vector<std::size_t> diag_;
};

struct KrylovOptions {
    double tol = 1e-10; // relative to ||b||
    int restart = 80;
    int max_iter = 4000;
};

struct KrylovResult {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

// right-preconditioned restarted GMRES; x holds the initial guess on entry
KrylovResult gmres(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                   const Ilu0& prec, const KrylovOptions& opt,
                   kernels::Backend be = kernels::default_backend());

} // namespace wedge
