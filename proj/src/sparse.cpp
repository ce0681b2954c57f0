#include "wedge/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wedge/error.hpp"

namespace wedge {

// ---- CSR

void CsrMatrix::add(int c, double v) {
    for (std::size_t k = row_start_; k < col.size(); ++k)
        if (col[k] == c) {
            val[k] += v;
            return;
        }
    col.push_back(c);
    val.push_back(v);
}

void CsrMatrix::end_row() {
    // keep columns sorted within the row
    const std::size_t lo = row_start_, hi = col.size();
    for (std::size_t a = lo + 1; a < hi; ++a)
        for (std::size_t b = a; b > lo && col[b - 1] > col[b]; --b) {
            std::swap(col[b - 1], col[b]);
            std::swap(val[b - 1], val[b]);
        }
    row_ptr.push_back(hi);
    row_start_ = hi;
    ++n;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y, kernels::Backend b) const {
    kernels::for_range(n, [&](std::size_t r) {
        double s = 0.0;
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }, b);
}

double CsrMatrix::at(std::size_t r, int c) const {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        if (col[k] == c) return val[k];
    return 0.0;
}

int CsrMatrix::lower_bandwidth() const {
    int bw = 0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            bw = std::max(bw, static_cast<int>(r) - col[k]);
    return bw;
}

int CsrMatrix::upper_bandwidth() const {
    int bw = 0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            bw = std::max(bw, col[k] - static_cast<int>(r));
    return bw;
}

double residual_norm(const CsrMatrix& A, std::span<const double> x, std::span<const double> b,
                     kernels::Backend be) {
    std::vector<double> r(A.n);
    A.multiply(x, r, be);
    return std::sqrt(kernels::sum_range(A.n, [&](std::size_t i) {
        const double d = b[i] - r[i];
        return d * d;
    }, be));
}

// ---- banded LU

BandedLU::BandedLU(const CsrMatrix& A, int kl, int ku)
    : n_(A.n), kl_(kl), ku_(ku), w_(2 * kl + ku + 1) {
    a_.assign(n_ * w_, 0.0);
    l_.assign(n_ * kl_, 0.0);
    piv_.resize(n_);
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
            const long d = static_cast<long>(A.col[k]) - static_cast<long>(r);
            if (d < -kl || d > ku) fail(ErrorKind::solver, "BandedLU: entry outside the declared band");
            at(r, A.col[k]) = A.val[k];
        }

    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t last = std::min(n_ - 1, i + kl_);
        const std::size_t cend = std::min(n_ - 1, i + kl_ + ku_);
        std::size_t p = i;
        double best = std::abs(at(i, i));
        for (std::size_t r = i + 1; r <= last; ++r)
            if (std::abs(at(r, i)) > best) {
                best = std::abs(at(r, i));
                p = r;
            }
        if (best == 0.0) {
            std::ostringstream os;
            os << "BandedLU: singular matrix at row " << i;
            fail(ErrorKind::solver, os.str());
        }
        piv_[i] = p;
        if (p != i)
            for (std::size_t c = i; c <= cend; ++c) std::swap(at(i, c), at(p, c));
        const double d = at(i, i);
        for (std::size_t r = i + 1; r <= last; ++r) {
            const double m = at(r, i) / d;
            l_[i * kl_ + (r - i - 1)] = m;
            at(r, i) = 0.0;
            if (m == 0.0) continue;
            for (std::size_t c = i + 1; c <= cend; ++c) at(r, c) -= m * at(i, c);
        }
    }
}

std::vector<double> BandedLU::solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t i = 0; i < n_; ++i) {
        if (piv_[i] != i) std::swap(x[i], x[piv_[i]]);
        const std::size_t last = std::min(n_ - 1, i + kl_);
        for (std::size_t r = i + 1; r <= last; ++r) x[r] -= l_[i * kl_ + (r - i - 1)] * x[i];
    }
    for (std::size_t ii = n_; ii-- > 0;) {
        const std::size_t cend = std::min(n_ - 1, ii + kl_ + ku_);
        double s = x[ii];
        for (std::size_t c = ii + 1; c <= cend; ++c) s -= at(ii, c) * x[c];
        x[ii] = s / at(ii, ii);
    }
    return x;
}

// ---- dense LU

DenseLU::DenseLU(const CsrMatrix& A) : n_(A.n) {
    if (n_ > 6000) fail(ErrorKind::solver, "DenseLU: system too large for dense elimination");
    a_.assign(n_ * n_, 0.0);
    piv_.resize(n_);
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) a_[r * n_ + A.col[k]] = A.val[k];
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t p = i;
        for (std::size_t r = i + 1; r < n_; ++r)
            if (std::abs(a_[r * n_ + i]) > std::abs(a_[p * n_ + i])) p = r;
        if (a_[p * n_ + i] == 0.0) fail(ErrorKind::solver, "DenseLU: singular matrix");
        piv_[i] = p;
        if (p != i)
            for (std::size_t c = 0; c < n_; ++c) std::swap(a_[i * n_ + c], a_[p * n_ + c]);
        for (std::size_t r = i + 1; r < n_; ++r) {
            const double m = a_[r * n_ + i] / a_[i * n_ + i];
            a_[r * n_ + i] = m;
            if (m == 0.0) continue;
            for (std::size_t c = i + 1; c < n_; ++c) a_[r * n_ + c] -= m * a_[i * n_ + c];
        }
    }
}

std::vector<double> DenseLU::solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    // row swaps were applied to the stored multipliers too, so permute first
    for (std::size_t i = 0; i < n_; ++i)
        if (piv_[i] != i) std::swap(x[i], x[piv_[i]]);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t r = i + 1; r < n_; ++r) x[r] -= a_[r * n_ + i] * x[i];
    for (std::size_t i = n_; i-- > 0;) {
        double s = x[i];
        for (std::size_t c = i + 1; c < n_; ++c) s -= a_[i * n_ + c] * x[c];
        x[i] = s / a_[i * n_ + i];
    }
    return x;
}

// ---- ILU(0)

Ilu0::Ilu0(const CsrMatrix& A) : f_(A) {
    const std::size_t n = f_.n;
    diag_.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        diag_[r] = f_.row_ptr[r + 1];
        for (std::size_t k = f_.row_ptr[r]; k < f_.row_ptr[r + 1]; ++k)
            if (f_.col[k] == static_cast<int>(r)) diag_[r] = k;
        if (diag_[r] == f_.row_ptr[r + 1]) fail(ErrorKind::solver, "Ilu0: missing diagonal entry");
    }
    for (std::size_t r = 1; r < n; ++r) {
        for (std::size_t k = f_.row_ptr[r]; k < f_.row_ptr[r + 1] && f_.col[k] < static_cast<int>(r); ++k) {
            const std::size_t pr = static_cast<std::size_t>(f_.col[k]);
            const double piv = f_.val[diag_[pr]];
            if (piv == 0.0) fail(ErrorKind::solver, "Ilu0: zero pivot");
            f_.val[k] /= piv;
            const double m = f_.val[k];
            // row r -= m * row pr, restricted to the pattern of row r
            std::size_t q = k + 1;
            for (std::size_t kk = diag_[pr] + 1; kk < f_.row_ptr[pr + 1]; ++kk) {
                const int c = f_.col[kk];
                while (q < f_.row_ptr[r + 1] && f_.col[q] < c) ++q;
                if (q < f_.row_ptr[r + 1] && f_.col[q] == c) f_.val[q] -= m * f_.val[kk];
            }
        }
    }
}

void Ilu0::apply(std::span<const double> r, std::span<double> z) const {
    const std::size_t n = f_.n;
    for (std::size_t i = 0; i < n; ++i) {
        double s = r[i];
        for (std::size_t k = f_.row_ptr[i]; k < diag_[i]; ++k) s -= f_.val[k] * z[f_.col[k]];
        z[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = diag_[i] + 1; k < f_.row_ptr[i + 1]; ++k) s -= f_.val[k] * z[f_.col[k]];
        z[i] = s / f_.val[diag_[i]];
    }
}

// ---- GMRES

KrylovResult gmres(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                   const Ilu0& prec, const KrylovOptions& opt, kernels::Backend be) {
    const std::size_t n = A.n;
    const int m = opt.restart;
    KrylovResult res;
    const double bnorm = kernels::norm2(b, be);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
    std::vector<double> H((m + 1) * m), cs(m), sn(m), g(m + 1), w(n), z(n);
    auto h = [&](int i, int j) -> double& { return H[i * m + j]; };

    while (res.iterations < opt.max_iter) {
        A.multiply(x, w, be);
        kernels::for_range(n, [&](std::size_t i) { V[0][i] = b[i] - w[i]; }, be);
        double beta = kernels::norm2(V[0], be);
        res.rel_residual = beta / bnorm;
        if (res.rel_residual <= opt.tol) {
            res.converged = true;
            return res;
        }
        kernels::for_range(n, [&](std::size_t i) { V[0][i] /= beta; }, be);
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        int k = 0;
        for (; k < m && res.iterations < opt.max_iter; ++k) {
            ++res.iterations;
            prec.apply(V[k], z);
            A.multiply(z, w, be);
            for (int i = 0; i <= k; ++i) {
                h(i, k) = kernels::dot(w, V[i], be);
                kernels::axpy(-h(i, k), V[i], w, be);
            }
            h(k + 1, k) = kernels::norm2(w, be);
            if (h(k + 1, k) > 0.0)
                kernels::for_range(n, [&](std::size_t i) { V[k + 1][i] = w[i] / h(k + 1, k); }, be);
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double r = std::hypot(h(k, k), h(k + 1, k));
            cs[k] = h(k, k) / r;
            sn[k] = h(k + 1, k) / r;
            h(k, k) = r;
            h(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            res.rel_residual = std::abs(g[k + 1]) / bnorm;
            if (res.rel_residual <= opt.tol) {
                ++k;
                break;
            }
        }
        // back substitution and update x += M^{-1} V y
        std::vector<double> y(k);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
            y[i] = s / h(i, i);
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int i = 0; i < k; ++i) kernels::axpy(y[i], V[i], w, be);
        prec.apply(w, z);
        kernels::axpy(1.0, z, x, be);
    }
    A.multiply(x, w, be);
    res.rel_residual = residual_norm(A, x, b, be) / bnorm;
    res.converged = res.rel_residual <= opt.tol;
    return res;
}

} // namespace wedge
