#pragma once

// Dense symmetric linear algebra: Jacobi eigendecomposition, PSD square
// root, pseudo-inverse solves and quadratic forms. Everything works on
// plain std::vector<double> carriers; matrices are stored fully and kept
// exactly symmetric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace varinorm {

using DenseVector = std::vector<double>;

inline bool all_finite(const DenseVector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double dot(const DenseVector& a, const DenseVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const DenseVector& v) { return std::sqrt(dot(v, v)); }

inline DenseVector scaled(const DenseVector& v, double c) {
    DenseVector r(v);
    for (double& x : r) x *= c;
    return r;
}

// a += c * b
inline void axpy(DenseVector& a, double c, const DenseVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

inline DenseVector zeros(std::size_t d) { return DenseVector(d, 0.0); }

inline DenseVector basis_vector(std::size_t d, std::size_t i) {
    DenseVector v(d, 0.0);
    v.at(i) = 1.0;
    return v;
}

// Full d x d symmetric matrix. Construction symmetrizes by averaging
// M and M^T so the stored entries are exactly symmetric.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(std::size_t d) : d_(d), a_(d * d, 0.0) {}

    SymMatrix(std::size_t d, std::vector<double> entries) : d_(d), a_(std::move(entries)) {
        if (a_.size() != d_ * d_) throw std::invalid_argument("SymMatrix: bad entry count");
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = i + 1; j < d_; ++j) {
                double m = 0.5 * (a_[i * d_ + j] + a_[j * d_ + i]);
                a_[i * d_ + j] = m;
                a_[j * d_ + i] = m;
            }
        if (!all_finite(a_)) throw std::invalid_argument("SymMatrix: non-finite entry");
    }

    static SymMatrix identity(std::size_t d) {
        SymMatrix m(d);
        for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }

    static SymMatrix diagonal(const DenseVector& diag) {
        SymMatrix m(diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
        return m;
    }

    std::size_t dim() const { return d_; }

    double operator()(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * d_ + j]; }

    const std::vector<double>& data() const { return a_; }

    SymMatrix& operator+=(const SymMatrix& o) {
        check_same_dim(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }

    SymMatrix& operator*=(double c) {
        for (double& x : a_) x *= c;
        return *this;
    }

    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator*(SymMatrix a, double c) { return a *= c; }
    friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }

    DenseVector apply(const DenseVector& x) const {
        if (x.size() != d_) throw std::invalid_argument("SymMatrix::apply: dimension mismatch");
        DenseVector y(d_, 0.0);
        for (std::size_t i = 0; i < d_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d_; ++j) s += a_[i * d_ + j] * x[j];
            y[i] = s;
        }
        return y;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double x : a_) s += x * x;
        return std::sqrt(s);
    }

    // M += g g^T, symmetry preserved exactly.
    void add_outer(const DenseVector& g, double c = 1.0) {
        if (g.size() != d_) throw std::invalid_argument("add_outer: dimension mismatch");
        for (std::size_t i = 0; i < d_; ++i) {
            double gi = c * g[i];
            for (std::size_t j = 0; j < d_; ++j) a_[i * d_ + j] += gi * g[j];
        }
    }

private:
    void check_same_dim(const SymMatrix& o) const {
        if (o.d_ != d_) throw std::invalid_argument("SymMatrix: dimension mismatch");
    }

    std::size_t d_ = 0;
    std::vector<double> a_;
};

inline SymMatrix rank_one_update(SymMatrix m, const DenseVector& g) {
    m.add_outer(g);
    return m;
}

// x^T M x with symmetrized accumulation (diagonal once, off-diagonal twice).
inline double quad_form(const SymMatrix& m, const DenseVector& x) {
    const std::size_t d = m.dim();
    if (x.size() != d) throw std::invalid_argument("quad_form: dimension mismatch");
    double diag = 0.0, off = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        diag += m(i, i) * x[i] * x[i];
        for (std::size_t j = i + 1; j < d; ++j) off += m(i, j) * x[i] * x[j];
    }
    return diag + 2.0 * off;
}

// Q columns are eigenvectors; eigenvalues sorted ascending.
struct EigenDecomposition {
    std::size_t dim = 0;
    std::vector<double> rotation;   // d x d, row-major; column k is the k-th eigenvector
    DenseVector eigenvalues;        // ascending

    double q(std::size_t i, std::size_t k) const { return rotation[i * dim + k]; }

    double max_eigenvalue() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back(); }

    // Q f(Lambda) Q^T b
    DenseVector apply_function(const DenseVector& fvals, const DenseVector& b) const {
        DenseVector proj(dim, 0.0);
        for (std::size_t k = 0; k < dim; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim; ++i) s += q(i, k) * b[i];
            proj[k] = s * fvals[k];
        }
        DenseVector out(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) s += q(i, k) * proj[k];
            out[i] = s;
        }
        return out;
    }

    SymMatrix assemble(const DenseVector& fvals) const {
        SymMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < dim; ++k) s += q(i, k) * fvals[k] * q(j, k);
                m(i, j) = s;
                m(j, i) = s;
            }
        return m;
    }
};

// Cyclic Jacobi rotations. The off-diagonal threshold is relative,
// 1e-12 * max(1, ||M||_F): an absolute 1e-12 cut is unreachable in double
// precision once ||M||_F grows past ~1e4, and the reconstruction contract
// is itself relative.
inline EigenDecomposition sym_eigen(const SymMatrix& m) {
    const std::size_t d = m.dim();
    if (d == 0) throw std::invalid_argument("sym_eigen: empty matrix");
    if (!all_finite(m.data())) throw std::invalid_argument("sym_eigen: non-finite input");

    std::vector<double> a(m.data());
    std::vector<double> q(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) q[i * d + i] = 1.0;

    const double tol = 1e-12 * std::max(1.0, m.frobenius_norm());
    const int max_sweeps = 100;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t r = p + 1; r < d; ++r) s += a[p * d + r] * a[p * d + r];
        return std::sqrt(2.0 * s);
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= tol) break;
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t r = p + 1; r < d; ++r) {
                double apr = a[p * d + r];
                if (apr == 0.0) continue;
                double app = a[p * d + p];
                double arr = a[r * d + r];
                double theta = (arr - app) / (2.0 * apr);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (std::size_t k = 0; k < d; ++k) {
                    double akp = a[k * d + p];
                    double akr = a[k * d + r];
                    a[k * d + p] = c * akp - s * akr;
                    a[k * d + r] = s * akp + c * akr;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double apk = a[p * d + k];
                    double ark = a[r * d + k];
                    a[p * d + k] = c * apk - s * ark;
                    a[r * d + k] = s * apk + c * ark;
                }
                a[p * d + r] = 0.0;
                a[r * d + p] = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    double qkp = q[k * d + p];
                    double qkr = q[k * d + r];
                    q[k * d + p] = c * qkp - s * qkr;
                    q[k * d + r] = s * qkp + c * qkr;
                }
            }
        }
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i * d + i] < a[j * d + j]; });

    EigenDecomposition out;
    out.dim = d;
    out.eigenvalues.resize(d);
    out.rotation.resize(d * d);
    for (std::size_t k = 0; k < d; ++k) {
        out.eigenvalues[k] = a[order[k] * d + order[k]];
        for (std::size_t i = 0; i < d; ++i) out.rotation[i * d + k] = q[i * d + order[k]];
    }
    return out;
}

// PSD square root; eigenvalues below -1e-10 * lambda_max are rejected,
// small negatives are clamped to zero before rooting.
inline SymMatrix psd_sqrt(const SymMatrix& m) {
    EigenDecomposition eig = sym_eigen(m);
    double lmax = std::max(0.0, eig.max_eigenvalue());
    double psd_tol = -1e-10 * std::max(lmax, 1e-300);
    DenseVector roots(eig.dim);
    for (std::size_t k = 0; k < eig.dim; ++k) {
        double lam = eig.eigenvalues[k];
        if (lam < psd_tol) {
            std::ostringstream msg;
            msg << "psd_sqrt: eigenvalue " << lam << " below PSD tolerance";
            throw std::domain_error(msg.str());
        }
        roots[k] = std::sqrt(std::max(0.0, lam));
    }
    return eig.assemble(roots);
}

struct PseudoSolveResult {
    DenseVector x;
    bool in_range = true;   // false when b has a component in ker(M)
};

// x = M^+ b with relative eigenvalue cutoff tau = 1e-12 * lambda_max.
inline PseudoSolveResult pseudo_solve(const EigenDecomposition& eig, const DenseVector& b) {
    if (b.size() != eig.dim) throw std::invalid_argument("pseudo_solve: dimension mismatch");
    double lmax = 0.0;
    for (double lam : eig.eigenvalues) lmax = std::max(lmax, std::abs(lam));
    double cutoff = 1e-12 * lmax;
    DenseVector inv(eig.dim, 0.0);
    DenseVector fwd(eig.dim, 0.0);
    for (std::size_t k = 0; k < eig.dim; ++k) {
        double lam = eig.eigenvalues[k];
        if (lam > cutoff) {
            inv[k] = 1.0 / lam;
            fwd[k] = lam;
        }
    }
    PseudoSolveResult res;
    res.x = eig.apply_function(inv, b);

    // residual ||M x - b|| over ||b||; components killed by the cutoff show up here
    DenseVector mx = eig.apply_function(fwd, res.x);
    double rsq = 0.0, bsq = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        double r = mx[i] - b[i];
        rsq += r * r;
        bsq += b[i] * b[i];
    }
    res.in_range = std::sqrt(rsq) <= 1e-8 * std::sqrt(bsq);
    if (bsq == 0.0) res.in_range = true;
    return res;
}

inline PseudoSolveResult pseudo_solve(const SymMatrix& m, const DenseVector& b) {
    return pseudo_solve(sym_eigen(m), b);
}

}  // namespace varinorm
