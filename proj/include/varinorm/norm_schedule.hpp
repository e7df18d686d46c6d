#pragma once

// Increasing seminorm schedules consumed by the direction learner:
//   static        fixed PSD matrix (identity by default)
//   full_matrix   M_t = 2I + G_t            (Euclidean base norm)
//   adagrad_root  M_t = (I + G_t)^{1/2}
//   diag_scale    one-dimensional, ||x|| = m |x| with m a running feature max
//   maxquad_scale ||x||^2 = x^T G_t x + 2 max_i <f_i, x>^2

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"

namespace varinorm {

struct DualNormSq {
    double value = 0.0;
    bool finite = true;   // false when g has a component outside range(M)
};

// PSD quadratic seminorm ||x|| = sqrt(x^T M x) with a cached
// eigendecomposition for dual norms and pseudo-inverse applies.
class QuadraticSeminorm {
public:
    QuadraticSeminorm() = default;

    explicit QuadraticSeminorm(SymMatrix m) : m_(std::move(m)), eig_(sym_eigen(m_)) {}

    QuadraticSeminorm(SymMatrix m, EigenDecomposition eig)
        : m_(std::move(m)), eig_(std::move(eig)) {}

    std::size_t dim() const { return m_.dim(); }
    const SymMatrix& matrix() const { return m_; }
    const EigenDecomposition& eigen() const { return eig_; }

    double norm_sq(const DenseVector& x) const { return std::max(0.0, quad_form(m_, x)); }
    double norm(const DenseVector& x) const { return std::sqrt(norm_sq(x)); }

    PseudoSolveResult pinv_apply(const DenseVector& b) const { return pseudo_solve(eig_, b); }

    DualNormSq dual_sq(const DenseVector& g) const {
        PseudoSolveResult sol = pseudo_solve(eig_, g);
        DualNormSq out;
        out.finite = sol.in_range;
        out.value = out.finite ? std::max(0.0, dot(g, sol.x))
                               : std::numeric_limits<double>::infinity();
        return out;
    }

private:
    SymMatrix m_;
    EigenDecomposition eig_;
};

// ||x||^2 = x^T G x + 2 max_{i} <f_i, x>^2 over the stored feature bank.
// All features are kept (O(Td) memory): the cost of evaluating the max exactly.
class MaxQuadSeminorm {
public:
    explicit MaxQuadSeminorm(std::size_t d) : gram_(d) {}

    std::size_t dim() const { return gram_.dim(); }
    const SymMatrix& gram() const { return gram_; }
    const std::vector<DenseVector>& features() const { return features_; }

    void push_feature(const DenseVector& f) {
        if (f.size() != gram_.dim())
            throw std::invalid_argument("MaxQuadSeminorm: feature dimension mismatch");
        if (!all_finite(f)) throw std::invalid_argument("MaxQuadSeminorm: non-finite feature");
        features_.push_back(f);
    }

    void add_gradient(const DenseVector& g) { gram_.add_outer(g); }

    double max_feature_inner_sq(const DenseVector& x) const {
        double best = 0.0;
        for (const auto& f : features_) {
            double ip = dot(f, x);
            best = std::max(best, ip * ip);
        }
        return best;
    }

    double norm_sq(const DenseVector& x) const {
        return std::max(0.0, quad_form(gram_, x)) + 2.0 * max_feature_inner_sq(x);
    }
    double norm(const DenseVector& x) const { return std::sqrt(norm_sq(x)); }

    // Computable surrogate for the dual norm: ||g||^2_{(G + f_1 f_1^T + f_last f_last^T)^+}.
    // Upper-bounds the true dual of the max-of-quadratics seminorm, stays <= 1
    // under the learner contract, and is invariant under invertible feature maps.
    DualNormSq dual_sq_surrogate(const DenseVector& g) const {
        if (features_.empty())
            throw std::logic_error("MaxQuadSeminorm: dual norm requested before any feature");
        SymMatrix a = gram_;
        a.add_outer(features_.front());
        if (features_.size() > 1) a.add_outer(features_.back());
        PseudoSolveResult sol = pseudo_solve(a, g);
        DualNormSq out;
        out.finite = sol.in_range;
        out.value = out.finite ? std::max(0.0, dot(g, sol.x))
                               : std::numeric_limits<double>::infinity();
        return out;
    }

private:
    SymMatrix gram_;
    std::vector<DenseVector> features_;
};

class NormSchedule {
public:
    enum class Kind { Static, FullMatrix, AdagradRoot, DiagScale, MaxQuad };

    static NormSchedule static_norm(SymMatrix m) {
        NormSchedule s(Kind::Static, m.dim());
        s.quad_ = QuadraticSeminorm(std::move(m));
        return s;
    }

    static NormSchedule static_identity(std::size_t d) {
        return static_norm(SymMatrix::identity(d));
    }

    static NormSchedule full_matrix(std::size_t d) {
        NormSchedule s(Kind::FullMatrix, d);
        s.gram_ = SymMatrix(d);
        s.rebuild_quadratic();
        return s;
    }

    static NormSchedule adagrad_root(std::size_t d) {
        NormSchedule s(Kind::AdagradRoot, d);
        s.gram_ = SymMatrix(d);
        s.rebuild_quadratic();
        return s;
    }

    static NormSchedule diag_scale() {
        NormSchedule s(Kind::DiagScale, 1);
        s.m_max_ = 0.0;
        s.rebuild_quadratic();
        return s;
    }

    static NormSchedule maxquad(std::size_t d) {
        NormSchedule s(Kind::MaxQuad, d);
        s.maxquad_.emplace(d);
        return s;
    }

    Kind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }

    // Strong convexity of (1/2)||.||^2 w.r.t. itself; 1 for quadratic norms.
    double sigma() const { return 1.0; }

    bool needs_feature() const { return kind_ == Kind::DiagScale || kind_ == Kind::MaxQuad; }

    // Feature f_{t+1} arrives before prediction w_{t+1}; it completes the
    // norm at index t for the feature-dependent kinds.
    void observe_feature(const DenseVector& f) {
        if (!needs_feature())
            throw std::logic_error("NormSchedule: feature supplied to a gradient-only schedule");
        if (f.size() != dim_) throw std::invalid_argument("NormSchedule: feature dimension mismatch");
        if (!all_finite(f)) throw std::invalid_argument("NormSchedule: non-finite feature");
        if (kind_ == Kind::DiagScale) {
            m_max_ = std::max(m_max_, std::abs(f[0]));
            rebuild_quadratic();
        } else {
            maxquad_->push_feature(f);
        }
    }

    // Fold the round-t gradient into the schedule, moving it to index t.
    void advance(const DenseVector& g) {
        if (g.size() != dim_) throw std::invalid_argument("NormSchedule: gradient dimension mismatch");
        if (!all_finite(g)) throw std::invalid_argument("NormSchedule: non-finite gradient");
        switch (kind_) {
            case Kind::Static:
            case Kind::DiagScale:
                break;   // diag norms move on features, not gradients
            case Kind::FullMatrix:
            case Kind::AdagradRoot:
                gram_.add_outer(g);
                rebuild_quadratic();
                break;
            case Kind::MaxQuad:
                maxquad_->add_gradient(g);
                break;
        }
    }

    double norm_sq(const DenseVector& x) const {
        if (kind_ == Kind::MaxQuad) return maxquad_->norm_sq(x);
        return quad_.norm_sq(x);
    }
    double norm(const DenseVector& x) const { return std::sqrt(norm_sq(x)); }

    DualNormSq dual_norm_sq(const DenseVector& g) const {
        if (kind_ == Kind::MaxQuad) return maxquad_->dual_sq_surrogate(g);
        if (kind_ == Kind::DiagScale) {
            // 0/0 = 0 convention: a zero gradient has zero dual norm even
            // under the zero seminorm.
            DualNormSq out;
            if (m_max_ == 0.0) {
                out.value = (g[0] == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
                out.finite = (g[0] == 0.0);
                return out;
            }
            double r = g[0] / m_max_;
            out.value = r * r;
            return out;
        }
        return quad_.dual_sq(g);
    }

    // Quadratic kinds only (diag_scale is a 1x1 quadratic with M = m^2).
    const QuadraticSeminorm& quad() const {
        if (kind_ == Kind::MaxQuad)
            throw std::logic_error("NormSchedule: no quadratic form for maxquad kind");
        return quad_;
    }

    const MaxQuadSeminorm& maxquad_norm() const {
        if (kind_ != Kind::MaxQuad) throw std::logic_error("NormSchedule: not a maxquad schedule");
        return *maxquad_;
    }

    double diag_scale_max() const {
        if (kind_ != Kind::DiagScale) throw std::logic_error("NormSchedule: not a diag schedule");
        return m_max_;
    }

private:
    NormSchedule(Kind k, std::size_t d) : kind_(k), dim_(d) {}

    void rebuild_quadratic() {
        switch (kind_) {
            case Kind::FullMatrix: {
                SymMatrix m = gram_;
                for (std::size_t i = 0; i < dim_; ++i) m(i, i) += 2.0;
                quad_ = QuadraticSeminorm(std::move(m));
                break;
            }
            case Kind::AdagradRoot: {
                SymMatrix shifted = gram_;
                for (std::size_t i = 0; i < dim_; ++i) shifted(i, i) += 1.0;
                EigenDecomposition eig = sym_eigen(shifted);
                DenseVector roots(eig.dim);
                for (std::size_t k = 0; k < eig.dim; ++k)
                    roots[k] = std::sqrt(std::max(0.0, eig.eigenvalues[k]));
                SymMatrix root = eig.assemble(roots);
                EigenDecomposition root_eig = eig;   // same rotation, rooted spectrum
                root_eig.eigenvalues = roots;
                quad_ = QuadraticSeminorm(std::move(root), std::move(root_eig));
                break;
            }
            case Kind::DiagScale: {
                SymMatrix m(1);
                m(0, 0) = m_max_ * m_max_;
                quad_ = QuadraticSeminorm(std::move(m));
                break;
            }
            default:
                break;
        }
    }

    Kind kind_;
    std::size_t dim_;
    SymMatrix gram_;                         // G_t for matrix kinds
    QuadraticSeminorm quad_;
    double m_max_ = 0.0;                     // diag_scale running max
    std::optional<MaxQuadSeminorm> maxquad_;
};

}  // namespace varinorm
