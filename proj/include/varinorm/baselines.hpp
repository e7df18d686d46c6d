#pragma once

// Reference learners (adaptive OGD, full-matrix AdaGrad in FTRL form) and
// the closed-form evaluators for the three incomparable regret bounds.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"
#include "reduction.hpp"

namespace varinorm {

struct BoundReport {
    double l2_bound = 0.0;           // ||w|| sqrt(sum ||g||_2^2)
    double fullmatrix_bound = 0.0;   // sqrt(r sum <g, w>^2)
    double adagrad_bound = 0.0;      // sqrt(<w, G^{1/2} w> tr G^{1/2})
    int rank = 0;
    double trace_root = 0.0;         // tr G^{1/2}
    double oracle_eta = 0.0;
    // worst-case diagnostics of the same gradient sum
    double t_eff = 0.0;              // tr G = sum ||g||_2^2
    double r_eff = 0.0;              // tr(G^{1/2})^2 / tr G
    double lambda_max = 0.0;
};

inline double oracle_eta(const SymMatrix& gram, const DenseVector& comparator) {
    SymMatrix root = psd_sqrt(gram);
    double tr = 0.0;
    for (std::size_t i = 0; i < root.dim(); ++i) tr += root(i, i);
    if (!(tr > 0.0)) throw std::domain_error("oracle_eta: tr(G^{1/2}) is zero");
    double num = std::max(0.0, quad_form(root, comparator));
    return std::sqrt(num / tr);
}

inline BoundReport bound_report(const std::vector<DenseVector>& gradients,
                                const DenseVector& comparator) {
    if (gradients.empty()) throw std::invalid_argument("bound_report: empty gradient list");
    const std::size_t d = comparator.size();

    SymMatrix gram(d);
    double sum_g2 = 0.0;
    double sum_inner_sq = 0.0;
    for (const auto& g : gradients) {
        if (g.size() != d) throw std::invalid_argument("bound_report: dimension mismatch");
        gram.add_outer(g);
        sum_g2 += dot(g, g);
        double ip = dot(g, comparator);
        sum_inner_sq += ip * ip;
    }

    EigenDecomposition eig = sym_eigen(gram);
    double lmax = std::max(0.0, eig.max_eigenvalue());
    int rank = 0;
    double trace_root = 0.0;
    for (double lam : eig.eigenvalues) {
        if (lam > 1e-10 * lmax && lam > 0.0) ++rank;
        trace_root += std::sqrt(std::max(0.0, lam));
    }

    DenseVector roots(eig.dim);
    for (std::size_t k = 0; k < eig.dim; ++k)
        roots[k] = std::sqrt(std::max(0.0, eig.eigenvalues[k]));
    DenseVector root_w = eig.apply_function(roots, comparator);
    double w_root_w = std::max(0.0, dot(comparator, root_w));

    BoundReport r;
    r.l2_bound = norm2(comparator) * std::sqrt(sum_g2);
    r.fullmatrix_bound = std::sqrt(static_cast<double>(rank) * sum_inner_sq);
    r.adagrad_bound = std::sqrt(w_root_w * trace_root);
    r.rank = rank;
    r.trace_root = trace_root;
    r.oracle_eta = (trace_root > 0.0) ? std::sqrt(w_root_w / trace_root) : 0.0;
    r.t_eff = sum_g2;
    r.r_eff = (sum_g2 > 0.0) ? trace_root * trace_root / sum_g2 : 0.0;
    r.lambda_max = lmax;
    return r;
}

// w_{t+1} = w_t - D g_t / sqrt(sum_{i<=t} ||g_i||_2^2), projected for balls.
class OgdAdaptive {
public:
    OgdAdaptive(std::size_t d, double step_scale, Domain domain = Domain::whole_space())
        : d_scale_(step_scale), domain_(domain), w_(d, 0.0) {
        if (!(step_scale > 0.0)) throw std::invalid_argument("OgdAdaptive: D must be positive");
    }

    const DenseVector& predict() const { return w_; }

    void update(const DenseVector& g) {
        sum_sq_ += dot(g, g);
        if (sum_sq_ > 0.0) axpy(w_, -d_scale_ / std::sqrt(sum_sq_), g);
        if (domain_.kind == Domain::Kind::L2Ball) {
            double n = norm2(w_);
            if (n > domain_.radius)
                for (double& x : w_) x *= domain_.radius / n;
        } else if (domain_.kind == Domain::Kind::Interval) {
            w_[0] = std::clamp(w_[0], domain_.lo, domain_.hi);
        }
    }

private:
    double d_scale_;
    Domain domain_;
    DenseVector w_;
    double sum_sq_ = 0.0;
};

// Full-matrix AdaGrad in FTRL (primal-dual) form:
//   x_{t+1} = argmin (1/eta) x^T (I+G_t)^{1/2} x + <theta_t, x>  over W.
class AdagradFtrl {
public:
    AdagradFtrl(std::size_t d, double eta, Domain domain = Domain::whole_space())
        : eta_(eta), domain_(domain), gram_(d), theta_(d, 0.0), w_(d, 0.0) {
        if (!(eta > 0.0)) throw std::invalid_argument("AdagradFtrl: eta must be positive");
        if (domain.kind == Domain::Kind::Interval)
            throw std::invalid_argument("AdagradFtrl: interval domains unsupported");
    }

    const DenseVector& predict() const { return w_; }

    void update(const DenseVector& g) {
        gram_.add_outer(g);
        axpy(theta_, 1.0, g);

        SymMatrix shifted = gram_;
        for (std::size_t i = 0; i < shifted.dim(); ++i) shifted(i, i) += 1.0;
        EigenDecomposition eig = sym_eigen(shifted);

        auto x_of = [&](double lambda) {
            DenseVector f(eig.dim);
            for (std::size_t k = 0; k < eig.dim; ++k) {
                double mu = std::sqrt(std::max(0.0, eig.eigenvalues[k]));
                f[k] = -1.0 / (2.0 * mu / eta_ + 2.0 * lambda);
            }
            return eig.apply_function(f, theta_);
        };

        w_ = x_of(0.0);
        if (domain_.kind == Domain::Kind::L2Ball && norm2(w_) > domain_.radius) {
            double lo = 0.0, hi = 1.0;
            int guard = 0;
            while (norm2(x_of(hi)) > domain_.radius) {
                hi *= 2.0;
                if (++guard > 200) throw std::runtime_error("AdagradFtrl: projection bracket failed");
            }
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                double n = norm2(x_of(mid));
                if (std::abs(n - domain_.radius) <= 1e-10 * domain_.radius) {
                    lo = hi = mid;
                    break;
                }
                (n > domain_.radius ? lo : hi) = mid;
            }
            w_ = x_of(0.5 * (lo + hi));
        }
    }

private:
    double eta_;
    Domain domain_;
    SymMatrix gram_;
    DenseVector theta_;
    DenseVector w_;
};

}  // namespace varinorm
