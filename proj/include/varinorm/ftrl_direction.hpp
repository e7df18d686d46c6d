#pragma once

// Constrained FTRL direction learner. The round-t output minimizes
//   psi(x) + <theta, x>,  psi(x) = sqrt(1 + S)/sqrt(2 sigma) * ||x||_t^2
// over the unit ball of ||.||_t. Quadratic norms have a closed form; the
// maxquad seminorm uses a projected-subgradient inner solver run in
// whitened coordinates so its iterates commute with feature transformations.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"
#include "norm_schedule.hpp"

namespace varinorm {

struct FtrlState {
    DenseVector theta;          // sum of observed gradients
    double dual_sq_sum = 0.0;   // S = sum of ||g_i||^2_{i-1,*}
    double sigma = 1.0;
    long round = 0;

    explicit FtrlState(std::size_t d, double sigma_ = 1.0)
        : theta(d, 0.0), sigma(sigma_) {
        if (!(sigma_ > 0.0 && sigma_ <= 1.0))
            throw std::invalid_argument("FtrlState: sigma must lie in (0, 1]");
    }
};

inline void ftrl_observe(FtrlState& s, const DenseVector& g, double dual_sq) {
    if (g.size() != s.theta.size()) throw std::invalid_argument("ftrl_observe: dimension mismatch");
    if (dual_sq > 1.0 + 1e-9)
        throw std::range_error("ftrl_observe: dual norm exceeds 1, schedule contract violated");
    if (!all_finite(g) || !std::isfinite(dual_sq) || dual_sq < 0.0)
        throw std::invalid_argument("ftrl_observe: non-finite input");
    axpy(s.theta, 1.0, g);
    s.dual_sq_sum += dual_sq;
    ++s.round;
}

namespace detail {

inline bool is_zero(const DenseVector& v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

// min a x^T M x + <theta, x>  s.t.  x^T M x <= 1.
// Unconstrained minimizer -M^+ theta / (2a); when it leaves the ball, the
// KKT solution is the same direction rescaled to unit M-norm.
inline DenseVector step_quadratic(const FtrlState& s, const QuadraticSeminorm& norm) {
    if (is_zero(s.theta)) return zeros(s.theta.size());
    double a = std::sqrt(1.0 + s.dual_sq_sum) / std::sqrt(2.0 * s.sigma);
    PseudoSolveResult sol = norm.pinv_apply(s.theta);
    if (!sol.in_range)
        throw std::domain_error("ftrl_step: theta has a component outside range(M)");
    double theta_dual_sq = std::max(0.0, dot(s.theta, sol.x));   // ||theta||^2_{M,*}
    if (theta_dual_sq == 0.0) return zeros(s.theta.size());
    DenseVector x = scaled(sol.x, -1.0 / (2.0 * a));
    if (norm.norm_sq(x) <= 1.0) return x;
    return scaled(sol.x, -1.0 / std::sqrt(theta_dual_sq));
}

// Whitened projected subgradient for the maxquad seminorm. Coordinates are
// whitened by P = G + sum_i f_i f_i^T, which transforms congruently with the
// features; in those coordinates a feature map becomes a rotation, which the
// Euclidean subgradient steps and the radial retraction both commute with.
inline DenseVector step_maxquad(const FtrlState& s, const MaxQuadSeminorm& norm) {
    const std::size_t d = s.theta.size();
    if (is_zero(s.theta)) return zeros(d);

    SymMatrix p = norm.gram();
    for (const auto& f : norm.features()) p.add_outer(f);
    EigenDecomposition eig = sym_eigen(p);
    double cutoff = 1e-12 * std::max(eig.max_eigenvalue(), 0.0);

    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < eig.dim; ++k)
        if (eig.eigenvalues[k] > cutoff) keep.push_back(k);
    const std::size_t r = keep.size();
    if (r == 0) return zeros(d);

    // basis columns b_j = q_j / sqrt(lambda_j); data maps by B^T, points by B
    auto to_whitened = [&](const DenseVector& v) {
        DenseVector u(r, 0.0);
        for (std::size_t j = 0; j < r; ++j) {
            std::size_t k = keep[j];
            double sum = 0.0;
            for (std::size_t i = 0; i < d; ++i) sum += eig.q(i, k) * v[i];
            u[j] = sum / std::sqrt(eig.eigenvalues[k]);
        }
        return u;
    };
    auto from_whitened = [&](const DenseVector& u) {
        DenseVector x(d, 0.0);
        for (std::size_t j = 0; j < r; ++j) {
            std::size_t k = keep[j];
            double c = u[j] / std::sqrt(eig.eigenvalues[k]);
            for (std::size_t i = 0; i < d; ++i) x[i] += eig.q(i, k) * c;
        }
        return x;
    };

    DenseVector theta_w = to_whitened(s.theta);
    std::vector<DenseVector> feats_w;
    feats_w.reserve(norm.features().size());
    for (const auto& f : norm.features()) feats_w.push_back(to_whitened(f));

    // G in whitened coordinates, r x r
    SymMatrix gram_w(r);
    {
        const SymMatrix& g = norm.gram();
        for (std::size_t j = 0; j < r; ++j) {
            DenseVector col(d, 0.0);
            std::size_t k = keep[j];
            double sc = 1.0 / std::sqrt(eig.eigenvalues[k]);
            for (std::size_t i = 0; i < d; ++i) col[i] = eig.q(i, k) * sc;
            DenseVector gcol = g.apply(col);
            DenseVector w = to_whitened(gcol);
            for (std::size_t i = 0; i < r; ++i) {
                gram_w(i, j) = w[i];
            }
        }
        // symmetrize against the column-by-column rounding
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i + 1; j < r; ++j) {
                double m = 0.5 * (gram_w(i, j) + gram_w(j, i));
                gram_w(i, j) = m;
                gram_w(j, i) = m;
            }
    }

    auto norm_sq_w = [&](const DenseVector& u) {
        double best = 0.0;
        for (const auto& f : feats_w) {
            double ip = dot(f, u);
            best = std::max(best, ip * ip);
        }
        return std::max(0.0, quad_form(gram_w, u)) + 2.0 * best;
    };

    const double a = std::sqrt(1.0 + s.dual_sq_sum) / std::sqrt(2.0 * s.sigma);
    auto objective = [&](const DenseVector& u) { return a * norm_sq_w(u) + dot(theta_w, u); };

    DenseVector u(r, 0.0);
    DenseVector avg(r, 0.0);
    constexpr int max_iters = 500;
    constexpr int stall_window = 20;
    std::vector<double> obj_history;
    obj_history.reserve(max_iters);

    for (int k = 1; k <= max_iters; ++k) {
        // argmax feature (ties break to the earliest stored feature)
        std::size_t jbest = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < feats_w.size(); ++j) {
            double ip = dot(feats_w[j], u);
            if (ip * ip > best) {
                best = ip * ip;
                jbest = j;
            }
        }
        DenseVector grad = gram_w.apply(u);
        for (double& x : grad) x *= 2.0 * a;
        if (!feats_w.empty()) axpy(grad, 4.0 * a * dot(feats_w[jbest], u), feats_w[jbest]);
        axpy(grad, 1.0, theta_w);

        axpy(u, -1.0 / std::sqrt(static_cast<double>(k)), grad);
        double nsq = norm_sq_w(u);
        if (nsq > 1.0) {
            double inv = 1.0 / std::sqrt(nsq);
            for (double& x : u) x *= inv;
        }
        for (std::size_t i = 0; i < r; ++i) avg[i] += (u[i] - avg[i]) / k;

        double obj = objective(avg);
        obj_history.push_back(obj);
        if (k > stall_window) {
            double prev = obj_history[k - 1 - stall_window];
            if (std::abs(obj - prev) < 1e-9 * std::max(1.0, std::abs(obj))) break;
        }
    }

    double nsq = norm_sq_w(avg);
    if (nsq > 1.0) {
        double inv = 1.0 / std::sqrt(nsq);
        for (double& x : avg) x *= inv;
    }
    return from_whitened(avg);
}

}  // namespace detail

// Feasible point with ||x||_t <= 1 minimizing the regularized past losses.
inline DenseVector ftrl_step(const FtrlState& s, const NormSchedule& schedule) {
    if (schedule.kind() == NormSchedule::Kind::MaxQuad)
        return detail::step_maxquad(s, schedule.maxquad_norm());
    return detail::step_quadratic(s, schedule.quad());
}

}  // namespace varinorm
