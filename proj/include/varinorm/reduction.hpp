#pragma once

// Composition of the coin-betting scaler with the FTRL direction learner,
// plus the projection/surrogate-loss wrapper for constrained domains and
// the per-coordinate diagonal scale-invariant learner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "coin_betting.hpp"
#include "ftrl_direction.hpp"
#include "linalg.hpp"
#include "norm_schedule.hpp"

namespace varinorm {

struct Domain {
    enum class Kind { WholeSpace, L2Ball, Interval };

    Kind kind = Kind::WholeSpace;
    double radius = 0.0;   // L2Ball
    double lo = 0.0;       // Interval (1D)
    double hi = 0.0;

    static Domain whole_space() { return Domain{}; }

    static Domain l2_ball(double r) {
        if (!(r > 0.0)) throw std::invalid_argument("Domain: ball radius must be positive");
        Domain d;
        d.kind = Kind::L2Ball;
        d.radius = r;
        return d;
    }

    static Domain interval(double lo, double hi) {
        if (!(lo <= hi)) throw std::invalid_argument("Domain: empty interval");
        Domain d;
        d.kind = Kind::Interval;
        d.lo = lo;
        d.hi = hi;
        return d;
    }

    bool contains(const DenseVector& v) const {
        switch (kind) {
            case Kind::WholeSpace: return true;
            case Kind::L2Ball: return norm2(v) <= radius;
            case Kind::Interval: return v.size() == 1 && v[0] >= lo && v[0] <= hi;
        }
        return false;
    }
};

namespace detail {

// Euclidean-ball projection under the metric ||.||_M via the KKT system
// w(lambda) = (M + lambda I)^{-1} M v, bisecting on lambda >= 0.
inline DenseVector project_ball(const EigenDecomposition& eig, const DenseVector& v, double r) {
    if (norm2(v) <= r) return v;
    const std::size_t d = eig.dim;

    DenseVector mv(d);
    {
        DenseVector fwd(eig.eigenvalues);
        mv = eig.apply_function(fwd, v);
    }
    auto w_of = [&](double lambda) {
        DenseVector f(d);
        for (std::size_t k = 0; k < d; ++k) {
            double lam = std::max(0.0, eig.eigenvalues[k]);
            f[k] = (lam + lambda > 0.0) ? 1.0 / (lam + lambda) : 0.0;
        }
        return eig.apply_function(f, mv);
    };

    double lo = 0.0;
    double hi = 1.0;
    int guard = 0;
    while (norm2(w_of(hi)) > r) {
        hi *= 2.0;
        if (++guard > 200) throw std::runtime_error("project_ball: bracket expansion failed");
    }
    DenseVector w;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        w = w_of(mid);
        double n = norm2(w);
        if (std::abs(n - r) <= 1e-10 * r) return w;
        (n > r ? lo : hi) = mid;
    }
    w = w_of(0.5 * (lo + hi));
    if (std::abs(norm2(w) - r) > 1e-8 * r)
        throw std::runtime_error("project_ball: bisection did not converge");
    return w;
}

}  // namespace detail

inline DenseVector mahalanobis_project(const EigenDecomposition& eig, const DenseVector& v,
                                       const Domain& domain) {
    switch (domain.kind) {
        case Domain::Kind::WholeSpace:
            return v;
        case Domain::Kind::L2Ball:
            return detail::project_ball(eig, v, domain.radius);
        case Domain::Kind::Interval: {
            if (v.size() != 1) throw std::invalid_argument("mahalanobis_project: interval is 1D");
            return {std::clamp(v[0], domain.lo, domain.hi)};
        }
    }
    throw std::logic_error("mahalanobis_project: unknown domain kind");
}

inline DenseVector mahalanobis_project(const SymMatrix& m, const DenseVector& v,
                                       const Domain& domain) {
    if (domain.kind == Domain::Kind::WholeSpace) return v;
    if (domain.kind == Domain::Kind::Interval)
        return {std::clamp(v.at(0), domain.lo, domain.hi)};
    return mahalanobis_project(sym_eigen(m), v, domain);
}

// One round: predict with the norm at index t-1, receive g_t, feed the
// surrogate loss to FTRL and its inner product to coin betting, then
// advance the schedule. Any other ordering breaks the dual-norm contract.
class VaryingNormLearner {
public:
    VaryingNormLearner(NormSchedule schedule, Domain domain, double epsilon = 1.0)
        : schedule_(std::move(schedule)),
          domain_(domain),
          ftrl_(schedule_.dim(), schedule_.sigma()),
          cb_(epsilon),
          last_x_(schedule_.dim(), 0.0),
          last_v_(schedule_.dim(), 0.0),
          last_w_(schedule_.dim(), 0.0) {
        if (schedule_.kind() == NormSchedule::Kind::MaxQuad &&
            domain_.kind != Domain::Kind::WholeSpace)
            throw std::invalid_argument(
                "VaryingNormLearner: maxquad norms support only the whole space");
    }

    void observe_feature(const DenseVector& f) { schedule_.observe_feature(f); }

    const DenseVector& predict() {
        last_x_ = ftrl_step(ftrl_, schedule_);
        last_y_ = cb_predict(cb_);
        last_v_ = scaled(last_x_, last_y_);
        last_w_ = project(last_v_);
        return last_w_;
    }

    void update(const DenseVector& g) {
        DualNormSq dual_g = schedule_.dual_norm_sq(g);
        if (!dual_g.finite || dual_g.value > 1.0 + 1e-9) {
            std::ostringstream msg;
            msg << "VaryingNormLearner: ||g||_* = "
                << (dual_g.finite ? std::sqrt(dual_g.value) : std::numeric_limits<double>::infinity())
                << " > 1 at round " << round_ + 1;
            throw std::range_error(msg.str());
        }

        DenseVector ghat;
        if (domain_.kind == Domain::Kind::WholeSpace) {
            ghat = g;   // surrogate loss degenerates, unconstrained reduction exactly
        } else if (domain_.contains(last_v_)) {
            ghat = scaled(g, 0.5);
        } else {
            // 0.5 (g + ||g||_* M(v - w)/||v - w||_M), the distance subgradient
            DenseVector diff = last_v_;
            axpy(diff, -1.0, last_w_);
            const SymMatrix& m = schedule_.quad().matrix();
            DenseVector mdiff = m.apply(diff);
            double dist = std::sqrt(std::max(0.0, dot(diff, mdiff)));
            ghat = g;
            if (dist > 0.0) axpy(ghat, std::sqrt(std::max(0.0, dual_g.value)) / dist, mdiff);
            for (double& x : ghat) x *= 0.5;
        }

        DualNormSq dual_hat = schedule_.dual_norm_sq(ghat);
        double dual_sq = dual_hat.finite ? std::min(dual_hat.value, 1.0) : 1.0;
        ftrl_observe(ftrl_, ghat, dual_sq);

        double s = dot(ghat, last_x_);
        if (std::abs(s) > 1.0) {
            if (std::abs(s) > 1.0 + 1e-9)
                throw std::range_error("VaryingNormLearner: |<g_hat, x>| > 1");
            s = std::clamp(s, -1.0, 1.0);
        }
        cb_update(cb_, s);

        schedule_.advance(g);
        ++round_;
    }

    const NormSchedule& schedule() const { return schedule_; }
    const Domain& domain() const { return domain_; }
    const DenseVector& last_direction() const { return last_x_; }
    const DenseVector& last_unprojected() const { return last_v_; }
    const DenseVector& last_prediction() const { return last_w_; }
    double last_scale() const { return last_y_; }
    long round() const { return round_; }
    const CoinBettingState& coin_betting() const { return cb_; }
    const FtrlState& ftrl() const { return ftrl_; }

private:
    DenseVector project(const DenseVector& v) const {
        if (domain_.kind == Domain::Kind::WholeSpace) return v;
        if (domain_.kind == Domain::Kind::Interval)
            return {std::clamp(v.at(0), domain_.lo, domain_.hi)};
        return mahalanobis_project(schedule_.quad().eigen(), v, domain_);
    }

    NormSchedule schedule_;
    Domain domain_;
    FtrlState ftrl_;
    CoinBettingState cb_;
    DenseVector last_x_, last_v_, last_w_;
    double last_y_ = 0.0;
    long round_ = 0;
};

// d independent 1D learners with per-coordinate running-max norms.
// A coordinate whose feature max is still zero outputs exactly zero.
class DiagScaleLearner {
public:
    DiagScaleLearner(std::size_t d, double epsilon = 1.0) : dim_(d) {
        coords_.reserve(d);
        for (std::size_t i = 0; i < d; ++i)
            coords_.emplace_back(NormSchedule::diag_scale(), Domain::whole_space(), epsilon);
    }

    std::size_t dim() const { return dim_; }

    const DenseVector& predict(const DenseVector& f) {
        if (f.size() != dim_) throw std::invalid_argument("DiagScaleLearner: feature dimension");
        if (!all_finite(f)) throw std::invalid_argument("DiagScaleLearner: non-finite feature");
        last_f_ = f;
        last_w_.assign(dim_, 0.0);
        for (std::size_t i = 0; i < dim_; ++i) {
            coords_[i].observe_feature({f[i]});
            last_w_[i] = coords_[i].predict()[0];
        }
        return last_w_;
    }

    // g = nabla * f dispatched coordinate-wise.
    void update(double nabla) {
        if (std::abs(nabla) > 1.0 + 1e-12)
            throw std::range_error("DiagScaleLearner: |loss subgradient| > 1");
        for (std::size_t i = 0; i < dim_; ++i) coords_[i].update({nabla * last_f_[i]});
    }

    // full round with a caller-supplied scalar subgradient oracle
    template <typename GradFn>
    const DenseVector& step(const DenseVector& f, GradFn&& grad_at_prediction) {
        predict(f);
        update(grad_at_prediction(dot(f, last_w_)));
        return last_w_;
    }

    const DenseVector& last_prediction() const { return last_w_; }
    const VaryingNormLearner& coordinate(std::size_t i) const { return coords_.at(i); }

private:
    std::size_t dim_;
    std::vector<VaryingNormLearner> coords_;
    DenseVector last_f_, last_w_;
};

// Full-matrix scale invariance: a maxquad-norm learner on the whole space
// wrapped with the feature/subgradient protocol.
class FullMatrixScaleLearner {
public:
    FullMatrixScaleLearner(std::size_t d, double epsilon = 1.0)
        : inner_(NormSchedule::maxquad(d), Domain::whole_space(), epsilon) {}

    std::size_t dim() const { return inner_.schedule().dim(); }

    const DenseVector& predict(const DenseVector& f) {
        last_f_ = f;
        inner_.observe_feature(f);
        return inner_.predict();
    }

    void update(double nabla) {
        if (std::abs(nabla) > 1.0 + 1e-12)
            throw std::range_error("FullMatrixScaleLearner: |loss subgradient| > 1");
        inner_.update(scaled(last_f_, nabla));
    }

    template <typename GradFn>
    const DenseVector& step(const DenseVector& f, GradFn&& grad_at_prediction) {
        const DenseVector& w = predict(f);
        update(grad_at_prediction(dot(f, w)));
        return inner_.last_prediction();
    }

    const DenseVector& last_prediction() const { return inner_.last_prediction(); }
    const VaryingNormLearner& learner() const { return inner_; }

private:
    VaryingNormLearner inner_;
    DenseVector last_f_;
};

}  // namespace varinorm
