#pragma once

// Synthetic loss-sequence generators: the cycling adversary with its
// approximately-low-rank tail, seeded Gaussian linear losses, and the
// supervised feature/label stream with 1-Lipschitz scalar losses.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace varinorm {

struct GradientStream {
    std::vector<DenseVector> gradients;
    DenseVector comparator;
};

enum class ScalarLoss { Absolute, Hinge, Logistic };

inline ScalarLoss parse_scalar_loss(const std::string& s) {
    if (s == "absolute") return ScalarLoss::Absolute;
    if (s == "hinge") return ScalarLoss::Hinge;
    if (s == "logistic") return ScalarLoss::Logistic;
    throw std::invalid_argument("unknown loss kind: " + s);
}

struct SupervisedStream {
    std::vector<DenseVector> features;
    DenseVector labels;
    ScalarLoss loss = ScalarLoss::Absolute;
    DenseVector hidden_model;
};

// Subgradient of c_t at prediction p; |result| <= 1, kinks break to 0.
inline double scalar_loss_subgradient(ScalarLoss loss, double p, double label) {
    switch (loss) {
        case ScalarLoss::Absolute: {
            double diff = p - label;
            return diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        }
        case ScalarLoss::Hinge: {
            double margin = 1.0 - label * p;
            return margin > 0.0 ? -label : 0.0;
        }
        case ScalarLoss::Logistic:
            return -label / (1.0 + std::exp(label * p));
    }
    return 0.0;
}

inline double scalar_loss_value(ScalarLoss loss, double p, double label) {
    switch (loss) {
        case ScalarLoss::Absolute: return std::abs(p - label);
        case ScalarLoss::Hinge: return std::max(0.0, 1.0 - label * p);
        case ScalarLoss::Logistic: {
            double z = -label * p;
            return z > 30.0 ? z : std::log1p(std::exp(z));
        }
    }
    return 0.0;
}

namespace detail {

inline DenseVector random_unit_vector(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    DenseVector v(d);
    double n = 0.0;
    while (n == 0.0) {
        for (double& x : v) x = gauss(rng);
        n = norm2(v);
    }
    for (double& x : v) x /= n;
    return v;
}

// Gram-Schmidt on Gaussian columns; columns of the result are orthonormal.
inline std::vector<DenseVector> random_orthonormal(std::mt19937_64& rng, std::size_t d) {
    std::vector<DenseVector> basis;
    basis.reserve(d);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (basis.size() < d) {
        DenseVector v(d);
        for (double& x : v) x = gauss(rng);
        for (const auto& b : basis) axpy(v, -dot(v, b), b);
        double n = norm2(v);
        if (n < 1e-8) continue;
        for (double& x : v) x /= n;
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace detail

// Cycling adversary: d a perfect square, T = 2d + 2k sqrt(d). First d rounds
// walk the basis, the next d undo them, then the tail cycles the first
// sqrt(d) directions with alternating signs while drifting along v_d.
inline GradientStream gen_cycling_adversary(std::size_t d, std::size_t k,
                                            bool rotate_basis = false,
                                            std::uint64_t rotate_seed = 0) {
    const auto root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(d))));
    if (d == 0 || root * root != d)
        throw std::invalid_argument("gen_cycling_adversary: d must be a perfect square");
    if (k < 1) throw std::invalid_argument("gen_cycling_adversary: k must be >= 1");

    std::vector<DenseVector> basis;
    if (rotate_basis) {
        std::mt19937_64 rng(rotate_seed);
        basis = detail::random_orthonormal(rng, d);
    } else {
        basis.reserve(d);
        for (std::size_t i = 0; i < d; ++i) basis.push_back(basis_vector(d, i));
    }

    GradientStream out;
    out.gradients.reserve(2 * d + 2 * k * root);
    for (std::size_t t = 0; t < d; ++t) out.gradients.push_back(basis[t]);
    for (std::size_t t = 0; t < d; ++t) out.gradients.push_back(scaled(basis[t], -1.0));

    const double drift = 1.0 / std::sqrt(static_cast<double>(d));
    const double swing = std::sqrt(1.0 - 1.0 / static_cast<double>(d));
    for (std::size_t j = 0; j < 2 * k; ++j) {
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t i = 0; i < root; ++i) {
            DenseVector g = scaled(basis[d - 1], drift);
            axpy(g, sign * swing, basis[i]);
            out.gradients.push_back(std::move(g));
        }
    }
    out.comparator = scaled(basis[d - 1], -1.0);
    return out;
}

// Seeded random linear losses with ||g||_2 <= 1 and a random unit comparator.
inline GradientStream gen_gaussian(std::size_t d, std::size_t T, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    GradientStream out;
    out.gradients.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        DenseVector g = detail::random_unit_vector(rng, d);
        double mag = unif(rng);
        for (double& x : g) x *= mag;
        out.gradients.push_back(std::move(g));
    }
    out.comparator = detail::random_unit_vector(rng, d);
    return out;
}

// Hidden unit model, features with ||f||_2 <= 1, labels flipped with
// probability 0.1. Optional rescale (diagonal factors or a full matrix)
// applied to the emitted features only; labels stay fixed.
inline SupervisedStream gen_supervised(std::size_t d, std::size_t T, std::uint64_t seed,
                                       ScalarLoss loss) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SupervisedStream out;
    out.loss = loss;
    out.hidden_model = detail::random_unit_vector(rng, d);
    out.features.reserve(T);
    out.labels.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        DenseVector f = detail::random_unit_vector(rng, d);
        double mag = unif(rng);
        for (double& x : f) x *= mag;
        double margin = dot(f, out.hidden_model);
        bool flip = unif(rng) < 0.1;
        double label;
        if (loss == ScalarLoss::Absolute) {
            label = flip ? -margin : margin;
        } else {
            double sign = margin >= 0.0 ? 1.0 : -1.0;
            label = flip ? -sign : sign;
        }
        out.features.push_back(std::move(f));
        out.labels.push_back(label);
    }
    return out;
}

inline void rescale_features_diag(SupervisedStream& s, const DenseVector& factors) {
    for (auto& f : s.features) {
        if (f.size() != factors.size())
            throw std::invalid_argument("rescale_features_diag: dimension mismatch");
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= factors[i];
    }
}

inline void rescale_features_full(SupervisedStream& s, const std::vector<DenseVector>& rows) {
    for (auto& f : s.features) {
        DenseVector out(rows.size(), 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i) out[i] = dot(rows[i], f);
        f = std::move(out);
    }
}

// Random matrix with prescribed condition number: U diag(s) V^T with
// singular values log-spaced in [1, cond].
inline std::vector<DenseVector> random_conditioned_matrix(std::size_t d, double cond,
                                                          std::uint64_t seed) {
    if (!(cond >= 1.0)) throw std::invalid_argument("random_conditioned_matrix: cond must be >= 1");
    std::mt19937_64 rng(seed);
    auto u = detail::random_orthonormal(rng, d);
    auto v = detail::random_orthonormal(rng, d);
    std::vector<DenseVector> rows(d, DenseVector(d, 0.0));
    for (std::size_t k = 0; k < d; ++k) {
        double frac = (d == 1) ? 0.0 : static_cast<double>(k) / (d - 1);
        double s = std::exp(frac * std::log(cond));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) rows[i][j] += u[k][i] * s * v[k][j];
    }
    return rows;
}

// Log-uniform per-coordinate factors in [lo, hi].
inline DenseVector random_diag_factors(std::size_t d, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
    DenseVector out(d);
    for (double& x : out) x = std::exp(unif(rng));
    return out;
}

}  // namespace varinorm
