#pragma once

// One-dimensional parameter-free learner. Bets a clipped FTRL fraction of
// current wealth on the sign of the next loss; the regret bound evaluator
// is the closed form used by the acceptance tests.

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace varinorm {

struct CoinBettingState {
    double epsilon = 1.0;   // initial wealth
    double wealth = 1.0;
    double v = 0.0;         // betting fraction, |v| <= 1/2
    double sum_z = 0.0;
    double sum_z_sq = 0.0;
    long round = 0;

    explicit CoinBettingState(double eps = 1.0) : epsilon(eps), wealth(eps) {
        if (!(eps > 0.0)) throw std::invalid_argument("CoinBettingState: epsilon must be positive");
    }
};

inline double cb_predict(const CoinBettingState& s) { return s.v * s.wealth; }

// z = g / (1 - g v); wealth multiplies by (1 - g v); the next fraction is
// the clipped minimizer of (5 + sum z^2)/2 * v^2 + (sum z) * v over [-1/2, 1/2].
inline void cb_update(CoinBettingState& s, double g) {
    if (std::abs(g) > 1.0 + 1e-12)
        throw std::range_error("cb_update: |g| > 1, norm schedule contract violated upstream");
    g = std::clamp(g, -1.0, 1.0);
    if (g == 0.0) {
        ++s.round;
        return;
    }
    double factor = 1.0 - g * s.v;       // >= 1/2 since |g| <= 1, |v| <= 1/2
    double z = g / factor;
    s.wealth *= factor;
    s.sum_z += z;
    s.sum_z_sq += z * z;
    s.v = std::clamp(-s.sum_z / (5.0 + s.sum_z_sq), -0.5, 0.5);
    ++s.round;
}

// eps + 2|w| max( sqrt((3 + 3 S) log(e + |w|(7 + 4 S)/eps)),
//                 2 log(e + |w|(7 + 4 S)/eps) )   with S = sum g_t^2.
inline double cb_regret_bound(double comparator, double sum_g_sq, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("cb_regret_bound: epsilon must be positive");
    if (sum_g_sq < 0.0) throw std::invalid_argument("cb_regret_bound: negative sum of squares");
    double w = std::abs(comparator);
    double lg = std::log(std::exp(1.0) + w * (7.0 + 4.0 * sum_g_sq) / epsilon);
    double term = std::max(std::sqrt((3.0 + 3.0 * sum_g_sq) * lg), 2.0 * lg);
    return epsilon + 2.0 * w * term;
}

}  // namespace varinorm
