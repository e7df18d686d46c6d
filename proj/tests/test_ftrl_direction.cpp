#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <varinorm/ftrl_direction.hpp>

using namespace varinorm;

namespace {

DenseVector random_in_ball(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    DenseVector g(d);
    double n = 0.0;
    while (n == 0.0) {
        for (double& x : g) x = gauss(rng);
        n = norm2(g);
    }
    double mag = unif(rng) / n;
    for (double& x : g) x *= mag;
    return g;
}

// Independent numeric minimizer of a x^T M x + <theta, x> over the M-ball.
// Whitened substitution u = M^{1/2} x turns the feasible set into the
// Euclidean unit ball, where projected gradient with radial projection is
// exact; run it there and map back.
DenseVector numeric_argmin(const SymMatrix& m, const DenseVector& theta, double a, int iters) {
    EigenDecomposition eig = sym_eigen(m);
    DenseVector inv_root(eig.dim);
    for (std::size_t k = 0; k < eig.dim; ++k)
        inv_root[k] = 1.0 / std::sqrt(std::max(eig.eigenvalues[k], 1e-12));
    DenseVector theta_w = eig.apply_function(inv_root, theta);   // M^{-1/2} theta

    double step = 1.0 / (2.0 * a);
    DenseVector u(theta.size(), 0.0);
    for (int k = 0; k < iters; ++k) {
        DenseVector grad = scaled(u, 2.0 * a);
        axpy(grad, 1.0, theta_w);
        axpy(u, -step, grad);
        double n = norm2(u);
        if (n > 1.0)
            for (double& v : u) v /= n;
    }
    return eig.apply_function(inv_root, u);   // x = M^{-1/2} u
}

}  // namespace

TEST_CASE("zero theta gives the origin") {
    FtrlState s(3);
    auto x = ftrl_step(s, NormSchedule::static_identity(3));
    REQUIRE(x == zeros(3));
}

TEST_CASE("interior closed form under the identity") {
    FtrlState s(2);
    ftrl_observe(s, {1.0, 0.0}, 1.0);
    s.dual_sq_sum = 0.0;   // isolate: a = 1/sqrt(2), minimizer -theta/(2a) = -theta/sqrt(2)
    auto x = ftrl_step(s, NormSchedule::static_identity(2));
    REQUIRE(x[0] == Catch::Approx(-1.0 / std::sqrt(2.0)).margin(1e-12));
    REQUIRE(x[1] == Catch::Approx(0.0).margin(1e-12));

    auto numeric = numeric_argmin(SymMatrix::identity(2), s.theta, 1.0 / std::sqrt(2.0), 20000);
    REQUIRE(norm2({x[0] - numeric[0], x[1] - numeric[1]}) < 1e-6);
}

TEST_CASE("large theta lands on the boundary") {
    FtrlState s(2);
    s.theta = {10.0, 0.0};
    auto x = ftrl_step(s, NormSchedule::static_identity(2));
    REQUIRE(x[0] == Catch::Approx(-1.0).margin(1e-10));
    REQUIRE(x[1] == Catch::Approx(0.0).margin(1e-10));

    auto numeric = numeric_argmin(SymMatrix::identity(2), s.theta, 1.0 / std::sqrt(2.0), 20000);
    REQUIRE(norm2({x[0] - numeric[0], x[1] - numeric[1]}) < 1e-6);
}

TEST_CASE("observe accumulates theta and the dual sum") {
    FtrlState s(2);
    ftrl_observe(s, zeros(2), 0.0);
    REQUIRE(s.theta == zeros(2));
    REQUIRE(s.dual_sq_sum == 0.0);
    REQUIRE(s.round == 1);

    ftrl_observe(s, basis_vector(2, 0), 1.0);
    REQUIRE(s.theta[0] == 1.0);
    REQUIRE(s.dual_sq_sum == 1.0);

    ftrl_observe(s, scaled(basis_vector(2, 0), -1.0), 1.0);
    REQUIRE(s.theta == zeros(2));
    REQUIRE(s.dual_sq_sum == 2.0);
}

TEST_CASE("observe rejects contract violations") {
    FtrlState s(2);
    REQUIRE_THROWS_AS(ftrl_observe(s, basis_vector(2, 0), 1.1), std::range_error);
    REQUIRE_THROWS_AS(ftrl_observe(s, {1.0}, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(ftrl_observe(s, basis_vector(2, 0), -0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(FtrlState(2, 1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(FtrlState(2, 0.0), std::invalid_argument);
}

TEST_CASE("outputs stay feasible for every schedule kind") {
    std::mt19937_64 rng(19);
    const std::size_t d = 4;
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    auto drive = [&](NormSchedule schedule, bool features) {
        FtrlState s(d, schedule.sigma());
        for (int t = 0; t < 50; ++t) {
            DenseVector f;
            if (features) {
                f = random_in_ball(rng, d);
                schedule.observe_feature(f);
            }
            DenseVector x = ftrl_step(s, schedule);
            REQUIRE(schedule.norm_sq(x) <= 1.0 + 1e-9);
            DenseVector g = features ? scaled(f, unif(rng)) : random_in_ball(rng, d);
            auto dual = schedule.dual_norm_sq(g);
            REQUIRE(dual.finite);
            ftrl_observe(s, g, std::min(dual.value, 1.0));
            schedule.advance(g);
        }
    };
    drive(NormSchedule::static_identity(d), false);
    drive(NormSchedule::full_matrix(d), false);
    drive(NormSchedule::adagrad_root(d), false);
    drive(NormSchedule::maxquad(d), true);
}

TEST_CASE("closed form matches the numeric minimizer on random instances") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t d = 5;
    for (int trial = 0; trial < 100; ++trial) {
        SymMatrix m(d);
        for (int k = 0; k < 7; ++k) {
            DenseVector a(d);
            for (double& v : a) v = gauss(rng);
            m.add_outer(a);
        }
        for (std::size_t i = 0; i < d; ++i) m(i, i) += 0.1;

        FtrlState s(d);
        for (double& v : s.theta) v = 3.0 * gauss(rng);
        s.dual_sq_sum = std::abs(gauss(rng)) * 10.0;

        auto schedule = NormSchedule::static_norm(m);
        DenseVector closed = ftrl_step(s, schedule);
        double a_coeff = std::sqrt(1.0 + s.dual_sq_sum) / std::sqrt(2.0);
        DenseVector numeric = numeric_argmin(m, s.theta, a_coeff, 30000);

        DenseVector diff = closed;
        axpy(diff, -1.0, numeric);
        REQUIRE(std::sqrt(std::max(0.0, quad_form(m, diff))) < 1e-6);
    }
}

TEST_CASE("regret inequality against unit-norm comparators") {
    std::mt19937_64 rng(37);
    const std::size_t d = 4;
    for (NormSchedule schedule :
         {NormSchedule::static_identity(d), NormSchedule::full_matrix(d),
          NormSchedule::adagrad_root(d)}) {
        FtrlState s(d, schedule.sigma());
        std::vector<DenseVector> grads;
        std::vector<DenseVector> xs;
        double dual_sum_before_last = 0.0, dual_sum = 0.0;
        const int T = 60;
        for (int t = 0; t < T; ++t) {
            xs.push_back(ftrl_step(s, schedule));
            DenseVector g = random_in_ball(rng, d);
            auto dual = schedule.dual_norm_sq(g);
            double dsq = std::min(dual.value, 1.0);
            if (t < T - 1) dual_sum_before_last += dsq;
            dual_sum += dsq;
            ftrl_observe(s, g, dsq);
            grads.push_back(g);
            schedule.advance(g);
        }
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int c = 0; c < 20; ++c) {
            DenseVector w(d);
            for (double& v : w) v = gauss(rng);
            double n = schedule.norm(w);
            if (n > 0.0)
                for (double& v : w) v /= n;   // ||w||_{T-1} = 1 exactly
            double regret = 0.0;
            for (int t = 0; t < T; ++t) regret += dot(grads[t], xs[t]) - dot(grads[t], w);
            double wnorm_sq = schedule.norm_sq(w);
            double bound = wnorm_sq * std::sqrt(1.0 + dual_sum_before_last) + std::sqrt(dual_sum);
            REQUIRE(regret <= bound + 1e-6);
        }
    }
}
