#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <varinorm/norm_schedule.hpp>

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

}  // namespace

TEST_CASE("full_matrix schedule after one gradient") {
    auto s = NormSchedule::full_matrix(2);
    s.advance(basis_vector(2, 0));
    const SymMatrix& m = s.quad().matrix();
    REQUIRE(m(0, 0) == Catch::Approx(3.0));
    REQUIRE(m(1, 1) == Catch::Approx(2.0));
    REQUIRE(m(0, 1) == Catch::Approx(0.0));
}

TEST_CASE("adagrad_root schedule after one gradient") {
    auto s = NormSchedule::adagrad_root(2);
    s.advance(basis_vector(2, 0));
    const SymMatrix& m = s.quad().matrix();
    REQUIRE(m(0, 0) == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    REQUIRE(m(1, 1) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(m(0, 1) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("diag schedule tracks the running feature max") {
    auto s = NormSchedule::diag_scale();
    REQUIRE(s.diag_scale_max() == 0.0);
    s.observe_feature({3.0});
    s.observe_feature({-1.0});
    s.observe_feature({2.0});
    REQUIRE(s.diag_scale_max() == 3.0);
    REQUIRE(s.norm({2.0}) == Catch::Approx(6.0));
    s.advance({0.5});   // gradients leave the diag norm untouched
    REQUIRE(s.diag_scale_max() == 3.0);
}

TEST_CASE("dual norm under the identity") {
    auto s = NormSchedule::static_identity(2);
    auto d = s.dual_norm_sq({0.6, 0.8});
    REQUIRE(d.finite);
    REQUIRE(d.value == Catch::Approx(1.0));
}

TEST_CASE("diag dual norm honors the 0/0 = 0 convention") {
    auto s = NormSchedule::diag_scale();
    auto zero = s.dual_norm_sq({0.0});
    REQUIRE(zero.finite);
    REQUIRE(zero.value == 0.0);
    auto inf = s.dual_norm_sq({0.5});
    REQUIRE_FALSE(inf.finite);

    s.observe_feature({2.0});
    auto d = s.dual_norm_sq({1.0});
    REQUIRE(d.finite);
    REQUIRE(d.value == Catch::Approx(0.25));
}

TEST_CASE("dual norm of a gradient outside the range is infinite") {
    auto s = NormSchedule::static_norm(SymMatrix::diagonal({2.0, 0.0}));
    auto d = s.dual_norm_sq(basis_vector(2, 1));
    REQUIRE_FALSE(d.finite);
}

TEST_CASE("schedule kind bookkeeping") {
    REQUIRE(NormSchedule::static_identity(3).kind() == NormSchedule::Kind::Static);
    REQUIRE(NormSchedule::maxquad(3).needs_feature());
    REQUIRE(NormSchedule::diag_scale().needs_feature());
    REQUIRE_FALSE(NormSchedule::full_matrix(3).needs_feature());
    REQUIRE_THROWS_AS(NormSchedule::full_matrix(3).observe_feature({1.0, 0.0, 0.0}),
                      std::logic_error);
    REQUIRE_THROWS_AS(NormSchedule::maxquad(3).quad(), std::logic_error);
}

TEST_CASE("norms are monotone along any gradient stream") {
    std::mt19937_64 rng(5);
    const std::size_t d = 4;
    std::vector<DenseVector> probes;
    for (int i = 0; i < 100; ++i) probes.push_back(random_in_ball(rng, d));

    auto check = [&](NormSchedule s, bool feed_features) {
        std::vector<double> prev(probes.size(), 0.0);
        for (std::size_t i = 0; i < probes.size(); ++i) prev[i] = s.norm(probes[i]);
        for (int t = 0; t < 40; ++t) {
            if (feed_features) s.observe_feature(random_in_ball(rng, d));
            s.advance(random_in_ball(rng, d));
            for (std::size_t i = 0; i < probes.size(); ++i) {
                double now = s.norm(probes[i]);
                REQUIRE(now >= prev[i] - 1e-10);
                prev[i] = now;
            }
        }
    };
    check(NormSchedule::static_identity(d), false);
    check(NormSchedule::full_matrix(d), false);
    check(NormSchedule::adagrad_root(d), false);
    check(NormSchedule::maxquad(d), true);

    // diag: monotone in the feature stream
    auto s = NormSchedule::diag_scale();
    double prev = 0.0;
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
        s.observe_feature({unif(rng)});
        double now = s.norm({1.0});
        REQUIRE(now >= prev);
        prev = now;
    }
}

TEST_CASE("seminorm axioms hold for quadratic and maxquad norms") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t d = 3;

    auto mq = NormSchedule::maxquad(d);
    auto quad = NormSchedule::full_matrix(d);
    for (int t = 0; t < 10; ++t) {
        mq.observe_feature(random_in_ball(rng, d));
        mq.advance(random_in_ball(rng, d));
        quad.advance(random_in_ball(rng, d));
    }

    for (const NormSchedule* s : {&mq, &quad}) {
        for (int trial = 0; trial < 200; ++trial) {
            DenseVector x(d), y(d);
            for (double& v : x) v = gauss(rng);
            for (double& v : y) v = gauss(rng);
            double c = gauss(rng);
            REQUIRE(s->norm(scaled(x, c)) ==
                    Catch::Approx(std::abs(c) * s->norm(x)).margin(1e-10));
            DenseVector sum = x;
            axpy(sum, 1.0, y);
            REQUIRE(s->norm(sum) <= s->norm(x) + s->norm(y) + 1e-10);
        }
    }
}

TEST_CASE("unit Euclidean gradients have dual norm at most one") {
    std::mt19937_64 rng(23);
    const std::size_t d = 5;
    for (NormSchedule s : {NormSchedule::full_matrix(d), NormSchedule::adagrad_root(d)}) {
        for (int t = 0; t < 60; ++t) {
            DenseVector g = random_in_ball(rng, d);
            auto dual = s.dual_norm_sq(g);
            REQUIRE(dual.finite);
            REQUIRE(dual.value <= 1.0 + 1e-9);
            s.advance(g);
        }
    }
}

TEST_CASE("potential sums respect their closed-form caps") {
    std::mt19937_64 rng(31);
    const std::size_t d = 5;
    const int T = 200;

    SymMatrix gram(d);
    double sum_inv = 0.0, sum_root = 0.0;
    for (int t = 0; t < T; ++t) {
        DenseVector g = random_in_ball(rng, d);
        gram.add_outer(g);

        SymMatrix shifted = gram;
        for (std::size_t i = 0; i < d; ++i) shifted(i, i) += 1.0;
        sum_inv += dot(g, pseudo_solve(shifted, g).x);

        EigenDecomposition eig = sym_eigen(gram);
        DenseVector inv_roots(d, 0.0);
        double cutoff = 1e-12 * std::max(0.0, eig.max_eigenvalue());
        for (std::size_t k = 0; k < d; ++k)
            if (eig.eigenvalues[k] > cutoff) inv_roots[k] = 1.0 / std::sqrt(eig.eigenvalues[k]);
        sum_root += dot(g, eig.apply_function(inv_roots, g));
    }

    EigenDecomposition final_eig = sym_eigen(gram);
    int rank = 0;
    double trace_root = 0.0;
    for (double lam : final_eig.eigenvalues) {
        if (lam > 1e-10 * final_eig.max_eigenvalue()) ++rank;
        trace_root += std::sqrt(std::max(0.0, lam));
    }
    REQUIRE(sum_inv <= rank * std::log(T + 1.0) * (1.0 + 1e-8));
    REQUIRE(sum_root <= 2.0 * trace_root * (1.0 + 1e-8));
}

TEST_CASE("maxquad dual surrogate requires a feature and stays bounded") {
    auto s = NormSchedule::maxquad(2);
    REQUIRE_THROWS_AS(s.dual_norm_sq({1.0, 0.0}), std::logic_error);

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int t = 0; t < 40; ++t) {
        DenseVector f = random_in_ball(rng, 2);
        s.observe_feature(f);
        double nabla = unif(rng);
        DenseVector g = scaled(f, nabla);   // g = nabla f with |nabla| <= 1
        auto dual = s.dual_norm_sq(g);
        REQUIRE(dual.finite);
        REQUIRE(dual.value <= 1.0 + 1e-9);
        s.advance(g);
    }
}
