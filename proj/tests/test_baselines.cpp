#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <varinorm/baselines.hpp>

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

TEST_CASE("bound report on an orthonormal pair") {
    std::vector<DenseVector> grads{basis_vector(2, 0), basis_vector(2, 1)};
    BoundReport r = bound_report(grads, basis_vector(2, 0));
    REQUIRE(r.rank == 2);
    REQUIRE(r.l2_bound == Catch::Approx(std::sqrt(2.0)));
    REQUIRE(r.fullmatrix_bound == Catch::Approx(std::sqrt(2.0)));
    REQUIRE(r.adagrad_bound == Catch::Approx(std::sqrt(2.0)).margin(1e-10));
    REQUIRE(r.trace_root == Catch::Approx(2.0).margin(1e-10));
    REQUIRE(r.t_eff == Catch::Approx(2.0));
    REQUIRE(r.r_eff == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(r.lambda_max == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("orthogonal comparator zeroes the comparator-dependent bounds") {
    std::vector<DenseVector> grads{basis_vector(2, 0)};
    BoundReport r = bound_report(grads, basis_vector(2, 1));
    REQUIRE(r.fullmatrix_bound == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(r.adagrad_bound == Catch::Approx(0.0).margin(1e-5));
    REQUIRE(r.l2_bound == Catch::Approx(1.0));
    REQUIRE(r.rank == 1);
}

TEST_CASE("bound report rejects an empty stream") {
    REQUIRE_THROWS_AS(bound_report({}, basis_vector(2, 0)), std::invalid_argument);
}

TEST_CASE("oracle eta closed forms") {
    // G = I_4: G^{1/2} = I, unit comparator -> sqrt(1/4)
    DenseVector w = basis_vector(4, 0);
    REQUIRE(oracle_eta(SymMatrix::identity(4), w) == Catch::Approx(0.5).margin(1e-10));

    // comparator orthogonal to the range
    REQUIRE(oracle_eta(SymMatrix::diagonal({0.0, 3.0}), basis_vector(2, 0)) ==
            Catch::Approx(0.0).margin(1e-7));

    // diag(4, 0): sqrt(w^T diag(2,0) w / 2) = 1
    REQUIRE(oracle_eta(SymMatrix::diagonal({4.0, 0.0}), basis_vector(2, 0)) ==
            Catch::Approx(1.0).margin(1e-10));

    REQUIRE_THROWS_AS(oracle_eta(SymMatrix(2), basis_vector(2, 0)), std::domain_error);
}

TEST_CASE("adagrad bound is at most the geometric mean of the other two") {
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<DenseVector> grads;
        for (int t = 0; t < 30; ++t) grads.push_back(random_in_ball(rng, 4));
        DenseVector w = random_in_ball(rng, 4);   // ||w||_2 <= 1
        BoundReport r = bound_report(grads, w);
        REQUIRE(r.adagrad_bound <=
                std::sqrt(r.l2_bound * r.fullmatrix_bound) + 1e-9);
        REQUIRE(r.trace_root >= std::sqrt(r.t_eff) - 1e-9);
        REQUIRE(r.r_eff <= 4.0 + 1e-9);
    }
}

TEST_CASE("ogd baseline steps and projects") {
    OgdAdaptive still(2, 1.0);
    still.update(zeros(2));
    REQUIRE(still.predict() == zeros(2));

    OgdAdaptive l(2, 1.0);
    l.update(basis_vector(2, 0));
    REQUIRE(l.predict()[0] == Catch::Approx(-1.0));
    REQUIRE(l.predict()[1] == 0.0);

    OgdAdaptive ball(2, 5.0, Domain::l2_ball(0.5));
    for (int t = 0; t < 10; ++t) ball.update(basis_vector(2, 0));
    REQUIRE(norm2(ball.predict()) <= 0.5 + 1e-12);

    REQUIRE_THROWS_AS(OgdAdaptive(2, 0.0), std::invalid_argument);
}

TEST_CASE("adagrad baseline closed form in one dimension") {
    AdagradFtrl l(1, 2.0);
    l.update({1.0});
    REQUIRE(l.predict()[0] == Catch::Approx(-1.0 / std::sqrt(2.0)).margin(1e-10));

    AdagradFtrl still(3, 1.0);
    still.update(zeros(3));
    REQUIRE(still.predict() == zeros(3));

    REQUIRE_THROWS_AS(AdagradFtrl(2, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(AdagradFtrl(1, 1.0, Domain::interval(0.0, 1.0)), std::invalid_argument);
}

TEST_CASE("adagrad ball projection keeps iterates feasible") {
    std::mt19937_64 rng(101);
    AdagradFtrl l(3, 10.0, Domain::l2_ball(0.3));
    for (int t = 0; t < 40; ++t) {
        l.update(random_in_ball(rng, 3));
        REQUIRE(norm2(l.predict()) <= 0.3 * (1.0 + 1e-9));
    }
}

TEST_CASE("oracle-tuned adagrad regret is within a small factor of its bound") {
    std::mt19937_64 rng(111);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<DenseVector> grads;
        for (int t = 0; t < 200; ++t) grads.push_back(random_in_ball(rng, 3));
        DenseVector w = random_in_ball(rng, 3);

        SymMatrix gram(3);
        for (const auto& g : grads) gram.add_outer(g);
        double eta = oracle_eta(gram, w);
        if (eta <= 0.0) continue;

        AdagradFtrl l(3, eta);
        double regret = 0.0;
        for (const auto& g : grads) {
            regret += dot(g, l.predict()) - dot(g, w);
            l.update(g);
        }
        BoundReport r = bound_report(grads, w);
        REQUIRE(regret <= 4.0 * r.adagrad_bound + 1e-9);
    }
}
