#include "extremeclust/dependence.hpp"

#include <cmath>

#include "doctest.h"
#include "extremeclust/rng.hpp"
#include "extremeclust/simgen.hpp"

using namespace extremeclust;

namespace {

ClusterState two_cluster_state(double gamma0, double eps0, double eps1, double beta) {
    ClusterState s;
    s.n_clusters = 2;
    s.centres = {0, 2};
    s.labels = {0, 0, 1, 1};
    s.sigma = Vector::Constant(2, 1.0);
    s.xi = Vector::Zero(2);
    s.gamma0 = gamma0;
    s.epsilon = Vector(2);
    s.epsilon << eps0, eps1;
    s.beta = beta;
    return s;
}

}  // namespace

TEST_SUITE("dependence") {

TEST_CASE("gamma reparametrization") {
    CHECK(gamma_from_epsilon(3.0, 0.0) == doctest::Approx(3.0));
    CHECK(gamma_from_epsilon(3.0, std::log(1.5)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(gamma_from_epsilon(3.0, 10.0) == doctest::Approx(3.0 * std::exp(-10.0)).epsilon(1e-12));
    CHECK(gamma_from_epsilon(3.0, 10.0) > 0.0);
}

TEST_CASE("bb_shape uniform case and mean identity") {
    const auto [alpha, beta] = bb_shape(std::log(2.0), 1.0, 1.0);
    CHECK(alpha == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(beta == doctest::Approx(1.0));

    RngStream rng(3);
    for (int i = 0; i < 200; ++i) {
        const double g = rng.uniform(0.1, 5.0);
        const double d = rng.uniform(0.05, 1.0);
        const double b = rng.uniform(0.5, 30.0);
        const auto [a2, b2] = bb_shape(g, d, b);
        CHECK(a2 / (a2 + b2) == doctest::Approx(std::exp(-g * d)).epsilon(1e-12));
    }
}

TEST_CASE("bb_shape direct evaluation") {
    const auto [alpha, beta] = bb_shape(2.0, 0.3, 10.0);
    CHECK(alpha == doctest::Approx(10.0 / std::expm1(0.6)).epsilon(1e-14));
    CHECK(alpha == doctest::Approx(12.163692151608709).epsilon(1e-12));
}

TEST_CASE("bb_shape requires positive distance") {
    CHECK_THROWS_AS(bb_shape(1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("betabinom pmf basics") {
    CHECK(betabinom_logpmf(0, 0, 2.0, 3.0) == doctest::Approx(0.0));
    // q = 1: pmf(1) = alpha / (alpha + beta)
    CHECK(std::exp(betabinom_logpmf(1, 1, 2.0, 3.0)) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK_THROWS_AS(betabinom_logpmf(3, 2, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("betabinom pmf sums to one") {
    for (int q : {1, 5, 20, 200}) {
        double total = 0.0;
        for (int p = 0; p <= q; ++p) total += std::exp(betabinom_logpmf(p, q, 5.0, 10.0));
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("monotonicity of the implied mean in distance") {
    double prev = 1.0;
    for (double d : {0.1, 0.2, 0.4, 0.8}) {
        const auto [a, b] = bb_shape(2.0, d, 10.0);
        const double mean = a / (a + b);
        CHECK(mean < prev);
        prev = mean;
    }
}

TEST_CASE("pair likelihood selects the right decay rate") {
    // gamma_1 = 4 e^{-log 4} = 1, gamma0 = 4; distinct values so the pmf
    // pins down which one was used.
    ClusterState s = two_cluster_state(4.0, std::log(4.0), std::log(4.0), 10.0);
    DependenceCounts::PairCounts same;
    same.k = 0;
    same.kp = 1;
    same.q_fwd = same.q_rev = 20;
    same.p_fwd = 12;
    same.p_rev = 14;
    DependenceCounts counts;
    counts.entries = {same};
    counts.finalize();
    const auto& e = counts.entries[0];

    const double d = 0.4;
    const auto [a_same, b_same] = bb_shape(1.0, d, 10.0);
    const double expected_same = 0.5 * (betabinom_logpmf(12, 20, a_same, b_same) +
                                        betabinom_logpmf(14, 20, a_same, b_same));
    CHECK(pair_loglik(e, s, d) == doctest::Approx(expected_same).epsilon(1e-12));

    DependenceCounts::PairCounts cross = same;
    cross.k = 1;
    cross.kp = 2;  // different clusters
    counts.entries = {cross};
    counts.finalize();
    const auto [a_x, b_x] = bb_shape(4.0, d, 10.0);
    const double expected_cross = 0.5 * (betabinom_logpmf(12, 20, a_x, b_x) +
                                         betabinom_logpmf(14, 20, a_x, b_x));
    CHECK(pair_loglik(counts.entries[0], s, d) == doctest::Approx(expected_cross).epsilon(1e-12));
    CHECK(expected_same != doctest::Approx(expected_cross));
}

TEST_CASE("epsilon zero makes same-cluster and cross-cluster coincide") {
    ClusterState s = two_cluster_state(2.5, 0.0, 0.0, 8.0);
    DependenceCounts::PairCounts e;
    e.q_fwd = e.q_rev = 15;
    e.p_fwd = 7;
    e.p_rev = 9;
    e.k = 0;
    e.kp = 1;  // same cluster
    DependenceCounts counts;
    counts.entries = {e};
    counts.finalize();
    const double same = pair_loglik(counts.entries[0], s, 0.3);
    counts.entries[0].k = 1;
    counts.entries[0].kp = 2;  // cross
    const double cross = pair_loglik(counts.entries[0], s, 0.3);
    CHECK(same == doctest::Approx(cross).epsilon(1e-14));
}

TEST_CASE("symmetric counts reduce to a single orientation") {
    ClusterState s = two_cluster_state(2.0, 0.1, 0.2, 10.0);
    DependenceCounts::PairCounts e;
    e.k = 0;
    e.kp = 1;
    e.q_fwd = e.q_rev = 20;
    e.p_fwd = e.p_rev = 11;
    DependenceCounts counts;
    counts.entries = {e};
    counts.finalize();
    const auto [a, b] = bb_shape(s.gamma(0), 0.25, s.beta);
    CHECK(pair_loglik(counts.entries[0], s, 0.25) ==
          doctest::Approx(betabinom_logpmf(11, 20, a, b)).epsilon(1e-12));
}

TEST_CASE("pairs with Q = 0 leave the likelihood unchanged") {
    const auto& map = fixture_map();
    ClusterState s;
    s.n_clusters = 1;
    s.centres = {0};
    s.labels.assign(20, 0);
    s.sigma = Vector::Constant(1, 2.0);
    s.xi = Vector::Constant(1, 0.1);
    s.gamma0 = 2.0;
    s.epsilon = Vector::Zero(1);
    s.beta = 10.0;

    RngStream rng(5);
    auto counts = simulate_dependence_counts(s.labels, map.distances, map.adjacency, 2.0,
                                             Vector::Zero(1), 10.0, 20, rng);
    SiteData data = SiteData::build(Matrix::Constant(20, 3, 1.0), map.distances, map.adjacency,
                                    Vector::Zero(20), 0.95, map.locations);
    const double base = loglik_dep(s, counts, data);

    DependenceCounts::PairCounts empty;
    empty.k = counts.entries.front().k;
    empty.kp = counts.entries.front().kp;
    empty.q_fwd = empty.q_rev = empty.p_fwd = empty.p_rev = 0;
    counts.entries.push_back(empty);
    counts.finalize();
    CHECK(loglik_dep(s, counts, data) == doctest::Approx(base).epsilon(1e-14));
    CHECK(counts.empty_pairs().size() == 1);
}

TEST_CASE("likelihood favours the generating dependence parameters") {
    // Three-cluster truth: gamma_j = 2 with gamma0 = 3, against gamma_j = 4.
    const auto& map = fixture_map();
    const Vector eps_true = Vector::Constant(3, std::log(3.0 / 2.0));
    SiteData data = SiteData::build(Matrix::Constant(20, 3, 1.0), map.distances, map.adjacency,
                                    Vector::Zero(20), 0.95, map.locations);

    ClusterState truth;
    truth.n_clusters = 3;
    truth.centres = map.true_centres;
    truth.labels = map.true_labels;
    truth.sigma = Vector::Constant(3, 2.0);
    truth.xi = Vector::Constant(3, 0.1);
    truth.gamma0 = 3.0;
    truth.epsilon = eps_true;
    truth.beta = 10.0;

    ClusterState wrong = truth;
    wrong.epsilon = Vector::Constant(3, 1e-12);
    wrong.gamma0 = 4.0;  // gamma_j ~= 4 while the data decay at gamma_j = 2

    int wins = 0;
    for (int rep = 0; rep < 100; ++rep) {
        RngStream rng(1000 + rep);
        const auto counts = simulate_dependence_counts(map.true_labels, map.distances,
                                                       map.adjacency, 3.0, eps_true, 10.0, 20,
                                                       rng);
        if (loglik_dep(truth, counts, data) > loglik_dep(wrong, counts, data)) ++wins;
    }
    CHECK(wins >= 95);
}

TEST_CASE("relabelling invariance") {
    const auto& map = fixture_map();
    SiteData data = SiteData::build(Matrix::Constant(20, 3, 1.0), map.distances, map.adjacency,
                                    Vector::Zero(20), 0.95, map.locations);
    RngStream rng(7);
    const Vector eps = Vector::Constant(3, 0.3);
    const auto counts = simulate_dependence_counts(map.true_labels, map.distances, map.adjacency,
                                                   3.0, eps, 10.0, 20, rng);

    ClusterState a;
    a.n_clusters = 3;
    a.centres = map.true_centres;
    a.labels = map.true_labels;
    a.sigma = Vector::Constant(3, 2.0);
    a.xi = Vector::Constant(3, 0.1);
    a.gamma0 = 3.0;
    a.epsilon = Vector(3);
    a.epsilon << 0.1, 0.4, 0.7;
    a.beta = 10.0;

    // Swap clusters 0 and 2 everywhere.
    ClusterState b = a;
    b.centres = {a.centres[2], a.centres[1], a.centres[0]};
    for (auto& z : b.labels) z = z == 0 ? 2 : (z == 2 ? 0 : z);
    b.epsilon(0) = a.epsilon(2);
    b.epsilon(2) = a.epsilon(0);

    CHECK(loglik_dep(a, counts, data) == doctest::Approx(loglik_dep(b, counts, data)).epsilon(1e-13));
}

}  // TEST_SUITE
