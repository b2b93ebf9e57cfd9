#include "extremeclust/data_model.hpp"

#include <algorithm>

#include "doctest.h"
#include "extremeclust/simgen.hpp"

using namespace extremeclust;

namespace {

SiteData tiny_data(int n_sites) {
    Matrix d = Matrix::Zero(n_sites, n_sites);
    for (int i = 0; i < n_sites; ++i)
        for (int j = 0; j < n_sites; ++j) d(i, j) = std::abs(i - j);
    std::vector<SitePair> adj;
    for (int i = 0; i + 1 < n_sites; ++i) adj.push_back({i, i + 1});
    return SiteData::build(Matrix::Constant(n_sites, 8, 1.0), d, adj, Vector::Zero(n_sites),
                           0.95);
}

}  // namespace

TEST_SUITE("data_model") {

TEST_CASE("single centre labels everything to cluster one") {
    const auto d = tiny_data(6);
    const auto labels = assign_labels({3}, d.distances);
    CHECK(labels == std::vector<int>(6, 0));
}

TEST_CASE("a centre is assigned to its own cluster") {
    const auto d = tiny_data(6);
    const auto labels = assign_labels({1, 4}, d.distances);
    CHECK(labels[1] == 0);
    CHECK(labels[4] == 1);
}

TEST_CASE("fixture map three-centre labelling matches brute force and the bundled truth") {
    const auto& map = fixture_map();
    const auto labels = assign_labels(map.true_centres, map.distances);
    for (int k = 0; k < 20; ++k) {
        int best = 0;
        for (int j = 1; j < 3; ++j)
            if (map.distances(k, map.true_centres[j]) < map.distances(k, map.true_centres[best]))
                best = j;
        CHECK(labels[k] == best);
    }
    CHECK(labels == map.true_labels);
}

TEST_CASE("ties break to the lowest cluster index") {
    // site 1 is equidistant to centres 0 and 2
    Matrix d = Matrix::Zero(3, 3);
    d(0, 1) = d(1, 0) = 1.0;
    d(1, 2) = d(2, 1) = 1.0;
    d(0, 2) = d(2, 0) = 2.0;
    const auto [labels, ties] = assign_labels_with_ties({0, 2}, d / 2.0);
    CHECK(labels[1] == 0);
    CHECK(ties == std::vector<int>{1});
}

TEST_CASE("errors on duplicate or empty centres") {
    const auto d = tiny_data(4);
    CHECK_THROWS_AS(assign_labels({1, 1}, d.distances), std::invalid_argument);
    CHECK_THROWS_AS(assign_labels({}, d.distances), std::invalid_argument);
    CHECK_THROWS_AS(assign_labels({9}, d.distances), std::invalid_argument);
}

TEST_CASE("assign_labels is permutation covariant") {
    const auto& map = fixture_map();
    const std::vector<int> centres = {2, 7, 15};
    const std::vector<int> permuted = {15, 2, 7};
    const auto a = assign_labels(centres, map.distances);
    const auto b = assign_labels(permuted, map.distances);
    // cluster j of `centres` is cluster (j+1) mod 3 of `permuted`
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == (a[k] + 1) % 3);
}

TEST_CASE("every site is nearest its own cluster centre") {
    const auto& map = fixture_map();
    const std::vector<int> centres = {1, 5, 12, 19};
    const auto labels = assign_labels(centres, map.distances);
    for (int k = 0; k < 20; ++k)
        for (int j = 0; j < 4; ++j)
            CHECK(map.distances(k, centres[labels[k]]) <= map.distances(k, centres[j]));
    // and every cluster is nonempty
    for (int j = 0; j < 4; ++j)
        CHECK(std::count(labels.begin(), labels.end(), j) > 0);
}

TEST_CASE("validate_state accepts a coherent state") {
    const auto d = tiny_data(6);
    ClusterState s;
    s.n_clusters = 2;
    s.centres = {1, 4};
    s.labels = assign_labels(s.centres, d.distances);
    s.sigma = Vector::Constant(2, 1.5);
    s.xi = Vector::Zero(2);
    s.gamma0 = 2.0;
    s.epsilon = Vector::Constant(2, 0.3);
    s.beta = 10.0;
    CHECK(validate_state(s, d).empty());

    SUBCASE("hand-edited labels are reported") {
        s.labels[0] = 1;
        const auto violations = validate_state(s, d);
        REQUIRE(!violations.empty());
        CHECK(violations[0] == "labels/centres mismatch");
    }
    SUBCASE("negative epsilon is reported") {
        s.epsilon(0) = -0.1;
        const auto violations = validate_state(s, d);
        REQUIRE(!violations.empty());
        CHECK(violations[0].find("epsilon negative") != std::string::npos);
    }
    SUBCASE("nonpositive sigma is reported") {
        s.sigma(1) = 0.0;
        CHECK(!validate_state(s, d).empty());
    }
}

TEST_CASE("distances are rescaled to unit maximum with the scale stored") {
    const auto d = tiny_data(6);
    CHECK(d.distances.maxCoeff() == doctest::Approx(1.0));
    CHECK(d.distance_scale == doctest::Approx(5.0));
}

TEST_CASE("structural data errors throw") {
    Matrix vals = Matrix::Constant(3, 4, 1.0);
    Matrix d = Matrix::Zero(3, 3);
    d(0, 1) = d(1, 0) = 1.0;
    d(1, 2) = d(2, 1) = 1.0;
    d(0, 2) = d(2, 0) = 2.0;

    SUBCASE("asymmetric distances") {
        Matrix bad = d;
        bad(0, 1) = 0.5;
        CHECK_THROWS_AS(SiteData::build(vals, bad, {{0, 1}}, Vector::Zero(3), 0.95),
                        std::invalid_argument);
    }
    SUBCASE("self adjacency") {
        CHECK_THROWS_AS(SiteData::build(vals, d, {{1, 1}}, Vector::Zero(3), 0.95),
                        std::invalid_argument);
    }
    SUBCASE("unknown site in adjacency") {
        CHECK_THROWS_AS(SiteData::build(vals, d, {{0, 7}}, Vector::Zero(3), 0.95),
                        std::invalid_argument);
    }
}

}  // TEST_SUITE
