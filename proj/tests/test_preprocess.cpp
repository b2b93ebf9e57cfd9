#include "extremeclust/preprocess.hpp"

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "extremeclust/rng.hpp"
#include "support/test_util.hpp"

using namespace extremeclust;

namespace {
constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();
}

TEST_SUITE("preprocess") {

TEST_CASE("weekly maximum") {
    RawSeries s;
    s.times = {0, 1, 2, 3, 4, 5, 6};
    s.values = {1, 5, 3, 2, 9, 0, 4};
    const auto out = decluster(s, 7.0, 0.0);
    REQUIRE(out.values.size() == 1);
    CHECK(out.values[0] == doctest::Approx(9.0));
}

TEST_CASE("all-missing period stays missing") {
    RawSeries s;
    s.times = {0, 1, 2, 3};
    s.values = {nan_v, nan_v, 3.0, 4.0};
    const auto out = decluster(s, 2.0, 0.0);
    REQUIRE(out.values.size() == 2);
    CHECK(std::isnan(out.values[0]));
    CHECK(out.values[1] == doctest::Approx(4.0));
}

TEST_CASE("ten years of daily data declusters to about 500 weekly periods") {
    RawSeries s;
    for (int day = 0; day < 3650; ++day) {
        s.times.push_back(day);
        s.values.push_back(static_cast<double>(day % 13));
    }
    const auto out = decluster(s, 7.0, 0.0);
    CHECK(out.values.size() == 522);
}

TEST_CASE("declustering an already declustered series is the identity") {
    RngStream rng(1);
    RawSeries s;
    for (int day = 0; day < 140; ++day) {
        s.times.push_back(day);
        s.values.push_back(rng.uniform01());
    }
    const auto once = decluster(s, 7.0, 0.0);
    const auto twice = decluster(once, 7.0, 0.0);
    CHECK(once.times == twice.times);
    CHECK(once.values == twice.values);
}

TEST_CASE("decluster rejects empty and unordered input") {
    CHECK_THROWS_AS(decluster(RawSeries{}, 7.0, 0.0), std::invalid_argument);
    RawSeries bad;
    bad.times = {1, 1};
    bad.values = {0, 0};
    CHECK_THROWS_AS(decluster(bad, 7.0, 0.0), std::invalid_argument);
}

TEST_CASE("empirical threshold, type-7 interpolation") {
    std::vector<double> values(100);
    std::iota(values.begin(), values.end(), 1.0);
    CHECK(empirical_threshold(values, 0.925) == doctest::Approx(92.575).epsilon(1e-12));

    SUBCASE("constant series returns the constant") {
        CHECK(empirical_threshold(std::vector<double>(20, 3.5), 0.925) == doctest::Approx(3.5));
    }
    SUBCASE("insufficient data errors") {
        CHECK_THROWS_AS(empirical_threshold(std::vector<double>(9, 1.0), 0.9),
                        std::invalid_argument);
    }
}

TEST_CASE("92.5% threshold on about 500 periods gives about 40 exceedances") {
    RngStream rng(2);
    std::vector<double> values(522);
    for (auto& v : values) v = rng.normal();
    const double u = empirical_threshold(values, 0.925);
    const long n_exc = std::count_if(values.begin(), values.end(), [u](double v) { return v > u; });
    CHECK(n_exc >= 35);
    CHECK(n_exc <= 42);
}

TEST_CASE("standardize basics") {
    const auto out = standardize({1.0, 2.0, 3.0});
    CHECK(out[0] == doctest::Approx(-1.0));
    CHECK(out[1] == doctest::Approx(0.0));
    CHECK(out[2] == doctest::Approx(1.0));

    SUBCASE("idempotence") {
        const auto twice = standardize(out);
        for (std::size_t i = 0; i < out.size(); ++i)
            CHECK(twice[i] == doctest::Approx(out[i]).epsilon(1e-12));
    }
    SUBCASE("mean zero variance one with missing values preserved") {
        RngStream rng(3);
        std::vector<double> values(200);
        for (auto& v : values) v = rng.uniform(0.0, 10.0);
        values[17] = nan_v;
        const auto z = standardize(values);
        CHECK(std::isnan(z[17]));
        double sum = 0.0, ss = 0.0;
        int n = 0;
        for (double v : z)
            if (!std::isnan(v)) {
                sum += v;
                ++n;
            }
        CHECK(std::abs(sum / n) < 1e-12);
        const double mean = sum / n;
        for (double v : z)
            if (!std::isnan(v)) ss += (v - mean) * (v - mean);
        CHECK(ss / (n - 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero variance errors") {
        CHECK_THROWS_AS(standardize(std::vector<double>(5, 2.0)), std::invalid_argument);
    }
}

TEST_CASE("empirical chi") {
    CHECK(empirical_chi(10, 20) == doctest::Approx(0.5));
    CHECK(empirical_chi(20, 20) == doctest::Approx(1.0));
    CHECK(empirical_chi(0, 20) == doctest::Approx(0.0));
    CHECK_THROWS_AS(empirical_chi(0, 0), std::invalid_argument);
}

TEST_CASE("dependence counts without missing data") {
    const int T = 400;
    RngStream rng(5);
    Matrix values(2, T);
    for (int t = 0; t < T; ++t) {
        values(0, t) = rng.uniform01();
        values(1, t) = rng.uniform01();
    }
    Matrix d = Matrix::Zero(2, 2);
    d(0, 1) = d(1, 0) = 1.0;
    const auto data = SiteData::build(values, d, {{0, 1}}, Vector::Zero(2), 0.95);
    const auto counts = dependence_counts(data);
    REQUIRE(counts.entries.size() == 1);
    CHECK(counts.entries[0].q_fwd == 20);  // floor((1 - 0.95) * 400)
    CHECK(counts.entries[0].q_rev == 20);
}

TEST_CASE("comonotone pair has empirical chi one") {
    const int T = 200;
    Matrix values(2, T);
    for (int t = 0; t < T; ++t) {
        values(0, t) = t;
        values(1, t) = 10.0 + 2.0 * t;
    }
    Matrix d = Matrix::Zero(2, 2);
    d(0, 1) = d(1, 0) = 1.0;
    const auto data = SiteData::build(values, d, {{0, 1}}, Vector::Zero(2), 0.9);
    const auto counts = dependence_counts(data);
    CHECK(counts.entries[0].p_fwd == counts.entries[0].q_fwd);
    CHECK(empirical_chi(counts.entries[0].p_fwd, counts.entries[0].q_fwd) == doctest::Approx(1.0));
}

TEST_CASE("antithetic pair has empirical chi zero above the median") {
    const int T = 200;
    Matrix values(2, T);
    for (int t = 0; t < T; ++t) {
        values(0, t) = t;
        values(1, t) = -static_cast<double>(t);
    }
    Matrix d = Matrix::Zero(2, 2);
    d(0, 1) = d(1, 0) = 1.0;
    const auto data = SiteData::build(values, d, {{0, 1}}, Vector::Zero(2), 0.9);
    const auto counts = dependence_counts(data);
    CHECK(counts.entries[0].p_fwd == 0);
    CHECK(counts.entries[0].p_rev == 0);
}

TEST_CASE("independent uniforms give chi-hat near the threshold complement") {
    const int T = 10000;
    RngStream rng(7);
    Matrix values(2, T);
    for (int t = 0; t < T; ++t) {
        values(0, t) = rng.uniform01();
        values(1, t) = rng.uniform01();
    }
    Matrix d = Matrix::Zero(2, 2);
    d(0, 1) = d(1, 0) = 1.0;
    const auto data = SiteData::build(values, d, {{0, 1}}, Vector::Zero(2), 0.95);
    const auto counts = dependence_counts(data);
    const double chi = empirical_chi(counts.entries[0].p_fwd, counts.entries[0].q_fwd);
    const double se = std::sqrt(0.05 * 0.95 / counts.entries[0].q_fwd);
    CHECK(std::abs(chi - 0.05) < 3.0 * se);
}

TEST_CASE("missingness makes the counts asymmetric") {
    const int T = 400;
    RngStream rng(9);
    Matrix values(2, T);
    for (int t = 0; t < T; ++t) {
        values(0, t) = rng.uniform01();
        values(1, t) = rng.uniform01();
    }
    for (int t = 0; t < 120; t += 3) values(0, t) = nan_v;
    Matrix d = Matrix::Zero(2, 2);
    d(0, 1) = d(1, 0) = 1.0;
    const auto data = SiteData::build(values, d, {{0, 1}}, Vector::Zero(2), 0.9);
    const auto counts = dependence_counts(data);
    CHECK(counts.entries[0].q_fwd != counts.entries[0].q_rev);
    CHECK(counts.entries[0].p_fwd <= counts.entries[0].q_fwd);
    CHECK(counts.entries[0].p_rev <= counts.entries[0].q_rev);
}

TEST_CASE("voronoi adjacency of a triangle connects all pairs") {
    Matrix pts(3, 2);
    pts << 0.0, 0.0, 1.0, 0.0, 0.3, 0.9;
    const auto adj = voronoi_adjacency(pts);
    CHECK(adj == std::vector<SitePair>{{0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("unit square keeps the four sides and exactly one diagonal") {
    Matrix pts(4, 2);
    pts << 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0;
    const auto adj = voronoi_adjacency(pts);
    CHECK(adj.size() == 5);
    auto has = [&adj](int a, int b) {
        return std::find(adj.begin(), adj.end(), SitePair{a, b}) != adj.end();
    };
    CHECK(has(0, 1));
    CHECK(has(1, 2));
    CHECK(has(2, 3));
    CHECK(has(0, 3));
    CHECK(static_cast<int>(has(0, 2)) + static_cast<int>(has(1, 3)) == 1);

    // must agree with the brute-force empty-circumcircle oracle on the same
    // perturbed coordinates
    const auto oracle = test_util::oracle_delaunay_edges(perturb_locations(pts));
    CHECK(adj == oracle);
}

TEST_CASE("collinear points fall back to consecutive-pair adjacency") {
    Matrix pts(4, 2);
    pts << 0.0, 0.0, 3.0, 3.0, 1.0, 1.0, 2.0, 2.0;
    const auto adj = voronoi_adjacency(pts);
    CHECK(adj == std::vector<SitePair>{{0, 2}, {1, 3}, {2, 3}});
}

TEST_CASE("duplicate points are rejected") {
    Matrix pts(3, 2);
    pts << 0.0, 0.0, 1.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(voronoi_adjacency(pts), std::invalid_argument);
}

TEST_CASE("random point sets match the oracle and planar edge bound") {
    RngStream rng(11);
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 6 + static_cast<int>(rng.uniform_int(9));
        Matrix pts(n, 2);
        for (int i = 0; i < n; ++i) {
            pts(i, 0) = rng.uniform(0.0, 10.0);
            pts(i, 1) = rng.uniform(0.0, 10.0);
        }
        const auto adj = voronoi_adjacency(pts);
        CHECK(static_cast<int>(adj.size()) <= 3 * n - 6);
        CHECK(adj == test_util::oracle_delaunay_edges(perturb_locations(pts)));
    }
}

}  // TEST_SUITE
