#include "extremeclust/posterior.hpp"

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "extremeclust/rng.hpp"
#include "extremeclust/simgen.hpp"
#include "support/test_util.hpp"

using namespace extremeclust;

namespace {

TraceStore trace_from_labels(const std::vector<std::vector<int>>& labelings) {
    TraceStore trace;
    trace.n_sites = static_cast<int>(labelings.front().size());
    long iter = 0;
    for (const auto& labels : labelings) {
        TraceSample s;
        s.iteration = ++iter;
        s.state.labels = labels;
        s.state.n_clusters = 1 + *std::max_element(labels.begin(), labels.end());
        s.state.sigma = Vector::Constant(s.state.n_clusters, 2.0);
        s.state.xi = Vector::Constant(s.state.n_clusters, 0.1);
        s.state.epsilon = Vector::Zero(s.state.n_clusters);
        trace.samples.push_back(std::move(s));
    }
    return trace;
}

// Oracle: exhaustive expected-VI minimization over all set partitions.
std::pair<std::vector<int>, double> brute_force_point_estimate(
    const std::vector<std::vector<int>>& sampled) {
    const int K = static_cast<int>(sampled.front().size());
    const auto candidates = test_util::all_partitions(K);
    std::vector<int> best;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& cand : candidates) {
        double score = 0.0;
        for (const auto& z : sampled) score += vi_distance(cand, z);
        score /= static_cast<double>(sampled.size());
        if (score < best_score) {
            best_score = score;
            best = cand;
        }
    }
    return {best, best_score};
}

}  // namespace

TEST_SUITE("posterior") {

TEST_CASE("similarity matrix basics") {
    SUBCASE("single cluster everywhere gives all ones") {
        const auto trace = trace_from_labels({{0, 0, 0}, {0, 0, 0}});
        CHECK(similarity_matrix(trace).isApprox(Matrix::Constant(3, 3, 1.0)));
    }
    SUBCASE("half the samples together gives one half") {
        const auto trace = trace_from_labels({{0, 0}, {0, 1}});
        const auto s = similarity_matrix(trace);
        CHECK(s(0, 1) == doctest::Approx(0.5));
        CHECK(s(0, 0) == doctest::Approx(1.0));
        CHECK(s(1, 0) == s(0, 1));
    }
    SUBCASE("invariant to relabelling within samples") {
        const auto a = similarity_matrix(trace_from_labels({{0, 1, 1, 2}}));
        const auto b = similarity_matrix(trace_from_labels({{2, 0, 0, 1}}));
        CHECK(a == b);
    }
}

TEST_CASE("variation of information") {
    const std::vector<int> a = {0, 1};
    const std::vector<int> b = {0, 0};
    CHECK(vi_distance(a, a) == doctest::Approx(0.0));
    CHECK(vi_distance(a, b) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    RngStream rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<int> x(8), y(8);
        for (auto& v : x) v = static_cast<int>(rng.uniform_int(3));
        for (auto& v : y) v = static_cast<int>(rng.uniform_int(3));
        CHECK(vi_distance(x, y) == doctest::Approx(vi_distance(y, x)).epsilon(1e-13));
        CHECK(vi_distance(x, y) >= 0.0);
    }
}

TEST_CASE("point estimate of a constant trace is that partition with score zero") {
    const auto trace = trace_from_labels({{0, 1, 0, 2}, {0, 1, 0, 2}, {0, 1, 0, 2}});
    const auto est = point_estimate(trace);
    CHECK(est.labels == std::vector<int>{0, 1, 0, 2});
    CHECK(est.expected_vi == doctest::Approx(0.0));
    CHECK(est.n_clusters == 3);
    CHECK(est.clusters[0] == std::vector<int>{0, 2});
}

TEST_CASE("point estimate matches exhaustive minimization on tiny traces") {
    RngStream rng(2);
    for (int rep = 0; rep < 12; ++rep) {
        const int K = 3 + static_cast<int>(rng.uniform_int(3));  // 3..5 sites
        const int N = 3 + static_cast<int>(rng.uniform_int(8));  // 3..10 samples
        std::vector<std::vector<int>> sampled(N, std::vector<int>(K));
        for (auto& z : sampled) {
            for (auto& v : z) v = static_cast<int>(rng.uniform_int(3));
            // canonicalize so labels are a valid 0-based clustering
            std::vector<int> map(3, -1);
            int next = 0;
            for (auto& v : z) {
                if (map[v] < 0) map[v] = next++;
                v = map[v];
            }
        }
        const auto est = point_estimate(trace_from_labels(sampled));
        const auto [oracle, oracle_score] = brute_force_point_estimate(sampled);
        CHECK(est.expected_vi == doctest::Approx(oracle_score).epsilon(1e-12));
        CHECK(vi_distance(est.labels, oracle) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("point estimate on larger K never loses to a sampled candidate") {
    RngStream rng(3);
    const int K = 14;
    std::vector<std::vector<int>> sampled;
    for (int i = 0; i < 40; ++i) {
        std::vector<int> z(K);
        for (int k = 0; k < K; ++k) z[k] = k / 5 + (rng.uniform01() < 0.15 ? 1 : 0);
        sampled.push_back(z);
    }
    const auto trace = trace_from_labels(sampled);
    const auto est = point_estimate(trace);
    for (const auto& z : sampled) {
        double score = 0.0;
        for (const auto& zi : sampled) score += vi_distance(z, zi);
        score /= static_cast<double>(sampled.size());
        CHECK(est.expected_vi <= score + 1e-12);
    }
}

TEST_CASE("swmc summaries") {
    SUBCASE("constant scale") {
        const auto trace = trace_from_labels({{0, 0}, {0, 0}});
        const auto s = swmc_scale(trace, 0);
        CHECK(s.mean == doctest::Approx(2.0));
        CHECK(s.median == doctest::Approx(2.0));
    }
    SUBCASE("equal mixture averages the two cluster values") {
        auto trace = trace_from_labels({{0, 1}, {1, 0}});
        trace.samples[0].state.sigma << 1.0, 3.0;
        trace.samples[1].state.sigma << 1.0, 3.0;
        // site 0 alternates between the sigma = 1 and sigma = 3 cluster
        const auto s = swmc_scale(trace, 0);
        CHECK(s.mean == doctest::Approx(2.0));
    }
}

TEST_CASE("return level") {
    SUBCASE("log limit at nu = 0") {
        CHECK(return_level(0.0, 1.0, 0.0, std::exp(1.0), 1.0) == doctest::Approx(1.0));
    }
    SUBCASE("direct evaluation") {
        const double expected = 10.0 + 20.0 * (std::pow(97.5, 0.1) - 1.0);
        CHECK(return_level(10.0, 2.0, 0.1, 3.9, 25.0) == doctest::Approx(expected).epsilon(1e-13));
        CHECK(return_level(10.0, 2.0, 0.1, 3.9, 25.0) == doctest::Approx(21.6179).epsilon(1e-4));
    }
    SUBCASE("continuity at the nu -> 0 limit") {
        CHECK(std::abs(return_level(0.0, 1.0, 1e-8, 3.9, 25.0) -
                       return_level(0.0, 1.0, 0.0, 3.9, 25.0)) < 1e-6);
    }
    SUBCASE("strictly increasing in tau and psi") {
        double prev = 0.0;
        for (double tau : {5.0, 10.0, 50.0, 200.0}) {
            const double rl = return_level(1.0, 2.0, 0.1, 3.9, tau);
            CHECK(rl > prev);
            prev = rl;
        }
        CHECK(return_level(1.0, 2.5, 0.1, 3.9, 25.0) > return_level(1.0, 2.0, 0.1, 3.9, 25.0));
    }
    SUBCASE("level below threshold errors") {
        CHECK_THROWS_AS(return_level(0.0, 1.0, 0.1, 0.5, 1.0), std::invalid_argument);
    }
}

TEST_CASE("exceedance rate arithmetic") {
    CHECK(exceedance_rate(52.0, 0.925) == doctest::Approx(3.9).epsilon(1e-9));
}

TEST_CASE("posterior distribution of the cluster count sums to one") {
    const auto trace = trace_from_labels({{0, 0, 0}, {0, 1, 0}, {0, 1, 2}, {0, 0, 0}});
    const auto pmf = posterior_n_clusters(trace);
    double total = 0.0;
    for (const auto& [j, p] : pmf) total += p;
    CHECK(total == doctest::Approx(1.0));
    CHECK(pmf.front().first == 1);
    CHECK(pmf.front().second == doctest::Approx(0.5));
}

TEST_CASE("three-cluster run yields a block-structured similarity matrix") {
    const auto sd = make_study(3, 21);
    ChainConfig cfg;
    cfg.iterations = 150000;
    cfg.burn_in = 75000;
    cfg.thinning = 25;
    cfg.seed = 9;
    cfg.initial_clusters = 5;
    const auto trace = run_chain(sd.data, sd.counts, sd.exc, cfg, MoveConfig{});
    const auto s = similarity_matrix(trace);
    const auto& truth = sd.true_labels;
    double within = 0.0, across = 0.0;
    long n_within = 0, n_across = 0;
    for (int k = 0; k < 20; ++k)
        for (int kp = k + 1; kp < 20; ++kp) {
            if (truth[k] == truth[kp]) {
                within += s(k, kp);
                ++n_within;
            } else {
                across += s(k, kp);
                ++n_across;
            }
        }
    CHECK(within / n_within > 0.8);
    CHECK(across / n_across < 0.2);
}

TEST_CASE("cwmc keeps the imposed partition and agrees with swmc at J = 1") {
    const auto sd = make_study(1, 77);
    ChainConfig cfg;
    cfg.iterations = 30000;
    cfg.burn_in = 10000;
    cfg.thinning = 10;
    cfg.seed = 5;

    PartitionEstimate part;
    part.n_clusters = 1;
    part.labels.assign(20, 0);
    part.clusters = {std::vector<int>(20)};
    std::iota(part.clusters[0].begin(), part.clusters[0].end(), 0);

    const auto res = cwmc(part, sd.data, sd.counts, sd.exc, cfg);
    for (const auto& s : res.trace.samples) CHECK(s.state.n_clusters == 1);
    REQUIRE(res.scale.size() == 1);
    CHECK(res.scale[0].median == doctest::Approx(2.0).epsilon(0.1));

    // the same model sampled trans-dimensionally concentrates on J = 1, so
    // site-wise summaries agree within Monte Carlo error
    ChainConfig full = cfg;
    full.iterations = 60000;
    full.burn_in = 20000;
    full.initial_clusters = 3;
    const auto trace = run_chain(sd.data, sd.counts, sd.exc, full, MoveConfig{});
    const auto site = swmc_scale(trace, 4);
    CHECK(site.median == doctest::Approx(res.scale[0].median).epsilon(0.05));
}

}  // TEST_SUITE
