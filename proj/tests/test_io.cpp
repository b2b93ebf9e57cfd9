#include "extremeclust/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "extremeclust/rng.hpp"
#include "extremeclust/simgen.hpp"

using namespace extremeclust;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("extremeclust_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("config parsing") {
    const auto cfg = Config::parse_string(
        "# comment\n"
        "[chain]\n"
        "iterations = 1000\n"
        "seed = 17   # trailing comment\n"
        "move_probs = 0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1\n"
        "\n"
        "[data]\n"
        "series = data/series.csv\n"
        "standardize = true\n");
    CHECK(cfg.get_long("chain", "iterations") == 1000);
    CHECK(cfg.get_long_or("chain", "burn_in", 500) == 500);
    CHECK(cfg.get("data", "series") == "data/series.csv");
    CHECK(cfg.get_bool_or("data", "standardize", false));
    CHECK(cfg.get_list_or("chain", "move_probs", {}).size() == 7);
    CHECK_THROWS(cfg.get("chain", "missing_key"));
    CHECK_THROWS(Config::parse_string("novalue\n"));
}

TEST_CASE("series round trip with missing values") {
    TempDir dir;
    SeriesTable table;
    table.site_ids = {1, 2};
    table.series.resize(2);
    table.series[0].times = {0, 1, 2};
    table.series[0].values = {1.5, std::nan(""), 2.25};
    table.series[1].times = {0, 1, 2};
    table.series[1].values = {0.5, 0.25, 0.125};
    write_series_csv(dir.file("series.csv"), table);
    const auto back = read_series_csv(dir.file("series.csv"));
    REQUIRE(back.site_ids == table.site_ids);
    CHECK(back.series[0].values[0] == 1.5);
    CHECK(std::isnan(back.series[0].values[1]));
    CHECK(back.series[1].values == table.series[1].values);
}

TEST_CASE("matrix round trip preserves every bit") {
    TempDir dir;
    RngStream rng(1);
    Matrix m(4, 5);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) m(i, j) = rng.normal() * std::pow(10.0, (int)rng.uniform_int(8) - 4);
    write_matrix_csv(dir.file("m.csv"), m);
    const auto back = read_matrix_csv(dir.file("m.csv"));
    CHECK(back == m);
}

TEST_CASE("adjacency and counts round trips") {
    TempDir dir;
    const std::vector<SitePair> pairs = {{0, 3}, {1, 2}, {2, 3}};
    write_adjacency_csv(dir.file("adj.csv"), pairs);
    CHECK(read_adjacency_csv(dir.file("adj.csv")) == pairs);

    RngStream rng(2);
    const auto& map = fixture_map();
    const auto counts = simulate_dependence_counts(fixture_map().true_labels, map.distances,
                                                   map.adjacency, 3.0,
                                                   Vector::Constant(3, 0.4), 10.0, 20, rng);
    write_counts_csv(dir.file("counts.csv"), counts);
    const auto back = read_counts_csv(dir.file("counts.csv"));
    REQUIRE(back.entries.size() == counts.entries.size());
    for (std::size_t i = 0; i < counts.entries.size(); ++i) {
        CHECK(back.entries[i].k == counts.entries[i].k);
        CHECK(back.entries[i].kp == counts.entries[i].kp);
        CHECK(back.entries[i].q_fwd == counts.entries[i].q_fwd);
        CHECK(back.entries[i].p_fwd == counts.entries[i].p_fwd);
        CHECK(back.entries[i].q_rev == counts.entries[i].q_rev);
        CHECK(back.entries[i].p_rev == counts.entries[i].p_rev);
    }
}

TEST_CASE("partition and thresholds round trips") {
    TempDir dir;
    const std::vector<int> labels = {0, 1, 1, 0, 2};
    write_partition_csv(dir.file("partition.csv"), labels);
    CHECK(read_partition_csv(dir.file("partition.csv")) == labels);

    Vector u(3);
    u << 0.25, 1.5, -3.75;
    write_thresholds_csv(dir.file("u.csv"), u);
    CHECK(read_thresholds_csv(dir.file("u.csv")) == u);
}

TEST_CASE("trace round trip preserves states exactly") {
    TempDir dir;
    const auto sd = make_study(1, 5);
    ChainConfig cfg;
    cfg.iterations = 300;
    cfg.burn_in = 100;
    cfg.thinning = 10;
    cfg.seed = 3;
    cfg.initial_clusters = 2;
    const auto trace = run_chain(sd.data, sd.counts, sd.exc, cfg, MoveConfig{});
    write_trace_csv(dir.file("trace.csv"), trace);
    const auto back = read_trace_csv(dir.file("trace.csv"));
    REQUIRE(back.samples.size() == trace.samples.size());
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const auto& a = trace.samples[i];
        const auto& b = back.samples[i];
        CHECK(a.iteration == b.iteration);
        CHECK(a.log_post == b.log_post);
        CHECK(a.state.centres == b.state.centres);
        CHECK(a.state.labels == b.state.labels);
        CHECK(a.state.sigma == b.state.sigma);
        CHECK(a.state.xi == b.state.xi);
        CHECK(a.state.gamma0 == b.state.gamma0);
        CHECK(a.state.epsilon == b.state.epsilon);
        CHECK(a.state.beta == b.state.beta);
        CHECK(a.state.hyper.kappa == b.state.hyper.kappa);
        CHECK(a.state.hyper.theta_epsilon == b.state.hyper.theta_epsilon);
    }
}

TEST_CASE("atomic writes leave no temp file behind") {
    TempDir dir;
    write_text_atomic(dir.file("out.txt"), "hello\n");
    CHECK(fs::exists(dir.file("out.txt")));
    CHECK(!fs::exists(dir.file("out.txt") + ".tmp"));
}

TEST_CASE("locations round trip") {
    TempDir dir;
    Matrix loc(3, 2);
    loc << 0.0, 1.0, 2.5, -1.25, 3.0, 4.0;
    write_locations_csv(dir.file("loc.csv"), loc);
    CHECK(read_locations_csv(dir.file("loc.csv")) == loc);
}

}  // TEST_SUITE
