// Batch front door: simulate | preprocess | sample | summarize | check.
// Each stage reads and writes the documented CSV formats so intermediate
// artifacts stay inspectable; `sample` chains preprocess -> chain -> summary
// when given a full config.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "extremeclust/io.hpp"
#include "extremeclust/posterior.hpp"
#include "extremeclust/preprocess.hpp"
#include "extremeclust/rjmcmc.hpp"
#include "extremeclust/simgen.hpp"

namespace fs = std::filesystem;
using namespace extremeclust;

namespace {

struct LoadedData {
    SiteData data;
    DependenceCounts counts;
    Exceedances exc;
};

MoveConfig move_config_from(const Config& cfg) {
    const auto probs = cfg.get_list_or("chain", "move_probs",
                                       {0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1});
    if (probs.size() != 7)
        throw std::runtime_error("config: move_probs needs 7 entries "
                                 "(birth,death,shift,sigma,xi,chi,hyper)");
    MoveConfig m;
    m.birth = probs[0];
    m.death = probs[1];
    m.shift = probs[2];
    m.sigma = probs[3];
    m.xi = probs[4];
    m.chi = probs[5];
    m.hyper = probs[6];
    m.validate();
    return m;
}

ChainConfig chain_config_from(const Config& cfg) {
    ChainConfig c;
    c.iterations = cfg.get_long("chain", "iterations");
    c.burn_in = cfg.get_long_or("chain", "burn_in", c.iterations / 2);
    c.thinning = static_cast<int>(cfg.get_long_or("chain", "thinning", 100));
    c.seed = static_cast<std::uint64_t>(cfg.get_long_or("chain", "seed", 1));
    if (cfg.has("chain", "initial_clusters")) {
        c.initial_clusters = static_cast<int>(cfg.get_long("chain", "initial_clusters"));
    } else if (cfg.has("chain", "initial_fraction")) {
        c.initial_clusters = -1;  // resolved once K is known
    }
    c.validate();
    return c;
}

PriorConstants priors_from(const Config& cfg) {
    if (cfg.get_bool_or("model", "scale_params_are_variance", true)) return {};
    return PriorConstants::with_sd_reading();
}

// Assembles the model inputs from the [data] and [preprocess] sections.
LoadedData load_inputs(const Config& cfg, bool quiet = false) {
    const auto series_path = cfg.get("data", "series");
    const auto table = read_series_csv(series_path);
    const int n_sites = static_cast<int>(table.site_ids.size());
    if (n_sites == 0) throw std::runtime_error(series_path + ": no sites");

    // Decluster on a common period grid anchored at the global first time.
    const double period = cfg.get_double_or("preprocess", "period_length", 1.0);
    double t0 = table.series.front().times.front();
    for (const auto& s : table.series) t0 = std::min(t0, s.times.front());
    std::vector<RawSeries> declustered;
    declustered.reserve(n_sites);
    const bool do_standardize = cfg.get_bool_or("preprocess", "standardize", false);
    for (const auto& s : table.series) {
        RawSeries d = decluster(s, period, t0);
        if (do_standardize) d.values = standardize(d.values);
        declustered.push_back(std::move(d));
    }
    long first_period = 0, last_period = 0;
    for (int k = 0; k < n_sites; ++k) {
        const auto& t = declustered[k].times;
        first_period = std::min(first_period, static_cast<long>((t.front() - t0) / period));
        last_period = std::max(last_period, static_cast<long>((t.back() - t0) / period));
    }
    const int n_periods = static_cast<int>(last_period - first_period + 1);

    Matrix values = Matrix::Constant(n_sites, n_periods,
                                     std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < n_sites; ++k) {
        const auto& d = declustered[k];
        for (std::size_t i = 0; i < d.times.size(); ++i) {
            const long p = static_cast<long>((d.times[i] - t0) / period) - first_period;
            values(k, p) = d.values[i];
        }
    }

    // Thresholds: file, or empirical quantile at threshold_p.
    Vector thresholds(n_sites);
    if (cfg.has("data", "thresholds")) {
        thresholds = read_thresholds_csv(cfg.get("data", "thresholds"));
        if (thresholds.size() != n_sites)
            throw std::runtime_error("thresholds file does not match the series sites");
    } else {
        const double p = cfg.get_double_or("preprocess", "threshold_p", 0.925);
        for (int k = 0; k < n_sites; ++k) {
            std::vector<double> vals(values.row(k).data(),
                                     values.row(k).data() + n_periods);
            thresholds(k) = empirical_threshold(vals, p);
        }
    }

    const Matrix distances = read_matrix_csv(cfg.get("data", "distances"));

    std::vector<SitePair> adjacency;
    if (cfg.has("data", "adjacency")) {
        adjacency = read_adjacency_csv(cfg.get("data", "adjacency"));
    } else if (cfg.has("data", "locations")) {
        adjacency = voronoi_adjacency(read_locations_csv(cfg.get("data", "locations")));
    } else {
        throw std::runtime_error("config: need [data] adjacency or locations");
    }

    Matrix locations;
    if (cfg.has("data", "locations")) locations = read_locations_csv(cfg.get("data", "locations"));

    const double dep_threshold = cfg.get_double_or("preprocess", "dep_threshold", 0.95);
    LoadedData out{SiteData::build(std::move(values), distances, adjacency, thresholds,
                                   dep_threshold, std::move(locations)),
                   {}, {}};

    if (cfg.has("data", "counts")) {
        out.counts = read_counts_csv(cfg.get("data", "counts"));
        for (const auto& e : out.counts.entries)
            if (!out.data.adjacent(e.k, e.kp))
                throw std::runtime_error("counts file references a non-adjacent pair");
    } else {
        out.counts = dependence_counts(out.data);
    }
    for (auto [k, kp] : out.counts.empty_pairs())
        if (!quiet)
            std::fprintf(stderr,
                         "warning: pair (%d,%d) has no usable exceedance times; "
                         "excluded from the dependence likelihood\n",
                         k + 1, kp + 1);

    out.exc = Exceedances::from_site_data(out.data);
    return out;
}

void write_summaries(const TraceStore& trace, const Config& cfg, const fs::path& out_dir,
                     const std::optional<LoadedData>& loaded) {
    fs::create_directories(out_dir);
    const int n_sites = trace.n_sites;

    write_matrix_csv((out_dir / "similarity.csv").string(), similarity_matrix(trace));

    const auto estimate = point_estimate(trace);
    write_partition_csv((out_dir / "partition.csv").string(), estimate.labels);

    {
        std::ostringstream out;
        out << "J,probability\n";
        for (const auto& [j, p] : posterior_n_clusters(trace))
            out << j << ',' << format_double(p) << '\n';
        write_text_atomic((out_dir / "posterior_J.csv").string(), out.str());
    }

    const double level = cfg.get_double_or("output", "interval_level", 0.90);
    {
        std::ostringstream out;
        out << "site_id,psi_med,psi_lo,psi_hi,nu_med,nu_lo,nu_hi\n";
        for (int k = 0; k < n_sites; ++k) {
            const auto psi = swmc_scale(trace, k, level);
            const auto nu = swmc_shape(trace, k, level);
            out << k + 1 << ',' << format_double(psi.median) << ',' << format_double(psi.lo)
                << ',' << format_double(psi.hi) << ',' << format_double(nu.median) << ','
                << format_double(nu.lo) << ',' << format_double(nu.hi) << '\n';
        }
        write_text_atomic((out_dir / "marginals.csv").string(), out.str());
    }

    const auto taus = cfg.get_list_or("output", "return_periods", {});
    if (!taus.empty()) {
        double lambda_u;
        if (cfg.has("output", "lambda_u")) {
            lambda_u = cfg.get_double("output", "lambda_u");
        } else {
            const double per_year = cfg.get_double("output", "periods_per_year");
            const double p = cfg.get_double_or("preprocess", "threshold_p", 0.925);
            lambda_u = exceedance_rate(per_year, p);
        }
        Vector thresholds = Vector::Zero(n_sites);
        if (loaded) thresholds = loaded->data.thresholds;
        std::ostringstream out;
        out << "site_id,tau,median,lo,hi\n";
        for (int k = 0; k < n_sites; ++k) {
            for (double tau : taus) {
                const auto rl = swmc(
                    trace,
                    [&](const TraceSample& s) {
                        const int j = s.state.labels[k];
                        return return_level(thresholds(k), s.state.sigma(j), s.state.xi(j),
                                            lambda_u, tau);
                    },
                    level);
                out << k + 1 << ',' << format_double(tau) << ',' << format_double(rl.median)
                    << ',' << format_double(rl.lo) << ',' << format_double(rl.hi) << '\n';
            }
        }
        write_text_atomic((out_dir / "return_levels.csv").string(), out.str());
    }

    if (loaded && cfg.get_bool_or("output", "cwmc", false)) {
        ChainConfig cc = chain_config_from(cfg);
        if (cc.initial_clusters < 0) cc.initial_clusters = estimate.n_clusters;
        const auto res =
            cwmc(estimate, loaded->data, loaded->counts, loaded->exc, cc, priors_from(cfg), level);
        std::ostringstream out;
        out << "site_id,cluster,psi_med,psi_lo,psi_hi,nu_med,nu_lo,nu_hi\n";
        for (int k = 0; k < n_sites; ++k) {
            const int j = estimate.labels[k];
            out << k + 1 << ',' << j + 1 << ',' << format_double(res.scale[j].median) << ','
                << format_double(res.scale[j].lo) << ',' << format_double(res.scale[j].hi) << ','
                << format_double(res.shape[j].median) << ',' << format_double(res.shape[j].lo)
                << ',' << format_double(res.shape[j].hi) << '\n';
        }
        write_text_atomic((out_dir / "cwmc_marginals.csv").string(), out.str());
    }
}

int cmd_simulate(int study, std::uint64_t seed, const std::string& out, bool dependent,
                 double rho) {
    const fs::path dir(out);
    fs::create_directories(dir);
    const auto sd = make_study(study, seed, dependent, rho);
    const auto& map = fixture_map();

    SeriesTable table;
    for (int k = 0; k < sd.data.n_sites; ++k) {
        table.site_ids.push_back(k + 1);
        RawSeries s;
        for (int t = 0; t < sd.data.n_periods; ++t) {
            s.times.push_back(t);
            s.values.push_back(sd.data.values(k, t));
        }
        table.series.push_back(std::move(s));
    }
    write_series_csv((dir / "series.csv").string(), table);
    write_matrix_csv((dir / "distances.csv").string(), map.distances);
    write_adjacency_csv((dir / "adjacency.csv").string(), map.adjacency);
    write_locations_csv((dir / "locations.csv").string(), map.locations);
    write_counts_csv((dir / "counts.csv").string(), sd.counts);
    write_thresholds_csv((dir / "thresholds.csv").string(), sd.data.thresholds);
    {
        std::ostringstream truth;
        truth << "site_id,true_cluster\n";
        for (std::size_t k = 0; k < sd.true_labels.size(); ++k)
            truth << k + 1 << ',' << sd.true_labels[k] + 1 << '\n';
        write_text_atomic((dir / "truth.csv").string(), truth.str());
    }
    {
        std::ostringstream cfg;
        cfg << "[data]\n"
            << "series = " << (dir / "series.csv").string() << "\n"
            << "distances = " << (dir / "distances.csv").string() << "\n"
            << "adjacency = " << (dir / "adjacency.csv").string() << "\n"
            << "locations = " << (dir / "locations.csv").string() << "\n"
            << "counts = " << (dir / "counts.csv").string() << "\n"
            << "thresholds = " << (dir / "thresholds.csv").string() << "\n\n"
            << "[preprocess]\n"
            << "period_length = 1\n"
            << "dep_threshold = 0.95\n\n"
            << "[chain]\n"
            << "iterations = 1000000\n"
            << "burn_in = 500000\n"
            << "thinning = 100\n"
            << "seed = " << seed << "\n"
            << "initial_clusters = 5\n\n"
            << "[output]\n"
            << "dir = " << (dir / "results").string() << "\n"
            << "return_periods = 25,100\n"
            << "lambda_u = 3.9\n";
        write_text_atomic((dir / "config.toml").string(), cfg.str());
    }
    std::printf("wrote study %d dataset (seed %llu) to %s\n", study,
                static_cast<unsigned long long>(seed), dir.string().c_str());
    return 0;
}

int cmd_preprocess(const std::string& config_path, const std::string& out) {
    const auto cfg = Config::parse_file(config_path);
    const auto loaded = load_inputs(cfg);
    const fs::path dir(out.empty() ? cfg.get_or("output", "dir", "out") : out);
    fs::create_directories(dir);

    SeriesTable table;
    for (int k = 0; k < loaded.data.n_sites; ++k) {
        table.site_ids.push_back(k + 1);
        RawSeries s;
        for (int t = 0; t < loaded.data.n_periods; ++t) {
            s.times.push_back(t);
            s.values.push_back(loaded.data.values(k, t));
        }
        table.series.push_back(std::move(s));
    }
    write_series_csv((dir / "declustered.csv").string(), table);
    write_thresholds_csv((dir / "thresholds.csv").string(), loaded.data.thresholds);
    write_counts_csv((dir / "counts.csv").string(), loaded.counts);
    write_matrix_csv((dir / "distances_scaled.csv").string(), loaded.data.distances);
    std::printf("preprocessed %d sites x %d periods, %zu adjacent pairs\n", loaded.data.n_sites,
                loaded.data.n_periods, loaded.data.adjacency.size());
    return 0;
}

int cmd_sample(const std::string& config_path, const std::string& out) {
    const auto cfg = Config::parse_file(config_path);
    const auto loaded = load_inputs(cfg);
    ChainConfig cc = chain_config_from(cfg);
    if (cc.initial_clusters < 0) {
        const double frac = cfg.get_double("chain", "initial_fraction");
        cc.initial_clusters = std::max(1, static_cast<int>(frac * loaded.data.n_sites));
    }
    const MoveConfig mc = move_config_from(cfg);
    const PriorConstants pc = priors_from(cfg);

    const fs::path dir(out.empty() ? cfg.get_or("output", "dir", "out") : out);
    fs::create_directories(dir);
    const int n_chains = static_cast<int>(cfg.get_long_or("chain", "chains", 1));

    TraceStore first_trace;
    for (int chain = 0; chain < n_chains; ++chain) {
        ChainConfig c = cc;
        c.seed = cc.seed + static_cast<std::uint64_t>(chain);
        const fs::path trace_path =
            n_chains == 1 ? dir / "trace.csv"
                          : dir / ("trace_" + std::to_string(chain + 1) + ".csv");
        const std::string tmp = trace_path.string() + ".tmp";
        std::ofstream stream(tmp, std::ios::trunc);
        if (!stream) throw std::runtime_error("cannot write " + tmp);
        stream << trace_header() << '\n';
        long written = 0;
        auto trace = run_chain(loaded.data, loaded.counts, loaded.exc, c, mc, pc,
                               [&stream, &written](const TraceSample& s) {
                                   stream << trace_row(s) << '\n';
                                   if (++written % 100 == 0) stream.flush();
                               });
        stream.close();
        if (std::rename(tmp.c_str(), trace_path.string().c_str()) != 0)
            throw std::runtime_error("cannot rename " + tmp);

        std::printf("chain %d: %zu samples -> %s\n", chain + 1, trace.samples.size(),
                    trace_path.string().c_str());
        const auto& st = trace.stats;
        for (int m = 0; m < n_move_types; ++m)
            if (st.proposed[m] > 0)
                std::printf("  %-5s acceptance %.3f (%ld/%ld)\n", move_names[m],
                            static_cast<double>(st.accepted[m]) / st.proposed[m],
                            st.accepted[m], st.proposed[m]);
        if (chain == 0) first_trace = std::move(trace);
    }

    write_summaries(first_trace, cfg, dir, loaded);
    std::printf("summaries written to %s\n", dir.string().c_str());
    return 0;
}

int cmd_summarize(const std::string& trace_path, const std::string& config_path,
                  const std::string& out) {
    Config cfg;
    std::optional<LoadedData> loaded;
    if (!config_path.empty()) {
        cfg = Config::parse_file(config_path);
        loaded = load_inputs(cfg, true);
    }
    const auto trace = read_trace_csv(trace_path);
    if (trace.samples.empty()) throw std::runtime_error(trace_path + ": no samples");
    const fs::path dir(out.empty() ? cfg.get_or("output", "dir", "out") : out);
    write_summaries(trace, cfg, dir, loaded);
    std::printf("summaries written to %s\n", dir.string().c_str());
    return 0;
}

int cmd_check(const std::string& config_path) {
    const auto cfg = Config::parse_file(config_path);
    const auto loaded = load_inputs(cfg, true);
    std::vector<std::string> report = validate_site_data(loaded.data);
    for (auto [k, kp] : loaded.counts.empty_pairs())
        report.push_back("pair (" + std::to_string(k + 1) + "," + std::to_string(kp + 1) +
                         ") has Q = 0 in both orientations");
    for (const auto& e : loaded.counts.entries) {
        if (e.p_fwd > e.q_fwd || e.p_rev > e.q_rev)
            report.push_back("pair (" + std::to_string(e.k + 1) + "," +
                             std::to_string(e.kp + 1) + ") has P > Q");
    }
    if (report.empty()) {
        std::printf("ok: %d sites, %d periods, %zu adjacent pairs\n", loaded.data.n_sites,
                    loaded.data.n_periods, loaded.data.adjacency.size());
        return 0;
    }
    for (const auto& line : report) std::printf("problem: %s\n", line.c_str());
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian spatial clustering of extremes"};
    app.require_subcommand(1);

    int study = 1;
    std::uint64_t seed = 1;
    std::string out_dir;
    bool dependent = false;
    double rho = 0.5;
    auto* simulate = app.add_subcommand("simulate", "generate a built-in study dataset");
    simulate->add_option("--study", study, "study number (1, 2 or 3)")->required();
    simulate->add_option("--seed", seed, "random seed");
    simulate->add_option("--out", out_dir, "output directory")->required();
    simulate->add_flag("--dependent", dependent, "study 3 with Gaussian-copula excesses");
    simulate->add_option("--rho", rho, "copula correlation range");

    std::string config_path;
    std::string pp_out;
    auto* preprocess = app.add_subcommand("preprocess", "decluster and derive model inputs");
    preprocess->add_option("--config", config_path, "config file")->required();
    preprocess->add_option("--out", pp_out, "output directory");

    std::string sample_config, sample_out;
    auto* sample = app.add_subcommand("sample", "run the sampler and summarize");
    sample->add_option("--config", sample_config, "config file")->required();
    sample->add_option("--out", sample_out, "output directory");

    std::string trace_path, summarize_config, summarize_out;
    auto* summarize = app.add_subcommand("summarize", "summaries from an existing trace");
    summarize->add_option("--trace", trace_path, "trace.csv path")->required();
    summarize->add_option("--config", summarize_config, "config file (for return levels)");
    summarize->add_option("--out", summarize_out, "output directory");

    std::string check_config;
    auto* check = app.add_subcommand("check", "validate inputs without sampling");
    check->add_option("--config", check_config, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(study, seed, out_dir, dependent, rho);
        if (preprocess->parsed()) return cmd_preprocess(config_path, pp_out);
        if (sample->parsed()) return cmd_sample(sample_config, sample_out);
        if (summarize->parsed()) return cmd_summarize(trace_path, summarize_config, summarize_out);
        if (check->parsed()) return cmd_check(check_config);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
