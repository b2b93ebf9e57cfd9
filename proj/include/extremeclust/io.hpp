#pragma once
// File formats and configuration. CSV schemas: series.csv has a header
// `site_id,time,value` with empty fields for missing values; distances.csv,
// similarity.csv and locations.csv are headerless numeric tables;
// adjacency.csv rows are `k,k'` (1-based); counts.csv rows are
// `k,kprime,q,p` (1-based, ordered pairs, with header). The config file is
// flat `key = value` text under `[section]` headers with `#` comments.
// All writes are atomic (temp file + rename).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "extremeclust/data_model.hpp"
#include "extremeclust/preprocess.hpp"
#include "extremeclust/rjmcmc.hpp"
#include "extremeclust/types.hpp"

namespace extremeclust {

struct SeriesTable {
    std::vector<int> site_ids;               // sorted 1-based external ids
    std::vector<RawSeries> series;           // aligned with site_ids
};

SeriesTable read_series_csv(const std::string& path);
void write_series_csv(const std::string& path, const SeriesTable& table);

Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

std::vector<SitePair> read_adjacency_csv(const std::string& path);  // 1-based file, 0-based out
void write_adjacency_csv(const std::string& path, const std::vector<SitePair>& pairs);

Matrix read_locations_csv(const std::string& path);  // rows site_id,x,y; returns K x 2
void write_locations_csv(const std::string& path, const Matrix& locations);

DependenceCounts read_counts_csv(const std::string& path);
void write_counts_csv(const std::string& path, const DependenceCounts& counts);

Vector read_thresholds_csv(const std::string& path);  // rows site_id,u
void write_thresholds_csv(const std::string& path, const Vector& thresholds);

std::vector<int> read_partition_csv(const std::string& path);  // rows site_id,cluster
void write_partition_csv(const std::string& path, const std::vector<int>& labels);

// Trace rows: iter,J,logpost,centres,labels,sigma,xi,gamma0,epsilon,beta,
// kappa,mu_sigma,theta_sigma,mu_xi,theta_xi,theta_eps with ';'-joined
// vectors, site and cluster indices 1-based.
std::string trace_header();
std::string trace_row(const TraceSample& sample);
TraceStore read_trace_csv(const std::string& path);
void write_trace_csv(const std::string& path, const TraceStore& trace);

// Atomic text write: temp file in the same directory, then rename.
void write_text_atomic(const std::string& path, const std::string& content);

// Full round-trip double formatting.
std::string format_double(double v);

struct Config {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    long get_long(const std::string& section, const std::string& key) const;
    long get_long_or(const std::string& section, const std::string& key, long fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_list_or(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;
};

}  // namespace extremeclust
