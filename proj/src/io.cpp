#include "extremeclust/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace extremeclust {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("could not parse number '" + s + "' in " + what);
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

std::string join_doubles(const Vector& v) {
    std::ostringstream out;
    for (int i = 0; i < v.size(); ++i) {
        if (i) out << ';';
        out << format_double(v(i));
    }
    return out.str();
}

std::string join_ints_1based(const std::vector<int>& v) {
    std::ostringstream out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ';';
        out << v[i] + 1;
    }
    return out.str();
}

Vector parse_double_list(const std::string& s, const std::string& what) {
    const auto parts = split(s, ';');
    Vector out(static_cast<long>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i)
        out(static_cast<long>(i)) = parse_double(parts[i], what);
    return out;
}

std::vector<int> parse_int_list_0based(const std::string& s, const std::string& what) {
    const auto parts = split(s, ';');
    std::vector<int> out(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
        out[i] = static_cast<int>(parse_double(parts[i], what)) - 1;
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

SeriesTable read_series_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    std::map<int, RawSeries> by_site;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 3)
            throw std::runtime_error(path + ": expected 3 fields at line " +
                                     std::to_string(line_no));
        const int site = static_cast<int>(parse_double(fields[0], path));
        const double time = parse_double(fields[1], path);
        const double value = trim(fields[2]).empty() ? nan_v : parse_double(fields[2], path);
        by_site[site].times.push_back(time);
        by_site[site].values.push_back(value);
    }
    SeriesTable table;
    for (auto& [site, series] : by_site) {
        table.site_ids.push_back(site);
        table.series.push_back(std::move(series));
    }
    return table;
}

void write_series_csv(const std::string& path, const SeriesTable& table) {
    std::ostringstream out;
    out << "site_id,time,value\n";
    for (std::size_t i = 0; i < table.site_ids.size(); ++i) {
        const auto& s = table.series[i];
        for (std::size_t t = 0; t < s.times.size(); ++t) {
            out << table.site_ids[i] << ',' << format_double(s.times[t]) << ',';
            if (!std::isnan(s.values[t])) out << format_double(s.values[t]);
            out << '\n';
        }
    }
    write_text_atomic(path, out.str());
}

Matrix read_matrix_csv(const std::string& path) {
    auto in = open_input(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields)
            row.push_back(trim(f).empty() ? nan_v : parse_double(f, path));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
    Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            throw std::runtime_error(path + ": ragged rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
    }
    return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ostringstream out;
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

std::vector<SitePair> read_adjacency_csv(const std::string& path) {
    auto in = open_input(path);
    std::vector<SitePair> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 2) throw std::runtime_error(path + ": expected 2 fields per row");
        const int a = static_cast<int>(parse_double(fields[0], path)) - 1;
        const int b = static_cast<int>(parse_double(fields[1], path)) - 1;
        out.push_back({std::min(a, b), std::max(a, b)});
    }
    return out;
}

void write_adjacency_csv(const std::string& path, const std::vector<SitePair>& pairs) {
    std::ostringstream out;
    for (auto [a, b] : pairs) out << a + 1 << ',' << b + 1 << '\n';
    write_text_atomic(path, out.str());
}

Matrix read_locations_csv(const std::string& path) {
    const Matrix raw = read_matrix_csv(path);
    if (raw.cols() != 3) throw std::runtime_error(path + ": expected rows site_id,x,y");
    Matrix out(raw.rows(), 2);
    for (long i = 0; i < raw.rows(); ++i) {
        const long site = static_cast<long>(raw(i, 0)) - 1;
        if (site < 0 || site >= raw.rows())
            throw std::runtime_error(path + ": site ids must be 1..K");
        out(site, 0) = raw(i, 1);
        out(site, 1) = raw(i, 2);
    }
    return out;
}

void write_locations_csv(const std::string& path, const Matrix& locations) {
    std::ostringstream out;
    for (long i = 0; i < locations.rows(); ++i)
        out << i + 1 << ',' << format_double(locations(i, 0)) << ','
            << format_double(locations(i, 1)) << '\n';
    write_text_atomic(path, out.str());
}

DependenceCounts read_counts_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    std::map<SitePair, DependenceCounts::PairCounts> entries;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 4) throw std::runtime_error(path + ": expected k,kprime,q,p rows");
        const int k = static_cast<int>(parse_double(fields[0], path)) - 1;
        const int kp = static_cast<int>(parse_double(fields[1], path)) - 1;
        const int q = static_cast<int>(parse_double(fields[2], path));
        const int p = static_cast<int>(parse_double(fields[3], path));
        if (p < 0 || p > q) throw std::runtime_error(path + ": need 0 <= p <= q");
        const SitePair key{std::min(k, kp), std::max(k, kp)};
        auto& e = entries[key];
        e.k = key.first;
        e.kp = key.second;
        if (k == key.first) {
            e.q_fwd = q;
            e.p_fwd = p;
        } else {
            e.q_rev = q;
            e.p_rev = p;
        }
    }
    DependenceCounts out;
    for (auto& [key, e] : entries) out.entries.push_back(e);
    out.finalize();
    return out;
}

void write_counts_csv(const std::string& path, const DependenceCounts& counts) {
    std::ostringstream out;
    out << "k,kprime,q,p\n";
    for (const auto& e : counts.entries) {
        out << e.k + 1 << ',' << e.kp + 1 << ',' << e.q_fwd << ',' << e.p_fwd << '\n';
        out << e.kp + 1 << ',' << e.k + 1 << ',' << e.q_rev << ',' << e.p_rev << '\n';
    }
    write_text_atomic(path, out.str());
}

Vector read_thresholds_csv(const std::string& path) {
    const Matrix raw = read_matrix_csv(path);
    if (raw.cols() != 2) throw std::runtime_error(path + ": expected rows site_id,u");
    Vector out(raw.rows());
    for (long i = 0; i < raw.rows(); ++i) {
        const long site = static_cast<long>(raw(i, 0)) - 1;
        if (site < 0 || site >= raw.rows())
            throw std::runtime_error(path + ": site ids must be 1..K");
        out(site) = raw(i, 1);
    }
    return out;
}

void write_thresholds_csv(const std::string& path, const Vector& thresholds) {
    std::ostringstream out;
    for (long i = 0; i < thresholds.size(); ++i)
        out << i + 1 << ',' << format_double(thresholds(i)) << '\n';
    write_text_atomic(path, out.str());
}

std::vector<int> read_partition_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    std::map<int, int> by_site;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 2) throw std::runtime_error(path + ": expected site_id,cluster");
        by_site[static_cast<int>(parse_double(fields[0], path)) - 1] =
            static_cast<int>(parse_double(fields[1], path)) - 1;
    }
    std::vector<int> labels(by_site.size());
    for (auto [site, label] : by_site) {
        if (site < 0 || site >= static_cast<int>(labels.size()))
            throw std::runtime_error(path + ": site ids must be 1..K");
        labels[site] = label;
    }
    return labels;
}

void write_partition_csv(const std::string& path, const std::vector<int>& labels) {
    std::ostringstream out;
    out << "site_id,cluster\n";
    for (std::size_t k = 0; k < labels.size(); ++k) out << k + 1 << ',' << labels[k] + 1 << '\n';
    write_text_atomic(path, out.str());
}

std::string trace_header() {
    return "iter,J,logpost,centres,labels,sigma,xi,gamma0,epsilon,beta,kappa,mu_sigma,"
           "theta_sigma,mu_xi,theta_xi,theta_eps";
}

std::string trace_row(const TraceSample& sample) {
    const auto& s = sample.state;
    std::ostringstream out;
    out << sample.iteration << ',' << s.n_clusters << ',' << format_double(sample.log_post) << ','
        << join_ints_1based(s.centres) << ',' << join_ints_1based(s.labels) << ','
        << join_doubles(s.sigma) << ',' << join_doubles(s.xi) << ',' << format_double(s.gamma0)
        << ',' << join_doubles(s.epsilon) << ',' << format_double(s.beta) << ','
        << format_double(s.hyper.kappa) << ',' << format_double(s.hyper.mu_sigma) << ','
        << format_double(s.hyper.theta_sigma) << ',' << format_double(s.hyper.mu_xi) << ','
        << format_double(s.hyper.theta_xi) << ',' << format_double(s.hyper.theta_epsilon);
    return out.str();
}

TraceStore read_trace_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (trim(line) != trace_header()) throw std::runtime_error(path + ": unexpected header");
    TraceStore store;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 16) throw std::runtime_error(path + ": malformed trace row");
        TraceSample sample;
        sample.iteration = static_cast<long>(parse_double(fields[0], path));
        auto& s = sample.state;
        s.n_clusters = static_cast<int>(parse_double(fields[1], path));
        sample.log_post = parse_double(fields[2], path);
        s.centres = parse_int_list_0based(fields[3], path);
        s.labels = parse_int_list_0based(fields[4], path);
        s.sigma = parse_double_list(fields[5], path);
        s.xi = parse_double_list(fields[6], path);
        s.gamma0 = parse_double(fields[7], path);
        s.epsilon = parse_double_list(fields[8], path);
        s.beta = parse_double(fields[9], path);
        s.hyper.kappa = parse_double(fields[10], path);
        s.hyper.mu_sigma = parse_double(fields[11], path);
        s.hyper.theta_sigma = parse_double(fields[12], path);
        s.hyper.mu_xi = parse_double(fields[13], path);
        s.hyper.theta_xi = parse_double(fields[14], path);
        s.hyper.theta_epsilon = parse_double(fields[15], path);
        store.samples.push_back(std::move(sample));
    }
    if (!store.samples.empty())
        store.n_sites = static_cast<int>(store.samples.front().state.labels.size());
    return store;
}

void write_trace_csv(const std::string& path, const TraceStore& trace) {
    std::ostringstream out;
    out << trace_header() << '\n';
    for (const auto& s : trace.samples) out << trace_row(s) << '\n';
    write_text_atomic(path, out.str());
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config: unterminated section at line " +
                                         std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected key = value at line " +
                                     std::to_string(line_no));
        cfg.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    auto in = open_input(path);
    std::ostringstream content;
    content << in.rdbuf();
    return parse_string(content.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto sec = sections.find(section);
    return sec != sections.end() && sec->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw std::runtime_error("config: missing [" + section + "] " + key);
    return sections.at(section).at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    return parse_double(get(section, key), "config [" + section + "] " + key);
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long Config::get_long(const std::string& section, const std::string& key) const {
    return static_cast<long>(get_double(section, key));
}

long Config::get_long_or(const std::string& section, const std::string& key,
                         long fallback) const {
    return has(section, key) ? get_long(section, key) : fallback;
}

bool Config::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config: expected boolean for [" + section + "] " + key);
}

std::vector<double> Config::get_list_or(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    for (const auto& part : split(get(section, key), ','))
        out.push_back(parse_double(trim(part), "config [" + section + "] " + key));
    return out;
}

}  // namespace extremeclust
