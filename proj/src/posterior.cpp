#include "extremeclust/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "extremeclust/distributions.hpp"

namespace extremeclust {

namespace {

// Canonical form: clusters renumbered in order of first site occurrence.
std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::vector<int> mapping(labels.size(), -1);
    std::vector<int> out(labels.size());
    int next = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (mapping[labels[k]] == -1) mapping[labels[k]] = next++;
        out[k] = mapping[labels[k]];
    }
    return out;
}

struct DistinctPartitions {
    std::vector<std::vector<int>> labels;
    std::vector<double> weight;  // sums to 1
};

DistinctPartitions distinct_partitions(const TraceStore& trace) {
    DistinctPartitions out;
    std::map<std::vector<int>, int> index;
    for (const auto& s : trace.samples) {
        auto canon = canonical_labels(s.state.labels);
        auto [it, inserted] = index.try_emplace(std::move(canon), static_cast<int>(out.labels.size()));
        if (inserted) {
            out.labels.push_back(it->first);
            out.weight.push_back(0.0);
        }
        out.weight[it->second] += 1.0;
    }
    const double n = static_cast<double>(trace.samples.size());
    for (auto& w : out.weight) w /= n;
    return out;
}

double expected_vi(const std::vector<int>& candidate, const DistinctPartitions& dp) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dp.labels.size(); ++i)
        acc += dp.weight[i] * vi_distance(candidate, dp.labels[i]);
    return acc;
}

// Greedy single-site reassignment: move any site to any other cluster or to
// a fresh singleton, keep the best strict improvement, repeat to a fixed
// point.
std::vector<int> greedy_refine(std::vector<int> labels, const DistinctPartitions& dp,
                               double& score) {
    const int K = static_cast<int>(labels.size());
    bool improved = true;
    while (improved) {
        improved = false;
        std::vector<int> best = labels;
        double best_score = score;
        for (int k = 0; k < K; ++k) {
            const int n_labels = 1 + *std::max_element(labels.begin(), labels.end());
            for (int target = 0; target <= n_labels; ++target) {
                if (target == labels[k]) continue;
                std::vector<int> cand = labels;
                cand[k] = target;
                cand = canonical_labels(cand);
                const double s = expected_vi(cand, dp);
                if (s < best_score - 1e-15) {
                    best_score = s;
                    best = cand;
                }
            }
        }
        if (best_score < score - 1e-15) {
            labels = std::move(best);
            score = best_score;
            improved = true;
        }
    }
    return labels;
}

// Enumerates restricted growth strings (all set partitions of K elements).
void for_each_partition(int K, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> labels(K, 0);
    std::vector<int> max_prefix(K, 0);
    visit(labels);
    if (K == 1) return;
    int k = K - 1;
    while (true) {
        // Advance position k like an odometer bounded by max_prefix + 1.
        while (k > 0 && labels[k] == max_prefix[k - 1] + 1) {
            labels[k] = 0;
            --k;
        }
        if (k == 0) break;
        ++labels[k];
        max_prefix[k] = std::max(max_prefix[k - 1], labels[k]);
        for (int i = k + 1; i < K; ++i) {
            labels[i] = 0;
            max_prefix[i] = max_prefix[k];
        }
        k = K - 1;
        visit(labels);
    }
}

PartitionEstimate finish_estimate(std::vector<int> labels, double score) {
    PartitionEstimate est;
    est.labels = canonical_labels(labels);
    est.n_clusters = 1 + *std::max_element(est.labels.begin(), est.labels.end());
    est.clusters.assign(est.n_clusters, {});
    for (std::size_t k = 0; k < est.labels.size(); ++k)
        est.clusters[est.labels[k]].push_back(static_cast<int>(k));
    est.expected_vi = score;
    return est;
}

}  // namespace

Matrix similarity_matrix(const TraceStore& trace) {
    if (trace.samples.empty()) throw std::invalid_argument("similarity_matrix: empty trace");
    const int K = static_cast<int>(trace.samples.front().state.labels.size());
    Matrix s = Matrix::Zero(K, K);
    for (const auto& sample : trace.samples) {
        const auto& z = sample.state.labels;
        for (int k = 0; k < K; ++k)
            for (int kp = k; kp < K; ++kp)
                if (z[k] == z[kp]) {
                    s(k, kp) += 1.0;
                    s(kp, k) = s(k, kp);
                }
    }
    s /= static_cast<double>(trace.samples.size());
    for (int k = 0; k < K; ++k) s(k, k) = 1.0;
    return s;
}

double vi_distance(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("vi_distance: label vectors must match and be non-empty");
    const double n = static_cast<double>(a.size());
    std::unordered_map<int, int> ca, cb;
    std::map<std::pair<int, int>, int> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++ca[a[i]];
        ++cb[b[i]];
        ++joint[{a[i], b[i]}];
    }
    double h_a = 0.0, h_b = 0.0, mi = 0.0;
    for (const auto& [label, count] : ca) {
        const double p = count / n;
        h_a -= p * std::log(p);
    }
    for (const auto& [label, count] : cb) {
        const double p = count / n;
        h_b -= p * std::log(p);
    }
    for (const auto& [labels, count] : joint) {
        const double p = count / n;
        mi += p * std::log(p * n * n / (ca[labels.first] * cb[labels.second]));
    }
    return std::max(h_a + h_b - 2.0 * mi, 0.0);
}

PartitionEstimate point_estimate(const TraceStore& trace) {
    if (trace.samples.empty()) throw std::invalid_argument("point_estimate: empty trace");
    const auto dp = distinct_partitions(trace);
    const int K = static_cast<int>(dp.labels.front().size());

    if (K <= 9) {
        std::vector<int> best;
        double best_score = std::numeric_limits<double>::infinity();
        for_each_partition(K, [&](const std::vector<int>& cand) {
            const double s = expected_vi(cand, dp);
            if (s < best_score) {
                best_score = s;
                best = cand;
            }
        });
        return finish_estimate(std::move(best), best_score);
    }

    std::vector<int> best = dp.labels.front();
    double best_score = expected_vi(best, dp);
    for (std::size_t i = 1; i < dp.labels.size(); ++i) {
        const double s = expected_vi(dp.labels[i], dp);
        if (s < best_score) {
            best_score = s;
            best = dp.labels[i];
        }
    }
    best = greedy_refine(std::move(best), dp, best_score);
    return finish_estimate(std::move(best), best_score);
}

SummaryStats swmc(const TraceStore& trace,
                  const std::function<double(const TraceSample&)>& functional, double level) {
    if (trace.samples.empty()) throw std::invalid_argument("swmc: empty trace");
    std::vector<double> values;
    values.reserve(trace.samples.size());
    for (const auto& s : trace.samples) values.push_back(functional(s));
    SummaryStats out;
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) /
               static_cast<double>(values.size());
    out.median = quantile_type7(values, 0.5);
    out.lo = quantile_type7(values, (1.0 - level) / 2.0);
    out.hi = quantile_type7(values, 1.0 - (1.0 - level) / 2.0);
    return out;
}

SummaryStats swmc_scale(const TraceStore& trace, int site, double level) {
    return swmc(
        trace,
        [site](const TraceSample& s) { return s.state.sigma(s.state.labels[site]); }, level);
}

SummaryStats swmc_shape(const TraceStore& trace, int site, double level) {
    return swmc(
        trace, [site](const TraceSample& s) { return s.state.xi(s.state.labels[site]); }, level);
}

CwmcResult cwmc(const PartitionEstimate& partition, const SiteData& data,
                const DependenceCounts& counts, const Exceedances& exc,
                const ChainConfig& chain_cfg, const PriorConstants& priors, double level) {
    ChainConfig cfg = chain_cfg;
    cfg.fixed_labels = true;
    cfg.initial_labels = partition.labels;
    cfg.initial_clusters = partition.n_clusters;

    CwmcResult result;
    result.partition = partition;
    result.trace = run_chain(data, counts, exc, cfg, MoveConfig::fixed_partition(), priors);
    for (int j = 0; j < partition.n_clusters; ++j) {
        result.scale.push_back(swmc(
            result.trace, [j](const TraceSample& s) { return s.state.sigma(j); }, level));
        result.shape.push_back(swmc(
            result.trace, [j](const TraceSample& s) { return s.state.xi(j); }, level));
    }
    return result;
}

std::vector<std::pair<int, double>> posterior_n_clusters(const TraceStore& trace) {
    if (trace.samples.empty()) throw std::invalid_argument("posterior_n_clusters: empty trace");
    std::map<int, long> counts;
    for (const auto& s : trace.samples) ++counts[s.state.n_clusters];
    std::vector<std::pair<int, double>> out;
    for (const auto& [j, c] : counts)
        out.push_back({j, static_cast<double>(c) / static_cast<double>(trace.samples.size())});
    return out;
}

}  // namespace extremeclust
