#pragma once
// Posterior-sample analysis: co-clustering probabilities, the minimum
// expected variation-of-information point estimate of the partition,
// site-wise and cluster-wise Monte Carlo summaries, and return levels.

#include <functional>
#include <vector>

#include "extremeclust/rjmcmc.hpp"
#include "extremeclust/types.hpp"

namespace extremeclust {

struct PartitionEstimate {
    int n_clusters = 0;
    std::vector<std::vector<int>> clusters;  // site sets, partitioning 0..K-1
    std::vector<int> labels;                 // canonical labels (first-occurrence order)
    double expected_vi = 0.0;
};

struct SummaryStats {
    double mean = 0.0;
    double median = 0.0;
    double lo = 0.0;  // equal-tailed central interval
    double hi = 0.0;
};

// S[k,k'] = posterior probability that sites k and k' share a cluster.
Matrix similarity_matrix(const TraceStore& trace);

// Variation of information between two partitions given as label vectors;
// natural-log entropies, so the result is in nats.
double vi_distance(const std::vector<int>& a, const std::vector<int>& b);

// Minimizes the Monte Carlo expected VI to the sampled partitions. For
// K <= 9 sites the search is exhaustive over all set partitions; otherwise
// the candidate set is every distinct sampled partition plus greedy
// single-site reassignment refinement from the best of them.
PartitionEstimate point_estimate(const TraceStore& trace);

// Site-wise Monte Carlo summary of a per-sample functional.
SummaryStats swmc(const TraceStore& trace,
                  const std::function<double(const TraceSample&)>& functional,
                  double level = 0.90);

// Convenience functionals for site k: the GPD scale/shape of its cluster.
SummaryStats swmc_scale(const TraceStore& trace, int site, double level = 0.90);
SummaryStats swmc_shape(const TraceStore& trace, int site, double level = 0.90);

// Cluster-wise Monte Carlo: reruns the sampler with birth/death/shift at
// zero probability from a fixed partition, then summarizes per cluster.
struct CwmcResult {
    PartitionEstimate partition;
    std::vector<SummaryStats> scale;  // per cluster
    std::vector<SummaryStats> shape;
    TraceStore trace;
};
CwmcResult cwmc(const PartitionEstimate& partition, const SiteData& data,
                const DependenceCounts& counts, const Exceedances& exc,
                const ChainConfig& chain_cfg, const PriorConstants& priors = {},
                double level = 0.90);

// tau-year return level for GPD(psi, nu) excesses over threshold u, with
// lambda_u expected exceedances of u per year. Requires lambda_u * tau > 1.
template <class Scalar>
Scalar return_level(Scalar u, Scalar psi, Scalar nu, Scalar lambda_u, Scalar tau) {
    if (!(psi > Scalar(0))) throw std::invalid_argument("return_level: psi must be positive");
    const Scalar m = lambda_u * tau;
    if (!(m > Scalar(1)))
        throw std::invalid_argument("return_level: lambda_u * tau must exceed 1");
    if (std::abs(nu) < Scalar(1e-12)) return u + psi * std::log(m);
    return u + psi / nu * std::expm1(nu * std::log(m));
}

// Expected number of threshold exceedances per year when the threshold is
// the empirical p-quantile of a series with periods_per_year periods.
inline double exceedance_rate(double periods_per_year, double p) {
    return periods_per_year * (1.0 - p);
}

// Posterior distribution of the number of clusters: (J, probability) pairs.
std::vector<std::pair<int, double>> posterior_n_clusters(const TraceStore& trace);

}  // namespace extremeclust
