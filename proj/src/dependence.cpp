#include "extremeclust/dependence.hpp"

#include <cmath>
#include <limits>

#include "extremeclust/distributions.hpp"

namespace extremeclust {

namespace {

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double betabinom_logpmf(int p, int q, double alpha, double beta, double log_choose_qp) {
    if (p < 0 || p > q) throw std::invalid_argument("betabinom_logpmf: need 0 <= p <= q");
    if (q == 0) return 0.0;
    if (!(beta > 0.0)) throw std::invalid_argument("betabinom_logpmf: beta must be positive");
    // Degenerate shapes from extreme decay rates: alpha -> 0 concentrates the
    // latent chi at 0, alpha -> inf at 1.
    if (!(alpha > 0.0)) return p == 0 ? 0.0 : neg_inf;
    if (std::isinf(alpha)) return p == q ? 0.0 : neg_inf;
    // Grouped so the lgamma(alpha) terms cancel exactly as alpha -> 0.
    return log_choose_qp + (std::lgamma(p + alpha) - std::lgamma(alpha)) +
           (std::lgamma(q - p + beta) - std::lgamma(beta)) -
           (std::lgamma(q + alpha + beta) - std::lgamma(alpha + beta));
}

double betabinom_logpmf(int p, int q, double alpha, double beta) {
    if (p < 0 || p > q) throw std::invalid_argument("betabinom_logpmf: need 0 <= p <= q");
    return betabinom_logpmf(p, q, alpha, beta, q > 0 ? log_choose(q, p) : 0.0);
}

double pair_loglik(const DependenceCounts::PairCounts& entry, const ClusterState& state,
                   double d) {
    const int zk = state.labels[entry.k];
    const int zkp = state.labels[entry.kp];
    const double gamma = zk == zkp ? state.gamma(zk) : state.gamma0;
    const auto [alpha, beta] = bb_shape(gamma, d, state.beta);
    double ll = 0.0;
    if (entry.q_fwd > 0)
        ll += betabinom_logpmf(entry.p_fwd, entry.q_fwd, alpha, beta, entry.log_choose_fwd);
    if (entry.q_rev > 0)
        ll += betabinom_logpmf(entry.p_rev, entry.q_rev, alpha, beta, entry.log_choose_rev);
    return 0.5 * ll;
}

double loglik_dep(const ClusterState& state, const DependenceCounts& counts,
                  const SiteData& data) {
    double total = 0.0;
    for (const auto& e : counts.entries) {
        const double term = pair_loglik(e, state, data.distances(e.k, e.kp));
        if (term == neg_inf) return neg_inf;
        total += term;
    }
    return total;
}

}  // namespace extremeclust
