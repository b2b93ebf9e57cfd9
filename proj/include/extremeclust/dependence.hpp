#pragma once
// Beta-binomial likelihood for the pairwise extremal-dependence counts over
// adjacent sites. The latent dependence coefficient of a pair at distance d
// is Beta(beta*e^{-gamma d}/(1 - e^{-gamma d}), beta), so its mean decays as
// e^{-gamma d}; integrating it out of the Binomial(Q, chi) count gives the
// beta-binomial below. Same-cluster pairs use the cluster rate
// gamma_j = gamma0 * exp(-epsilon_j), pairs across clusters use gamma0.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "extremeclust/data_model.hpp"
#include "extremeclust/preprocess.hpp"

namespace extremeclust {

template <class Scalar>
Scalar gamma_from_epsilon(Scalar gamma0, Scalar epsilon_j) {
    if (!(gamma0 > Scalar(0)))
        throw std::invalid_argument("gamma_from_epsilon: gamma0 must be positive");
    if (epsilon_j < Scalar(0))
        throw std::invalid_argument("gamma_from_epsilon: epsilon must be nonnegative");
    return std::exp(std::log(gamma0) - epsilon_j);
}

// Shape parameters (alpha, beta) of the latent Beta for decay rate gamma at
// distance d. The implied mean alpha/(alpha+beta) equals exp(-gamma d).
template <class Scalar>
std::pair<Scalar, Scalar> bb_shape(Scalar gamma, Scalar d, Scalar beta) {
    if (!(d > Scalar(0))) throw std::invalid_argument("bb_shape: distance must be positive");
    return {beta / std::expm1(gamma * d), beta};
}

// log P(P = p | Q = q) under Beta-binomial(q, alpha, beta). The log binomial
// coefficient may be passed in when precomputed (it is fixed by the data).
double betabinom_logpmf(int p, int q, double alpha, double beta);
double betabinom_logpmf(int p, int q, double alpha, double beta, double log_choose);

// Half-weighted sum of the two orientations of one adjacent pair.
// Orientations with Q = 0 contribute log 1 = 0.
double pair_loglik(const DependenceCounts::PairCounts& entry, const ClusterState& state,
                   double d);

// Sum over unordered adjacent pairs (fixed order for bit-reproducibility).
double loglik_dep(const ClusterState& state, const DependenceCounts& counts,
                  const SiteData& data);

}  // namespace extremeclust
