#pragma once
// Core domain types shared by every module: the site-level data container,
// the cluster state sampled by the chain, and the deterministic
// centre-to-label assignment that defines a partition from a centre vector.
// All indices are 0-based internally; external file formats are 1-based.

#include <string>
#include <utility>
#include <vector>

#include "extremeclust/types.hpp"

namespace extremeclust {

struct SiteData {
    int n_sites = 0;
    int n_periods = 0;
    Matrix values;          // K x T declustered observations, NaN = missing
    BoolArray observed;     // K x T mask, consistent with the NaN sentinel
    Matrix locations;       // K x 2 point locations; 0 x 0 for areal units
    Matrix distances;       // K x K, symmetric, rescaled so max off-diagonal = 1
    double distance_scale = 1.0;  // original max off-diagonal distance
    std::vector<SitePair> adjacency;        // unordered pairs, first < second
    std::vector<std::vector<int>> neighbours;  // adjacency lists
    Vector thresholds;      // u_k per site
    double dep_threshold = 0.95;  // quantile level for the dependence counts

    // Validates invariants, rescales distances, builds the mask and
    // neighbour lists. Throws std::invalid_argument on structural errors.
    static SiteData build(Matrix values, Matrix distances,
                          std::vector<SitePair> adjacency, Vector thresholds,
                          double dep_threshold, Matrix locations = Matrix());

    bool adjacent(int k, int kp) const;
};

struct Hyperparameters {
    double kappa = 1.0;          // Poisson rate for J - 1
    double mu_sigma = 0.0;       // lognormal location of sigma_j
    double theta_sigma = 1.0;    // lognormal log-variance of sigma_j
    double mu_xi = 0.0;          // normal mean of xi_j
    double theta_xi = 1.0;       // normal variance of xi_j
    double theta_epsilon = 1.0;  // exponential rate of epsilon_j
};

// State of the trans-dimensional chain. At J = 1 there is a single
// dependence rate gamma_1 which is stored in gamma0 with epsilon = {0};
// epsilon entries are free parameters only when J >= 2.
struct ClusterState {
    int n_clusters = 1;              // J
    std::vector<int> centres;        // J distinct site indices
    std::vector<int> labels;         // K entries in [0, J)
    Vector sigma;                    // GPD scale per cluster
    Vector xi;                       // GPD shape per cluster
    double gamma0 = 1.0;             // between-cluster decay rate
    Vector epsilon;                  // gamma_j = gamma0 * exp(-epsilon_j)
    double beta = 1.0;               // beta-binomial dispersion
    Hyperparameters hyper;

    double gamma(int j) const;       // gamma0 * exp(-epsilon_j)
};

// Nearest-centre labels; ties broken by the lowest cluster index.
std::vector<int> assign_labels(const std::vector<int>& centres, const Matrix& distances);

// As above, also reporting sites whose nearest-centre distance is attained
// by more than one centre.
std::pair<std::vector<int>, std::vector<int>> assign_labels_with_ties(
    const std::vector<int>& centres, const Matrix& distances);

// Reports every invariant violation; never throws. fixed_labels skips the
// centre/label consistency check (used when a partition is imposed).
std::vector<std::string> validate_state(const ClusterState& state, const SiteData& data,
                                        bool fixed_labels = false);

std::vector<std::string> validate_site_data(const SiteData& data);

}  // namespace extremeclust
