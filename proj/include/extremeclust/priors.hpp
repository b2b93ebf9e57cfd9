#pragma once
// Prior densities for the cluster model and the conjugate full-conditional
// draws used by the Hyper move. Gamma and Exponential are rate-parametrized,
// Inverse-Gamma takes (shape, scale), Normal/Lognormal second arguments are
// variances (a config switch reinterprets the fixed hyper-prior scales as
// standard deviations instead).
//
// At J = 1 the dependence model is fully described by gamma_1 (stored in
// gamma0, epsilon = {0}), so no epsilon terms enter the prior or the
// theta_epsilon update in that case.

#include "extremeclust/data_model.hpp"
#include "extremeclust/rng.hpp"

namespace extremeclust {

struct PriorConstants {
    double kappa_shape = 1.0;
    double kappa_rate = 0.001;
    double gamma0_rate = 0.001;
    double beta_rate = 0.01;
    double mu_sigma_var = 1.0;    // Normal(0, .) hyper-prior on mu_sigma
    double mu_xi_var = 0.2;       // Normal(0, .) hyper-prior on mu_xi
    double theta_sigma_shape = 1.0, theta_sigma_scale = 0.1;  // Inverse-Gamma
    double theta_xi_shape = 1.0, theta_xi_scale = 0.1;        // Inverse-Gamma
    double theta_eps_shape = 5.0, theta_eps_rate = 2.0;       // Gamma

    // Reinterpret the fixed normal hyper-prior scales as standard deviations.
    static PriorConstants with_sd_reading();
};

// Number of free epsilon parameters at a given cluster count.
inline int n_free_epsilon(int n_clusters) { return n_clusters >= 2 ? n_clusters : 0; }

// Full joint log prior: J, centres, cluster parameters and hyperparameters.
double log_prior(const ClusterState& state, int n_sites, const PriorConstants& pc);

// Exact conjugate draws of (kappa, mu_sigma, theta_sigma, mu_xi, theta_xi,
// theta_epsilon) given the current cluster parameters.
Hyperparameters gibbs_hyper(const ClusterState& state, const PriorConstants& pc,
                            RngStream& rng);

// Hyperparameter starting values: prior means, with the prior median for the
// mean-undefined Inverse-Gamma(1, .) components.
Hyperparameters initial_hyperparameters(const PriorConstants& pc);

}  // namespace extremeclust
