#include "extremeclust/priors.hpp"

#include <cmath>

#include "extremeclust/distributions.hpp"

namespace extremeclust {

PriorConstants PriorConstants::with_sd_reading() {
    PriorConstants pc;
    pc.mu_sigma_var = pc.mu_sigma_var * pc.mu_sigma_var;
    pc.mu_xi_var = pc.mu_xi_var * pc.mu_xi_var;
    return pc;
}

double log_prior(const ClusterState& state, int n_sites, const PriorConstants& pc) {
    const int J = state.n_clusters;
    const auto& h = state.hyper;

    if (!(h.kappa > 0.0) || !(h.theta_sigma > 0.0) || !(h.theta_xi > 0.0) ||
        !(h.theta_epsilon > 0.0))
        return neg_inf;
    if (J < 1 || J > n_sites) return neg_inf;

    double lp = poisson_logpmf(J - 1, h.kappa);
    // Uniform prior over ordered centre vectors: (K-J)!/K!.
    lp += std::lgamma(n_sites - J + 1.0) - std::lgamma(n_sites + 1.0);

    for (int j = 0; j < J; ++j) {
        lp += lognormal_logpdf(state.sigma(j), h.mu_sigma, h.theta_sigma);
        lp += normal_logpdf(state.xi(j), h.mu_xi, h.theta_xi);
    }
    if (J >= 2)
        for (int j = 0; j < J; ++j) lp += exponential_logpdf(state.epsilon(j), h.theta_epsilon);
    lp += exponential_logpdf(state.gamma0, pc.gamma0_rate);
    lp += exponential_logpdf(state.beta, pc.beta_rate);

    lp += normal_logpdf(h.mu_sigma, 0.0, pc.mu_sigma_var);
    lp += normal_logpdf(h.mu_xi, 0.0, pc.mu_xi_var);
    lp += inverse_gamma_logpdf(h.theta_sigma, pc.theta_sigma_shape, pc.theta_sigma_scale);
    lp += inverse_gamma_logpdf(h.theta_xi, pc.theta_xi_shape, pc.theta_xi_scale);
    lp += gamma_logpdf(h.theta_epsilon, pc.theta_eps_shape, pc.theta_eps_rate);
    lp += gamma_logpdf(h.kappa, pc.kappa_shape, pc.kappa_rate);
    return lp;
}

Hyperparameters gibbs_hyper(const ClusterState& state, const PriorConstants& pc,
                            RngStream& rng) {
    const int J = state.n_clusters;
    Hyperparameters h = state.hyper;

    h.kappa = rng.gamma(pc.kappa_shape + (J - 1), pc.kappa_rate + 1.0);

    // Normal mean with known variance, conjugate normal prior centred at 0.
    auto draw_mean = [&rng](double prior_var, double obs_var, double obs_sum, int n) {
        const double precision = 1.0 / prior_var + n / obs_var;
        return rng.normal(obs_sum / obs_var / precision, 1.0 / precision);
    };
    // Normal variance with known mean, conjugate inverse-gamma prior.
    auto draw_var = [&rng](double shape, double scale, double ss, int n) {
        return rng.inverse_gamma(shape + 0.5 * n, scale + 0.5 * ss);
    };

    double log_sigma_sum = 0.0;
    for (int j = 0; j < J; ++j) log_sigma_sum += std::log(state.sigma(j));
    h.mu_sigma = draw_mean(pc.mu_sigma_var, h.theta_sigma, log_sigma_sum, J);
    double ss_sigma = 0.0;
    for (int j = 0; j < J; ++j) {
        const double d = std::log(state.sigma(j)) - h.mu_sigma;
        ss_sigma += d * d;
    }
    h.theta_sigma = draw_var(pc.theta_sigma_shape, pc.theta_sigma_scale, ss_sigma, J);

    const double xi_sum = state.xi.sum();
    h.mu_xi = draw_mean(pc.mu_xi_var, h.theta_xi, xi_sum, J);
    double ss_xi = 0.0;
    for (int j = 0; j < J; ++j) {
        const double d = state.xi(j) - h.mu_xi;
        ss_xi += d * d;
    }
    h.theta_xi = draw_var(pc.theta_xi_shape, pc.theta_xi_scale, ss_xi, J);

    const int n_eps = n_free_epsilon(J);
    const double eps_sum = n_eps > 0 ? state.epsilon.sum() : 0.0;
    h.theta_epsilon = rng.gamma(pc.theta_eps_shape + n_eps, pc.theta_eps_rate + eps_sum);
    return h;
}

Hyperparameters initial_hyperparameters(const PriorConstants& pc) {
    Hyperparameters h;
    h.kappa = pc.kappa_shape / pc.kappa_rate;
    h.mu_sigma = 0.0;
    h.mu_xi = 0.0;
    // Inverse-Gamma(1, scale) has no mean; use the median scale/log(2).
    h.theta_sigma = pc.theta_sigma_scale / std::log(2.0);
    h.theta_xi = pc.theta_xi_scale / std::log(2.0);
    h.theta_epsilon = pc.theta_eps_shape / pc.theta_eps_rate;
    return h;
}

}  // namespace extremeclust
