#include "extremeclust/rjmcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "extremeclust/distributions.hpp"

namespace extremeclust {

namespace {

Vector insert_at(const Vector& v, int pos, double value) {
    Vector out(v.size() + 1);
    out.head(pos) = v.head(pos);
    out(pos) = value;
    out.tail(v.size() - pos) = v.tail(v.size() - pos);
    return out;
}

Vector erase_at(const Vector& v, int pos) {
    Vector out(v.size() - 1);
    out.head(pos) = v.head(pos);
    out.tail(v.size() - 1 - pos) = v.tail(v.size() - pos - 1);
    return out;
}

// Lognormal log-density parametrized by its mean and variance.
struct LognormalMoments {
    double mu;
    double log_var;
    LognormalMoments(double mean, double variance)
        : mu(std::log(mean) - 0.5 * std::log1p(variance / (mean * mean))),
          log_var(std::log1p(variance / (mean * mean))) {}
    double logpdf(double x) const { return lognormal_logpdf(x, mu, log_var); }
};

double prior_lognormal_variance(const Hyperparameters& h) {
    return std::expm1(h.theta_sigma) * std::exp(2.0 * h.mu_sigma + h.theta_sigma);
}

constexpr double pos_inf = std::numeric_limits<double>::infinity();

}  // namespace

std::array<double, n_move_types> MoveConfig::probabilities() const {
    return {birth, death, shift, sigma, xi, chi, hyper};
}

void MoveConfig::validate() const {
    double total = 0.0;
    for (double p : probabilities()) {
        if (p < 0.0) throw std::invalid_argument("MoveConfig: probabilities must be nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("MoveConfig: probabilities must sum to 1");
}

MoveConfig MoveConfig::fixed_partition() {
    MoveConfig m;
    m.birth = m.death = m.shift = 0.0;
    m.sigma = m.xi = m.chi = m.hyper = 0.25;
    return m;
}

void ChainConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("ChainConfig: iterations must be positive");
    if (thinning < 1) throw std::invalid_argument("ChainConfig: thinning must be >= 1");
    if (burn_in < 0 || burn_in >= iterations)
        throw std::invalid_argument("ChainConfig: need 0 <= burn_in < iterations");
    if (fixed_labels && initial_labels.empty())
        throw std::invalid_argument("ChainConfig: fixed_labels requires initial_labels");
}

Sampler::Sampler(const SiteData& data, const DependenceCounts& counts, const Exceedances& exc,
                 ChainConfig chain_cfg, MoveConfig move_cfg, PriorConstants priors)
    : data_(data),
      counts_(counts),
      exc_(exc),
      cfg_(std::move(chain_cfg)),
      moves_(move_cfg),
      priors_(priors),
      cache_(exc_),
      rng_select_(RngStream::derive(cfg_.seed, "move_select")),
      rng_init_(RngStream::derive(cfg_.seed, "init")),
      rng_birth_(RngStream::derive(cfg_.seed, "birth")),
      rng_death_(RngStream::derive(cfg_.seed, "death")),
      rng_shift_(RngStream::derive(cfg_.seed, "shift")),
      rng_sigma_(RngStream::derive(cfg_.seed, "sigma")),
      rng_xi_(RngStream::derive(cfg_.seed, "xi")),
      rng_chi_(RngStream::derive(cfg_.seed, "chi")),
      rng_hyper_(RngStream::derive(cfg_.seed, "hyper")) {
    cfg_.validate();
    moves_.validate();
    if (cfg_.fixed_labels && (moves_.birth > 0.0 || moves_.death > 0.0 || moves_.shift > 0.0))
        throw std::invalid_argument("Sampler: fixed_labels requires zero birth/death/shift mass");
}

std::vector<std::vector<int>> Sampler::members_of(const std::vector<int>& labels,
                                                  int n_clusters) const {
    std::vector<std::vector<int>> members(n_clusters);
    for (int k = 0; k < static_cast<int>(labels.size()); ++k) members[labels[k]].push_back(k);
    return members;
}

void Sampler::refresh_derived() {
    const int J = state_.n_clusters;
    fits_.assign(J, nullptr);
    marg_ll_.assign(J, 0.0);
    if (!cfg_.flat_likelihood) {
        const auto members = members_of(state_.labels, J);
        for (int j = 0; j < J; ++j) {
            fits_[j] = cache_.get(members[j]);
            marg_ll_[j] = cluster_loglik_adjusted(*fits_[j], exc_, state_.sigma(j), state_.xi(j));
        }
        dep_ll_ = loglik_dep(state_, counts_, data_);
    } else {
        dep_ll_ = 0.0;
    }
}

void Sampler::init() {
    const int K = data_.n_sites;
    ClusterState s;
    if (cfg_.fixed_labels) {
        if (static_cast<int>(cfg_.initial_labels.size()) != K)
            throw std::invalid_argument("Sampler: initial_labels must have K entries");
        s.labels = cfg_.initial_labels;
        s.n_clusters = *std::max_element(s.labels.begin(), s.labels.end()) + 1;
        // Representative medoids; unused by the enabled moves.
        const auto members = members_of(s.labels, s.n_clusters);
        for (const auto& mem : members) {
            int best = mem.front();
            double best_sum = pos_inf;
            for (int k : mem) {
                double sum = 0.0;
                for (int kp : mem) sum += data_.distances(k, kp);
                if (sum < best_sum) {
                    best_sum = sum;
                    best = k;
                }
            }
            s.centres.push_back(best);
        }
    } else {
        const int J0 = std::min(std::max(cfg_.initial_clusters, 1), K);
        std::vector<int> pool(K);
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < J0; ++i) {
            const int j = i + static_cast<int>(rng_init_.uniform_int(K - i));
            std::swap(pool[i], pool[j]);
        }
        s.centres.assign(pool.begin(), pool.begin() + J0);
        s.n_clusters = J0;
        s.labels = assign_labels(s.centres, data_.distances);
    }

    s.hyper = initial_hyperparameters(priors_);
    const int J = s.n_clusters;
    s.sigma.resize(J);
    s.xi.resize(J);
    s.epsilon.resize(J);
    for (int j = 0; j < J; ++j) {
        s.sigma(j) = rng_init_.lognormal(s.hyper.mu_sigma, s.hyper.theta_sigma);
        s.xi(j) = rng_init_.normal(s.hyper.mu_xi, s.hyper.theta_xi);
        s.epsilon(j) = J >= 2 ? rng_init_.exponential(s.hyper.theta_epsilon) : 0.0;
    }
    s.gamma0 = rng_init_.exponential(priors_.gamma0_rate);
    s.beta = rng_init_.exponential(priors_.beta_rate);

    state_ = std::move(s);
    refresh_derived();
    initialized_ = true;
}

void Sampler::set_state(const ClusterState& s) {
    state_ = s;
    refresh_derived();
    initialized_ = true;
}

double Sampler::marginal_loglik() const {
    return std::accumulate(marg_ll_.begin(), marg_ll_.end(), 0.0);
}

double Sampler::dependence_loglik() const { return dep_ll_; }

double Sampler::log_prior_now(const ClusterState& s) const {
    return log_prior(s, data_.n_sites, priors_);
}

double Sampler::log_posterior() const {
    return marginal_loglik() + dep_ll_ + log_prior_now(state_);
}

bool Sampler::mh_accept(double log_ratio, RngStream& rng) {
    if (!(log_ratio > neg_inf)) return false;  // also rejects NaN
    if (log_ratio >= 0.0) return true;
    return std::log(rng.uniform01()) < log_ratio;
}

// Candidate blocks and per-cluster likelihood terms, reusing the current
// cluster fits wherever the member set carried over unchanged.
// reuse_offset_from: birth inserted a slot (+1), death removed one (-1),
// shift kept the indexing (0).
std::optional<Sampler::Proposal> Sampler::build_proposal(ClusterState candidate, int changed_slot,
                                                         int reuse_offset_from) {
    Proposal prop;
    prop.slot = changed_slot;
    const int J = candidate.n_clusters;
    prop.fits.assign(J, nullptr);
    prop.marg_ll.assign(J, 0.0);

    if (!cfg_.flat_likelihood) {
        const auto members = members_of(candidate.labels, J);
        const auto cur_members = members_of(state_.labels, state_.n_clusters);
        for (int j = 0; j < J; ++j) {
            int old_j = j;
            if (reuse_offset_from > 0) {  // birth: slots at and above shifted up
                if (j == changed_slot)
                    old_j = -1;
                else if (j > changed_slot)
                    old_j = j - 1;
            } else if (reuse_offset_from < 0) {  // death
                if (j >= changed_slot) old_j = j + 1;
            }
            if (old_j >= 0 && old_j < state_.n_clusters && members[j] == cur_members[old_j] &&
                candidate.sigma(j) == state_.sigma(old_j) &&
                candidate.xi(j) == state_.xi(old_j)) {
                prop.fits[j] = fits_[old_j];
                prop.marg_ll[j] = marg_ll_[old_j];
                continue;
            }
            try {
                prop.fits[j] = cache_.get(members[j]);
            } catch (const FitError&) {
                return std::nullopt;  // degenerate candidate cluster
            }
            prop.marg_ll[j] =
                cluster_loglik_adjusted(*prop.fits[j], exc_, candidate.sigma(j), candidate.xi(j));
        }
        prop.dep_ll = loglik_dep(candidate, counts_, data_);
    }
    prop.state = std::move(candidate);
    return prop;
}

std::optional<Sampler::Proposal> Sampler::propose_birth() {
    const int K = data_.n_sites;
    const int J = state_.n_clusters;
    if (J >= K) return std::nullopt;
    if (!(moves_.birth > 0.0) || !(moves_.death > 0.0)) return std::nullopt;

    std::vector<int> free_sites;
    free_sites.reserve(K - J);
    std::vector<bool> is_centre(K, false);
    for (int c : state_.centres) is_centre[c] = true;
    for (int k = 0; k < K; ++k)
        if (!is_centre[k]) free_sites.push_back(k);

    const int new_centre = free_sites[rng_birth_.uniform_int(free_sites.size())];
    const int slot = static_cast<int>(rng_birth_.uniform_int(J + 1));

    ClusterState cand = state_;
    cand.n_clusters = J + 1;
    cand.centres.insert(cand.centres.begin() + slot, new_centre);
    cand.labels = assign_labels(cand.centres, data_.distances);

    std::vector<int> gained;
    for (int k = 0; k < K; ++k)
        if (cand.labels[k] == slot) gained.push_back(k);
    if (gained.empty())  // impossible: the new centre is nearest to itself
        throw std::logic_error("propose_birth: new cluster has no members");
    const double n_gained = static_cast<double>(gained.size());

    const auto& h = state_.hyper;
    double mean_xi = 0.0, mean_sigma = 0.0;
    for (int k : gained) {
        mean_xi += state_.xi(state_.labels[k]);
        mean_sigma += state_.sigma(state_.labels[k]);
    }
    mean_xi /= n_gained;
    mean_sigma /= n_gained;

    const double new_xi = rng_birth_.normal(mean_xi, h.theta_xi);
    const LognormalMoments ln_prop(mean_sigma, prior_lognormal_variance(h));
    const double new_sigma = rng_birth_.lognormal(ln_prop.mu, ln_prop.log_var);

    double log_q_params = normal_logpdf(new_xi, mean_xi, h.theta_xi) + ln_prop.logpdf(new_sigma);
    double log_jacobian = 0.0;

    cand.sigma = insert_at(state_.sigma, slot, new_sigma);
    cand.xi = insert_at(state_.xi, slot, new_xi);

    if (J >= 2) {
        double eps_sum = 0.0;
        for (int k : gained) eps_sum += state_.epsilon(state_.labels[k]);
        const double rate = eps_sum > 0.0 ? n_gained / eps_sum : h.theta_epsilon;
        const double new_eps = rng_birth_.exponential(rate);
        log_q_params += exponential_logpdf(new_eps, rate);
        cand.epsilon = insert_at(state_.epsilon, slot, new_eps);
    } else {
        // J = 1 -> 2: two draws determine (gamma0, eps_old, eps_new) from
        // gamma_1; the map (g1, e1, e2) -> (g1 e^{e1}, e1, e2) has Jacobian
        // determinant e^{e1}.
        const double eps1 = rng_birth_.exponential(h.theta_epsilon);
        const double eps2 = rng_birth_.exponential(h.theta_epsilon);
        log_q_params += exponential_logpdf(eps1, h.theta_epsilon) +
                        exponential_logpdf(eps2, h.theta_epsilon);
        log_jacobian = eps1;
        cand.gamma0 = state_.gamma0 * std::exp(eps1);
        cand.epsilon.resize(2);
        cand.epsilon(slot) = eps2;        // new cluster
        cand.epsilon(1 - slot) = eps1;    // pre-existing cluster keeps its gamma
    }

    auto prop = build_proposal(std::move(cand), slot, +1);
    if (!prop) return std::nullopt;

    const double cand_lp = std::accumulate(prop->marg_ll.begin(), prop->marg_ll.end(), 0.0) +
                           prop->dep_ll + log_prior_now(prop->state);
    const double cur_lp = marginal_loglik() + dep_ll_ + log_prior_now(state_);
    // Forward: pick the move, a free site, a slot and the parameters.
    const double log_q_fwd =
        std::log(moves_.birth) - std::log(static_cast<double>(K - J)) -
        std::log(static_cast<double>(J + 1)) + log_q_params;
    // Reverse: a death move removing one of J+1 centres.
    const double log_q_rev = std::log(moves_.death) - std::log(static_cast<double>(J + 1));

    if (cand_lp == neg_inf)
        prop->log_ratio = neg_inf;
    else if (cur_lp == neg_inf)
        prop->log_ratio = pos_inf;
    else
        prop->log_ratio = cand_lp - cur_lp + log_q_rev - log_q_fwd + log_jacobian;
    return prop;
}

std::optional<Sampler::Proposal> Sampler::propose_death() {
    if (state_.n_clusters <= 1) return std::nullopt;
    return propose_death_of(static_cast<int>(rng_death_.uniform_int(state_.n_clusters)));
}

std::optional<Sampler::Proposal> Sampler::propose_death_of(int slot) {
    const int K = data_.n_sites;
    const int J = state_.n_clusters;
    if (J <= 1) return std::nullopt;
    if (!(moves_.birth > 0.0) || !(moves_.death > 0.0)) return std::nullopt;

    ClusterState cand = state_;
    cand.n_clusters = J - 1;
    cand.centres.erase(cand.centres.begin() + slot);
    cand.labels = assign_labels(cand.centres, data_.distances);
    cand.sigma = erase_at(state_.sigma, slot);
    cand.xi = erase_at(state_.xi, slot);

    double log_jacobian = 0.0;
    if (J - 1 >= 2) {
        cand.epsilon = erase_at(state_.epsilon, slot);
    } else {
        // Collapse to the single-cluster parametrization gamma_1.
        const int survivor = slot == 0 ? 1 : 0;
        cand.gamma0 = state_.gamma(survivor);
        cand.epsilon = Vector::Zero(1);
        log_jacobian = -state_.epsilon(survivor);
    }

    // Density of the reverse birth re-creating the removed cluster, with
    // proposal means taken from the post-death state.
    std::vector<int> lost;
    for (int k = 0; k < K; ++k)
        if (state_.labels[k] == slot) lost.push_back(k);
    const double n_lost = static_cast<double>(lost.size());
    const auto& h = state_.hyper;

    double mean_xi = 0.0, mean_sigma = 0.0;
    for (int k : lost) {
        mean_xi += cand.xi(cand.labels[k]);
        mean_sigma += cand.sigma(cand.labels[k]);
    }
    mean_xi /= n_lost;
    mean_sigma /= n_lost;

    const LognormalMoments ln_prop(mean_sigma, prior_lognormal_variance(h));
    double log_q_params = normal_logpdf(state_.xi(slot), mean_xi, h.theta_xi) +
                          ln_prop.logpdf(state_.sigma(slot));
    if (J - 1 >= 2) {
        double eps_sum = 0.0;
        for (int k : lost) eps_sum += cand.epsilon(cand.labels[k]);
        const double rate = eps_sum > 0.0 ? n_lost / eps_sum : h.theta_epsilon;
        log_q_params += exponential_logpdf(state_.epsilon(slot), rate);
    } else {
        const int survivor = slot == 0 ? 1 : 0;
        log_q_params += exponential_logpdf(state_.epsilon(survivor), h.theta_epsilon) +
                        exponential_logpdf(state_.epsilon(slot), h.theta_epsilon);
    }

    auto prop = build_proposal(std::move(cand), slot, -1);
    if (!prop) return std::nullopt;

    const double cand_lp = std::accumulate(prop->marg_ll.begin(), prop->marg_ll.end(), 0.0) +
                           prop->dep_ll + log_prior_now(prop->state);
    const double cur_lp = marginal_loglik() + dep_ll_ + log_prior_now(state_);
    const double log_q_fwd = std::log(moves_.death) - std::log(static_cast<double>(J));
    const double log_q_rev =
        std::log(moves_.birth) - std::log(static_cast<double>(K - J + 1)) -
        std::log(static_cast<double>(J)) + log_q_params;

    if (cand_lp == neg_inf)
        prop->log_ratio = neg_inf;
    else if (cur_lp == neg_inf)
        prop->log_ratio = pos_inf;
    else
        prop->log_ratio = cand_lp - cur_lp + log_q_rev - log_q_fwd + log_jacobian;
    return prop;
}

std::optional<Sampler::Proposal> Sampler::propose_shift() {
    const int J = state_.n_clusters;
    const int slot = static_cast<int>(rng_shift_.uniform_int(J));
    const int old_centre = state_.centres[slot];

    std::vector<bool> is_centre(data_.n_sites, false);
    for (int c : state_.centres) is_centre[c] = true;

    std::vector<int> hood;
    for (int k : data_.neighbours[old_centre])
        if (!is_centre[k]) hood.push_back(k);
    if (hood.empty()) return std::nullopt;

    const int new_centre = hood[rng_shift_.uniform_int(hood.size())];

    ClusterState cand = state_;
    cand.centres[slot] = new_centre;
    cand.labels = assign_labels(cand.centres, data_.distances);

    std::vector<bool> is_centre_new(data_.n_sites, false);
    for (int c : cand.centres) is_centre_new[c] = true;
    std::vector<int> hood_rev;
    for (int k : data_.neighbours[new_centre])
        if (!is_centre_new[k]) hood_rev.push_back(k);
    // the reverse neighbourhood always contains the displaced centre
    if (std::find(hood_rev.begin(), hood_rev.end(), old_centre) == hood_rev.end())
        throw std::logic_error("propose_shift: old centre missing from reverse neighbourhood");

    auto prop = build_proposal(std::move(cand), slot, 0);
    if (!prop) return std::nullopt;

    const double cand_lp = std::accumulate(prop->marg_ll.begin(), prop->marg_ll.end(), 0.0) +
                           prop->dep_ll + log_prior_now(prop->state);
    const double cur_lp = marginal_loglik() + dep_ll_ + log_prior_now(state_);
    if (cand_lp == neg_inf)
        prop->log_ratio = neg_inf;
    else if (cur_lp == neg_inf)
        prop->log_ratio = pos_inf;
    else
        prop->log_ratio = cand_lp - cur_lp + std::log(static_cast<double>(hood.size())) -
                          std::log(static_cast<double>(hood_rev.size()));
    return prop;
}

void Sampler::apply(const Proposal& proposal) {
    state_ = proposal.state;
    fits_ = proposal.fits;
    marg_ll_ = proposal.marg_ll;
    dep_ll_ = proposal.dep_ll;
}

void Sampler::sweep_sigma() {
    const int J = state_.n_clusters;
    const auto& h = state_.hyper;
    for (int j = 0; j < J; ++j) {
        ++stats_.proposed[static_cast<int>(Move::Sigma)];
        const double cand = rng_sigma_.lognormal(h.mu_sigma, h.theta_sigma);
        const double cand_ll =
            cfg_.flat_likelihood
                ? 0.0
                : cluster_loglik_adjusted(*fits_[j], exc_, cand, state_.xi(j));
        double ratio;
        if (cand_ll == neg_inf)
            ratio = neg_inf;
        else if (marg_ll_[j] == neg_inf)
            ratio = pos_inf;
        else
            ratio = cand_ll - marg_ll_[j];
        if (mh_accept(ratio, rng_sigma_)) {
            state_.sigma(j) = cand;
            marg_ll_[j] = cand_ll;
            ++stats_.accepted[static_cast<int>(Move::Sigma)];
        }
    }
}

void Sampler::sweep_xi() {
    const int J = state_.n_clusters;
    const auto& h = state_.hyper;
    for (int j = 0; j < J; ++j) {
        ++stats_.proposed[static_cast<int>(Move::Xi)];
        const double cand = rng_xi_.normal(h.mu_xi, h.theta_xi);
        const double cand_ll =
            cfg_.flat_likelihood
                ? 0.0
                : cluster_loglik_adjusted(*fits_[j], exc_, state_.sigma(j), cand);
        double ratio;
        if (cand_ll == neg_inf)
            ratio = neg_inf;
        else if (marg_ll_[j] == neg_inf)
            ratio = pos_inf;
        else
            ratio = cand_ll - marg_ll_[j];
        if (mh_accept(ratio, rng_xi_)) {
            state_.xi(j) = cand;
            marg_ll_[j] = cand_ll;
            ++stats_.accepted[static_cast<int>(Move::Xi)];
        }
    }
}

void Sampler::sweep_chi() {
    const auto& h = state_.hyper;
    const auto dep_of = [this]() {
        return cfg_.flat_likelihood ? 0.0 : loglik_dep(state_, counts_, data_);
    };
    const auto try_update = [this, &dep_of](double& field, double cand) {
        ++stats_.proposed[static_cast<int>(Move::Chi)];
        const double old = field;
        field = cand;
        const double cand_dep = dep_of();
        double ratio;
        if (cand_dep == neg_inf)
            ratio = neg_inf;
        else if (dep_ll_ == neg_inf)
            ratio = pos_inf;
        else
            ratio = cand_dep - dep_ll_;
        if (mh_accept(ratio, rng_chi_)) {
            dep_ll_ = cand_dep;
            ++stats_.accepted[static_cast<int>(Move::Chi)];
        } else {
            field = old;
        }
    };

    if (state_.n_clusters >= 2)
        for (int j = 0; j < state_.n_clusters; ++j)
            try_update(state_.epsilon(j), rng_chi_.exponential(h.theta_epsilon));
    try_update(state_.gamma0, rng_chi_.exponential(priors_.gamma0_rate));
    try_update(state_.beta, rng_chi_.exponential(priors_.beta_rate));
}

void Sampler::update_hyper() {
    ++stats_.proposed[static_cast<int>(Move::Hyper)];
    ++stats_.accepted[static_cast<int>(Move::Hyper)];
    state_.hyper = gibbs_hyper(state_, priors_, rng_hyper_);
}

void Sampler::step() {
    const auto probs = moves_.probabilities();
    const double u = rng_select_.uniform01();
    double acc = 0.0;
    int pick = n_move_types - 1;
    for (int m = 0; m < n_move_types; ++m) {
        acc += probs[m];
        if (u < acc) {
            pick = m;
            break;
        }
    }

    switch (static_cast<Move>(pick)) {
        case Move::Birth: {
            ++stats_.proposed[pick];
            auto prop = propose_birth();
            if (prop && mh_accept(prop->log_ratio, rng_birth_)) {
                apply(*prop);
                ++stats_.accepted[pick];
            }
            break;
        }
        case Move::Death: {
            ++stats_.proposed[pick];
            auto prop = propose_death();
            if (prop && mh_accept(prop->log_ratio, rng_death_)) {
                apply(*prop);
                ++stats_.accepted[pick];
            }
            break;
        }
        case Move::Shift: {
            ++stats_.proposed[pick];
            auto prop = propose_shift();
            if (prop && mh_accept(prop->log_ratio, rng_shift_)) {
                apply(*prop);
                ++stats_.accepted[pick];
            }
            break;
        }
        case Move::Sigma:
            sweep_sigma();
            break;
        case Move::Xi:
            sweep_xi();
            break;
        case Move::Chi:
            sweep_chi();
            break;
        case Move::Hyper:
            update_hyper();
            break;
    }
}

TraceStore Sampler::run(const std::function<void(const TraceSample&)>& on_sample) {
    if (!initialized_) init();
    TraceStore store;
    store.n_sites = data_.n_sites;
    const long retained = (cfg_.iterations - cfg_.burn_in) / cfg_.thinning;
    store.samples.reserve(std::max<long>(retained, 0));

    for (long it = 1; it <= cfg_.iterations; ++it) {
        iteration_ = it;
        step();
        if (cfg_.validate_every > 0 && it % cfg_.validate_every == 0) {
            const auto violations = validate_state(state_, data_, cfg_.fixed_labels);
            bool fatal = false;
            for (const auto& v : violations)
                if (v.rfind("tie:", 0) != 0) fatal = true;
            if (fatal) {
                std::ostringstream msg;
                msg << "invariant violation at iteration " << it << ":";
                for (const auto& v : violations) msg << " [" << v << "]";
                throw std::logic_error(msg.str());
            }
        }
        if (it > cfg_.burn_in && (it - cfg_.burn_in) % cfg_.thinning == 0) {
            TraceSample sample;
            sample.iteration = it;
            sample.state = state_;
            sample.log_post = log_posterior();
            if (on_sample) on_sample(sample);
            store.samples.push_back(std::move(sample));
        }
    }
    store.stats = stats_;
    return store;
}

TraceStore run_chain(const SiteData& data, const DependenceCounts& counts,
                     const Exceedances& exc, const ChainConfig& chain_cfg,
                     const MoveConfig& move_cfg, const PriorConstants& priors,
                     const std::function<void(const TraceSample&)>& on_sample) {
    Sampler sampler(data, counts, exc, chain_cfg, move_cfg, priors);
    return sampler.run(on_sample);
}

}  // namespace extremeclust
