#pragma once
// Reversible-jump sampler over the number of clusters, their centres and all
// model parameters. Seven moves: birth, death and shift change the centre
// representation; sigma, xi and chi are prior-proposal independence samplers
// accepted on likelihood ratios; hyper draws the conjugate full
// conditionals. Birth/death acceptance ratios are assembled from the full
// posterior difference plus the proposal-choice densities, so the uniform
// centre-prior and slot-choice terms cancel arithmetically rather than by
// hand. The J = 1 <-> 2 transition uses the two-draw construction for the
// dependence rates with Jacobian exp(eps1*).

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "extremeclust/data_model.hpp"
#include "extremeclust/dependence.hpp"
#include "extremeclust/marginal.hpp"
#include "extremeclust/priors.hpp"
#include "extremeclust/rng.hpp"

namespace extremeclust {

enum class Move : int { Birth = 0, Death, Shift, Sigma, Xi, Chi, Hyper };
inline constexpr int n_move_types = 7;
inline constexpr const char* move_names[n_move_types] = {"birth", "death",  "shift", "sigma",
                                                         "xi",    "chi",    "hyper"};

struct MoveConfig {
    double birth = 0.2, death = 0.2, shift = 0.2;
    double sigma = 0.1, xi = 0.1, chi = 0.1, hyper = 0.1;

    std::array<double, n_move_types> probabilities() const;
    void validate() const;  // nonnegative, sum to 1

    // birth/death/shift zeroed, remaining mass renormalized (used by CWMC).
    static MoveConfig fixed_partition();
};

struct ChainConfig {
    long iterations = 0;
    long burn_in = 0;
    int thinning = 1;
    int initial_clusters = 5;
    std::uint64_t seed = 1;
    bool flat_likelihood = false;   // force both likelihoods to 0 (prior recovery)
    bool fixed_labels = false;      // impose initial_labels, never touch them
    std::vector<int> initial_labels;
    int validate_every = 0;         // assert invariants every n-th iteration

    void validate() const;
};

struct TraceSample {
    long iteration = 0;
    ClusterState state;
    double log_post = 0.0;
};

struct MoveStats {
    std::array<long, n_move_types> proposed{};
    std::array<long, n_move_types> accepted{};
};

struct TraceStore {
    std::vector<TraceSample> samples;
    MoveStats stats;
    int n_sites = 0;
};

class Sampler {
public:
    Sampler(const SiteData& data, const DependenceCounts& counts, const Exceedances& exc,
            ChainConfig chain_cfg, MoveConfig move_cfg, PriorConstants priors = {});

    void init();                          // draw the initial state
    void set_state(const ClusterState&);  // inject a state and refresh internals

    const ClusterState& state() const { return state_; }
    double marginal_loglik() const;
    double dependence_loglik() const;
    double log_posterior() const;

    // One full proposal: candidate state with refreshed blocks and the log
    // Metropolis-Hastings ratio. nullopt when the move is unavailable
    // (birth at J = K, death at J = 1, shift with no free neighbour, or a
    // candidate cluster whose fit fails).
    struct Proposal {
        ClusterState state;
        std::vector<std::shared_ptr<const ClusterFit>> fits;
        std::vector<double> marg_ll;
        double dep_ll = 0.0;
        double log_ratio = 0.0;
        int slot = -1;  // inserted / removed / shifted cluster index
    };

    std::optional<Proposal> propose_birth();
    std::optional<Proposal> propose_death();
    std::optional<Proposal> propose_death_of(int slot);  // deterministic (tests)
    std::optional<Proposal> propose_shift();
    void apply(const Proposal& proposal);

    void sweep_sigma();
    void sweep_xi();
    void sweep_chi();
    void update_hyper();

    void step();
    TraceStore run(const std::function<void(const TraceSample&)>& on_sample = nullptr);

    const MoveStats& stats() const { return stats_; }
    const std::vector<std::shared_ptr<const ClusterFit>>& cluster_fits() const { return fits_; }
    AdjustedMarginalCache& cache() { return cache_; }

private:
    std::vector<std::vector<int>> members_of(const std::vector<int>& labels, int n_clusters) const;
    void refresh_derived();
    bool mh_accept(double log_ratio, RngStream& rng);
    double log_prior_now(const ClusterState& s) const;
    std::optional<Proposal> build_proposal(ClusterState candidate, int changed_slot,
                                           int reuse_offset_from);

    const SiteData& data_;
    const DependenceCounts& counts_;
    const Exceedances& exc_;
    ChainConfig cfg_;
    MoveConfig moves_;
    PriorConstants priors_;
    AdjustedMarginalCache cache_;

    ClusterState state_;
    std::vector<std::shared_ptr<const ClusterFit>> fits_;
    std::vector<double> marg_ll_;
    double dep_ll_ = 0.0;
    bool initialized_ = false;
    long iteration_ = 0;
    MoveStats stats_;

    RngStream rng_select_, rng_init_, rng_birth_, rng_death_, rng_shift_, rng_sigma_, rng_xi_,
        rng_chi_, rng_hyper_;
};

TraceStore run_chain(const SiteData& data, const DependenceCounts& counts,
                     const Exceedances& exc, const ChainConfig& chain_cfg,
                     const MoveConfig& move_cfg, const PriorConstants& priors = {},
                     const std::function<void(const TraceSample&)>& on_sample = nullptr);

}  // namespace extremeclust
