#pragma once
// Synthetic-data generators for the three built-in simulation studies and
// for user experiments: GPD excesses (independent, rank-matched, or coupled
// through a Gaussian copula) and beta-binomial dependence counts. A bundled
// 20-site synthetic map with a three-cluster ground truth lets the studies
// run out of the box.

#include <vector>

#include "extremeclust/data_model.hpp"
#include "extremeclust/marginal.hpp"
#include "extremeclust/preprocess.hpp"
#include "extremeclust/rng.hpp"
#include "extremeclust/types.hpp"

namespace extremeclust {

// Synthetic 20-site map: planar locations in three spatial groups, Euclidean
// distances rescaled to max 1, Delaunay adjacency, and the true partition
// realized as the nearest-centre labelling of three centre sites.
struct SyntheticMap {
    Matrix locations;              // 20 x 2
    Matrix distances;              // rescaled
    std::vector<SitePair> adjacency;
    std::vector<int> true_centres;  // 3 sites
    std::vector<int> true_labels;   // 20 entries in {0,1,2}
};
const SyntheticMap& fixture_map();

// Independent GPD(sigma_{Z_k}, xi_{Z_k}) excesses, n_excesses per site,
// via inverse-CDF sampling.
Exceedances simulate_marginals(int n_sites, int n_excesses, const Vector& sigma,
                               const Vector& xi, const std::vector<int>& labels,
                               RngStream& rng);

// Reorders each site's excesses so the m-th largest value occurs at the same
// period at every site; marginal multisets are unchanged.
void impose_rank_matching(Exceedances& exc);

// Per ordered adjacent pair: latent chi ~ Beta(bb_shape(gamma, d, beta)),
// then P ~ Binomial(Q, chi); both orientations drawn independently.
DependenceCounts simulate_dependence_counts(const std::vector<int>& labels,
                                            const Matrix& distances,
                                            const std::vector<SitePair>& adjacency,
                                            double gamma0, const Vector& epsilon, double beta,
                                            int q, RngStream& rng);

// Gaussian-copula coupled excesses: per period a multivariate normal draw is
// mapped through the standard normal CDF and the site-wise GPD quantile
// function, so marginals stay GPD(sigma_{Z_k}, xi_{Z_k}).
Exceedances simulate_gaussian_copula(int n_sites, int n_excesses, const Vector& sigma,
                                     const Vector& xi, const std::vector<int>& labels,
                                     const Matrix& correlation, RngStream& rng);

// Distance-decaying correlation exp(-d/rho) for the copula variant.
Matrix exponential_correlation(const Matrix& distances, double rho);

// A fully assembled study dataset on the fixture map.
struct StudyData {
    SiteData data;
    DependenceCounts counts;
    Exceedances exc;
    std::vector<int> true_labels;
    Vector true_sigma, true_xi;
    double true_gamma0 = 0.0, true_beta = 0.0;
};

// study 1: one cluster, independent excesses; study 2: study 1 with ranks
// matched across sites; study 3: three clusters, optionally copula-coupled
// excesses (rho is the copula correlation range).
StudyData make_study(int study, std::uint64_t seed, bool dependent = false, double rho = 0.5);

}  // namespace extremeclust
