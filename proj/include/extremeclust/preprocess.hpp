#pragma once
// Turns raw time series into the two data views the model consumes:
// declustered site-wise exceedances and pairwise dependence counts, plus
// Voronoi adjacency for point-located sites.

#include <utility>
#include <vector>

#include "extremeclust/data_model.hpp"
#include "extremeclust/types.hpp"

namespace extremeclust {

struct RawSeries {
    std::vector<double> times;   // strictly increasing
    std::vector<double> values;  // NaN = missing
};

// Directed exceedance counts for adjacent pairs at the dependence threshold.
// Both orientations of each unordered adjacent pair are kept; under missing
// data the counts need not be symmetric.
struct DependenceCounts {
    struct PairCounts {
        int k = 0, kp = 0;          // unordered pair, k < kp
        int q_fwd = 0, p_fwd = 0;   // conditioning on kp, counting k (P[k,kp])
        int q_rev = 0, p_rev = 0;   // conditioning on k, counting kp (P[kp,k])
        double log_choose_fwd = 0.0;  // log C(q_fwd, p_fwd), fixed by the data
        double log_choose_rev = 0.0;
    };
    std::vector<PairCounts> entries;

    // Pairs with zero conditioning count in both orientations (excluded from
    // the likelihood; reported by `check`).
    std::vector<SitePair> empty_pairs() const;

    void finalize();  // fills the log binomial coefficients
};

// One value per period: the maximum over non-missing observations falling in
// [t_origin + p*period_length, t_origin + (p+1)*period_length). Returned
// times are the period start times, so redeclustering with the same grid is
// the identity.
RawSeries decluster(const RawSeries& series, double period_length, double t_origin);

// Empirical p-quantile (type 7) of the non-missing values; requires at
// least 10 of them.
double empirical_threshold(const std::vector<double>& values, double p);

// (x - mean) / sd over non-missing entries, sd with denominator n-1;
// missing entries preserved. Throws on fewer than 2 observations or zero
// variance.
std::vector<double> standardize(const std::vector<double>& values);

// Counts of joint exceedances of the site-wise empirical dep_threshold
// quantiles over adjacent pairs. Empirical CDFs use denominator m+1 over the
// m non-missing values so that F-hat < 1.
DependenceCounts dependence_counts(const SiteData& data);

double empirical_chi(int p, int q);

// Pairs whose Voronoi cells share an edge, computed as the Delaunay
// triangulation of the points. Exactly collinear inputs fall back to the
// one-dimensional Voronoi diagram (consecutive pairs). Degenerate cocircular
// configurations are resolved by a deterministic index-scaled perturbation,
// exposed separately so tests can reproduce it.
std::vector<SitePair> voronoi_adjacency(const Matrix& locations);
Matrix perturb_locations(const Matrix& locations);

}  // namespace extremeclust
