#include "extremeclust/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace extremeclust {

SiteData SiteData::build(Matrix values, Matrix distances, std::vector<SitePair> adjacency,
                         Vector thresholds, double dep_threshold, Matrix locations) {
    SiteData d;
    d.n_sites = static_cast<int>(values.rows());
    d.n_periods = static_cast<int>(values.cols());
    if (d.n_sites < 1) throw std::invalid_argument("SiteData: need at least one site");
    if (distances.rows() != d.n_sites || distances.cols() != d.n_sites)
        throw std::invalid_argument("SiteData: distance matrix must be K x K");
    if (thresholds.size() != d.n_sites)
        throw std::invalid_argument("SiteData: thresholds must have K entries");
    if (!(dep_threshold >= 0.0 && dep_threshold < 1.0))
        throw std::invalid_argument("SiteData: dep_threshold must lie in [0,1)");
    if (locations.size() > 0 && (locations.rows() != d.n_sites || locations.cols() != 2))
        throw std::invalid_argument("SiteData: locations must be K x 2");

    double max_off = 0.0;
    for (int i = 0; i < d.n_sites; ++i) {
        if (distances(i, i) != 0.0)
            throw std::invalid_argument("SiteData: distance diagonal must be zero");
        for (int j = 0; j < d.n_sites; ++j) {
            if (distances(i, j) != distances(j, i))
                throw std::invalid_argument("SiteData: distance matrix must be symmetric");
            if (distances(i, j) < 0.0)
                throw std::invalid_argument("SiteData: distances must be nonnegative");
            if (i != j) max_off = std::max(max_off, distances(i, j));
        }
    }
    d.distance_scale = max_off > 0.0 ? max_off : 1.0;
    d.distances = distances / d.distance_scale;

    std::set<SitePair> seen;
    d.neighbours.assign(d.n_sites, {});
    for (auto& pr : adjacency) {
        int a = std::min(pr.first, pr.second);
        int b = std::max(pr.first, pr.second);
        if (a == b) throw std::invalid_argument("SiteData: adjacency must be irreflexive");
        if (a < 0 || b >= d.n_sites)
            throw std::invalid_argument("SiteData: adjacency references unknown site");
        if (!seen.insert({a, b}).second) continue;  // drop duplicates
        if (!(d.distances(a, b) > 0.0)) {
            std::ostringstream msg;
            msg << "SiteData: adjacent pair (" << a + 1 << "," << b + 1
                << ") has zero distance";
            throw std::invalid_argument(msg.str());
        }
        d.adjacency.push_back({a, b});
        d.neighbours[a].push_back(b);
        d.neighbours[b].push_back(a);
    }
    std::sort(d.adjacency.begin(), d.adjacency.end());
    for (auto& nb : d.neighbours) std::sort(nb.begin(), nb.end());

    d.observed = values.array().unaryExpr([](double v) { return !std::isnan(v); });
    d.values = std::move(values);
    d.locations = std::move(locations);
    d.thresholds = std::move(thresholds);
    d.dep_threshold = dep_threshold;
    return d;
}

bool SiteData::adjacent(int k, int kp) const {
    const auto& nb = neighbours[k];
    return std::binary_search(nb.begin(), nb.end(), kp);
}

double ClusterState::gamma(int j) const {
    return std::exp(std::log(gamma0) - epsilon(j));
}

std::pair<std::vector<int>, std::vector<int>> assign_labels_with_ties(
    const std::vector<int>& centres, const Matrix& distances) {
    const int n_sites = static_cast<int>(distances.rows());
    const int n_clusters = static_cast<int>(centres.size());
    if (n_clusters == 0) throw std::invalid_argument("assign_labels: empty centre vector");
    std::set<int> distinct(centres.begin(), centres.end());
    if (static_cast<int>(distinct.size()) != n_clusters)
        throw std::invalid_argument("assign_labels: duplicate centres");
    for (int c : centres)
        if (c < 0 || c >= n_sites)
            throw std::invalid_argument("assign_labels: centre index out of range");

    std::vector<int> labels(n_sites);
    std::vector<int> ties;
    for (int k = 0; k < n_sites; ++k) {
        int best = 0;
        double best_d = distances(k, centres[0]);
        bool tied = false;
        for (int j = 1; j < n_clusters; ++j) {
            const double dj = distances(k, centres[j]);
            if (dj < best_d) {
                best = j;
                best_d = dj;
                tied = false;
            } else if (dj == best_d) {
                tied = true;  // lowest index already held by `best`
            }
        }
        labels[k] = best;
        if (tied) ties.push_back(k);
    }
    return {std::move(labels), std::move(ties)};
}

std::vector<int> assign_labels(const std::vector<int>& centres, const Matrix& distances) {
    return assign_labels_with_ties(centres, distances).first;
}

std::vector<std::string> validate_state(const ClusterState& state, const SiteData& data,
                                        bool fixed_labels) {
    std::vector<std::string> out;
    const int J = state.n_clusters;
    const int K = data.n_sites;
    auto add = [&out](const std::string& s) { out.push_back(s); };

    if (J < 1) add("n_clusters below 1");
    if (!fixed_labels) {
        if (static_cast<int>(state.centres.size()) != J) add("centre vector length differs from J");
        std::set<int> distinct(state.centres.begin(), state.centres.end());
        if (static_cast<int>(distinct.size()) != static_cast<int>(state.centres.size()))
            add("duplicate centres");
        for (int c : state.centres)
            if (c < 0 || c >= K) add("centre index out of range");
    }
    if (static_cast<int>(state.labels.size()) != K) add("label vector length differs from K");
    for (int z : state.labels)
        if (z < 0 || z >= J) add("label out of range");

    if (!fixed_labels && !out.empty()) return out;  // structure too broken to compare

    if (!fixed_labels) {
        auto [expect, ties] = assign_labels_with_ties(state.centres, data.distances);
        if (expect != state.labels) add("labels/centres mismatch");
        for (int k : ties)
            add("tie: site " + std::to_string(k + 1) + " equidistant to multiple centres");
    }

    if (state.sigma.size() != J) add("sigma length differs from J");
    if (state.xi.size() != J) add("xi length differs from J");
    if (state.epsilon.size() != J) add("epsilon length differs from J");
    for (int j = 0; j < state.sigma.size(); ++j)
        if (!(state.sigma(j) > 0.0)) add("sigma not positive in cluster " + std::to_string(j + 1));
    for (int j = 0; j < state.epsilon.size(); ++j)
        if (state.epsilon(j) < 0.0) add("epsilon negative in cluster " + std::to_string(j + 1));
    if (J == 1 && state.epsilon.size() == 1 && state.epsilon(0) != 0.0)
        add("epsilon must be 0 when J = 1");
    if (!(state.gamma0 > 0.0)) add("gamma0 not positive");
    if (!(state.beta > 0.0)) add("beta not positive");

    const auto& h = state.hyper;
    if (!(h.kappa > 0.0)) add("kappa not positive");
    if (!(h.theta_sigma > 0.0)) add("theta_sigma not positive");
    if (!(h.theta_xi > 0.0)) add("theta_xi not positive");
    if (!(h.theta_epsilon > 0.0)) add("theta_epsilon not positive");
    return out;
}

std::vector<std::string> validate_site_data(const SiteData& data) {
    std::vector<std::string> out;
    const int K = data.n_sites;
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j)
            if (!(data.distances(i, j) > 0.0))
                out.push_back("zero distance between distinct sites " + std::to_string(i + 1) +
                              " and " + std::to_string(j + 1));
    for (int k = 0; k < K; ++k) {
        int n_obs = 0;
        int n_exc = 0;
        for (int t = 0; t < data.n_periods; ++t) {
            if (!data.observed(k, t)) continue;
            ++n_obs;
            if (data.values(k, t) > data.thresholds(k)) ++n_exc;
        }
        if (n_obs == 0) out.push_back("site " + std::to_string(k + 1) + " has no observations");
        if (n_exc < 5)
            out.push_back("site " + std::to_string(k + 1) + " has fewer than 5 exceedances");
    }
    return out;
}

}  // namespace extremeclust
