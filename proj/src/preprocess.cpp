#include "extremeclust/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "extremeclust/distributions.hpp"

namespace extremeclust {

namespace {
constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}
}  // namespace

std::vector<SitePair> DependenceCounts::empty_pairs() const {
    std::vector<SitePair> out;
    for (const auto& e : entries)
        if (e.q_fwd == 0 && e.q_rev == 0) out.push_back({e.k, e.kp});
    return out;
}

void DependenceCounts::finalize() {
    for (auto& e : entries) {
        e.log_choose_fwd = e.q_fwd > 0 ? log_choose(e.q_fwd, e.p_fwd) : 0.0;
        e.log_choose_rev = e.q_rev > 0 ? log_choose(e.q_rev, e.p_rev) : 0.0;
    }
}

RawSeries decluster(const RawSeries& series, double period_length, double t_origin) {
    if (series.times.empty()) throw std::invalid_argument("decluster: empty series");
    if (!(period_length > 0.0)) throw std::invalid_argument("decluster: period_length must be >= 1");
    for (std::size_t i = 1; i < series.times.size(); ++i)
        if (!(series.times[i] > series.times[i - 1]))
            throw std::invalid_argument("decluster: timestamps must be strictly increasing");

    const auto period_of = [&](double t) {
        return static_cast<long>(std::floor((t - t_origin) / period_length));
    };
    const long first = period_of(series.times.front());
    const long last = period_of(series.times.back());

    RawSeries out;
    out.times.reserve(last - first + 1);
    out.values.reserve(last - first + 1);
    std::size_t i = 0;
    for (long p = first; p <= last; ++p) {
        double best = nan_v;
        while (i < series.times.size() && period_of(series.times[i]) == p) {
            const double v = series.values[i];
            if (!std::isnan(v) && (std::isnan(best) || v > best)) best = v;
            ++i;
        }
        out.times.push_back(t_origin + static_cast<double>(p) * period_length);
        out.values.push_back(best);
    }
    return out;
}

double empirical_threshold(const std::vector<double>& values, double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("empirical_threshold: p must lie in (0,1)");
    std::vector<double> obs;
    obs.reserve(values.size());
    for (double v : values)
        if (!std::isnan(v)) obs.push_back(v);
    if (obs.size() < 10)
        throw std::invalid_argument("empirical_threshold: need at least 10 non-missing values");
    return quantile_type7(std::move(obs), p);
}

std::vector<double> standardize(const std::vector<double>& values) {
    double sum = 0.0;
    int n = 0;
    for (double v : values)
        if (!std::isnan(v)) {
            sum += v;
            ++n;
        }
    if (n < 2) throw std::invalid_argument("standardize: need at least 2 non-missing values");
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values)
        if (!std::isnan(v)) ss += (v - mean) * (v - mean);
    const double var = ss / (n - 1);
    if (!(var > 0.0)) throw std::invalid_argument("standardize: zero variance");
    const double sd = std::sqrt(var);
    std::vector<double> out(values.size(), nan_v);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isnan(values[i])) out[i] = (values[i] - mean) / sd;
    return out;
}

DependenceCounts dependence_counts(const SiteData& data) {
    const int K = data.n_sites;
    const int T = data.n_periods;

    // Exceedance of the site-wise empirical quantile: rank/(m+1) > u-tilde.
    BoolArray exceeds(K, T);
    exceeds.setConstant(false);
    for (int k = 0; k < K; ++k) {
        std::vector<double> obs;
        obs.reserve(T);
        for (int t = 0; t < T; ++t)
            if (data.observed(k, t)) obs.push_back(data.values(k, t));
        std::sort(obs.begin(), obs.end());
        const double m1 = static_cast<double>(obs.size()) + 1.0;
        for (int t = 0; t < T; ++t) {
            if (!data.observed(k, t)) continue;
            const auto rank =
                std::upper_bound(obs.begin(), obs.end(), data.values(k, t)) - obs.begin();
            exceeds(k, t) = static_cast<double>(rank) / m1 > data.dep_threshold;
        }
    }

    auto count_pair = [&](int k, int kp, int& q, int& p) {
        q = 0;
        p = 0;
        for (int t = 0; t < T; ++t) {
            if (!exceeds(kp, t) || !data.observed(k, t)) continue;
            ++q;
            if (exceeds(k, t)) ++p;
        }
    };

    DependenceCounts out;
    out.entries.reserve(data.adjacency.size());
    for (auto [k, kp] : data.adjacency) {
        DependenceCounts::PairCounts e;
        e.k = k;
        e.kp = kp;
        count_pair(k, kp, e.q_fwd, e.p_fwd);
        count_pair(kp, k, e.q_rev, e.p_rev);
        out.entries.push_back(e);
    }
    out.finalize();
    return out;
}

double empirical_chi(int p, int q) {
    if (q <= 0) throw std::invalid_argument("empirical_chi: Q must be positive");
    if (p < 0 || p > q) throw std::invalid_argument("empirical_chi: need 0 <= P <= Q");
    return static_cast<double>(p) / static_cast<double>(q);
}

// ---------------------------------------------------------------------------
// Delaunay adjacency (Bowyer-Watson with a super-triangle).

namespace {

struct Tri {
    int a, b, c;
};

double orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

// Strictly inside the circumcircle of CCW triangle (a,b,c).
bool in_circumcircle(const Matrix& p, const Tri& t, int d) {
    double ax = p(t.a, 0) - p(d, 0), ay = p(t.a, 1) - p(d, 1);
    double bx = p(t.b, 0) - p(d, 0), by = p(t.b, 1) - p(d, 1);
    double cx = p(t.c, 0) - p(d, 0), cy = p(t.c, 1) - p(d, 1);
    const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                       (bx * bx + by * by) * (ax * cy - cx * ay) +
                       (cx * cx + cy * cy) * (ax * by - bx * ay);
    return det > 0.0;
}

}  // namespace

Matrix perturb_locations(const Matrix& locations) {
    const int n = static_cast<int>(locations.rows());
    const double dx = locations.col(0).maxCoeff() - locations.col(0).minCoeff();
    const double dy = locations.col(1).maxCoeff() - locations.col(1).minCoeff();
    const double scale = std::max(std::hypot(dx, dy), 1.0);
    Matrix out = locations;
    for (int i = 0; i < n; ++i) {
        const double s = scale * 1e-9 * static_cast<double>(i + 1);
        out(i, 0) += s;
        out(i, 1) += s * static_cast<double>(i + 2) / static_cast<double>(n + 1);
    }
    return out;
}

std::vector<SitePair> voronoi_adjacency(const Matrix& locations) {
    const int n = static_cast<int>(locations.rows());
    if (n < 2) throw std::invalid_argument("voronoi_adjacency: need at least 2 points");
    if (locations.cols() != 2) throw std::invalid_argument("voronoi_adjacency: points must be planar");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (locations(i, 0) == locations(j, 0) && locations(i, 1) == locations(j, 1))
                throw std::invalid_argument("voronoi_adjacency: duplicate points");
    if (n == 2) return {{0, 1}};

    bool collinear = true;
    for (int k = 2; k < n && collinear; ++k)
        collinear = orient2d(locations(0, 0), locations(0, 1), locations(1, 0), locations(1, 1),
                             locations(k, 0), locations(k, 1)) == 0.0;
    if (collinear) {
        // 1-D Voronoi: consecutive points along the line are adjacent.
        const double ux = locations(1, 0) - locations(0, 0);
        const double uy = locations(1, 1) - locations(0, 1);
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int i, int j) {
            return locations(i, 0) * ux + locations(i, 1) * uy <
                   locations(j, 0) * ux + locations(j, 1) * uy;
        });
        std::vector<SitePair> out;
        for (int i = 0; i + 1 < n; ++i)
            out.push_back({std::min(order[i], order[i + 1]), std::max(order[i], order[i + 1])});
        std::sort(out.begin(), out.end());
        return out;
    }

    Matrix pts(n + 3, 2);
    pts.topRows(n) = perturb_locations(locations);
    const double cx = pts.col(0).head(n).mean();
    const double cy = pts.col(1).head(n).mean();
    double radius = 1.0;
    for (int i = 0; i < n; ++i)
        radius = std::max(radius, std::hypot(pts(i, 0) - cx, pts(i, 1) - cy));
    const double R = 64.0 * radius;
    pts.row(n) << cx - 2.0 * R, cy - R;
    pts.row(n + 1) << cx + 2.0 * R, cy - R;
    pts.row(n + 2) << cx, cy + 2.0 * R;

    auto make_ccw = [&](Tri t) {
        if (orient2d(pts(t.a, 0), pts(t.a, 1), pts(t.b, 0), pts(t.b, 1), pts(t.c, 0),
                     pts(t.c, 1)) < 0.0)
            std::swap(t.b, t.c);
        return t;
    };

    std::vector<Tri> tris = {make_ccw({n, n + 1, n + 2})};
    for (int d = 0; d < n; ++d) {
        std::vector<Tri> keep;
        std::vector<std::pair<int, int>> boundary;  // directed edges of the cavity
        auto toggle_edge = [&boundary](int u, int v) {
            // An edge shared by two removed triangles appears in both
            // directions and cancels; the survivors bound the cavity.
            for (auto it = boundary.begin(); it != boundary.end(); ++it) {
                if (it->first == v && it->second == u) {
                    boundary.erase(it);
                    return;
                }
            }
            boundary.push_back({u, v});
        };
        for (const auto& t : tris) {
            if (in_circumcircle(pts, t, d)) {
                toggle_edge(t.a, t.b);
                toggle_edge(t.b, t.c);
                toggle_edge(t.c, t.a);
            } else {
                keep.push_back(t);
            }
        }
        for (auto [u, v] : boundary) keep.push_back(make_ccw({u, v, d}));
        tris = std::move(keep);
    }

    std::vector<SitePair> edges;
    auto push_edge = [&edges, n](int u, int v) {
        if (u >= n || v >= n) return;  // drop super-triangle edges
        edges.push_back({std::min(u, v), std::max(u, v)});
    };
    for (const auto& t : tris) {
        push_edge(t.a, t.b);
        push_edge(t.b, t.c);
        push_edge(t.c, t.a);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

}  // namespace extremeclust
