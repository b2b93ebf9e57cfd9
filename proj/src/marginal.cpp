#include "extremeclust/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "extremeclust/distributions.hpp"
#include "extremeclust/gpd.hpp"

namespace extremeclust {

namespace {

constexpr double xi_lo = -0.5;
constexpr double xi_hi = 2.0;

struct ClusterData {
    // Flattened view of one cluster's excesses.
    std::vector<double> y;
    std::vector<int> t;
};

ClusterData gather(const std::vector<int>& sites, const Exceedances& exc) {
    ClusterData cd;
    for (int k : sites) {
        const auto& yk = exc.y[k];
        for (int i = 0; i < yk.size(); ++i) {
            cd.y.push_back(yk(i));
            cd.t.push_back(exc.t[k][i]);
        }
    }
    return cd;
}

double loglik_flat(const std::vector<double>& y, double sigma, double xi) {
    if (!(sigma > 0.0)) return neg_inf;
    const std::size_t n = y.size();
    if (std::abs(xi) < gpd_xi_tol) {
        double acc = 0.0;
        for (double v : y) {
            const double w = v / sigma;
            acc += -w + xi * (w * w / 2 - w) + xi * xi * (w * w / 2 - w * w * w / 3);
        }
        return acc - static_cast<double>(n) * std::log(sigma);
    }
    const double c = xi / sigma;
    double acc = 0.0;
    for (double v : y) {
        const double a = c * v;
        if (!(a > -1.0)) return neg_inf;
        acc += std::log1p(a);
    }
    return -static_cast<double>(n) * std::log(sigma) - (1.0 / xi + 1.0) * acc;
}

Vector2 loglik_flat_grad(const std::vector<double>& y, double sigma, double xi) {
    Vector2 g = Vector2::Zero();
    for (double v : y) g += gpd_score(v, sigma, xi);
    return g;
}

Matrix2 loglik_flat_hess(const std::vector<double>& y, double sigma, double xi) {
    Matrix2 h = Matrix2::Zero();
    for (double v : y) h += gpd_hessian(v, sigma, xi);
    return h;
}

// Nelder-Mead on (log sigma, xi); returns the best vertex.
Vector2 nelder_mead(const std::vector<double>& y, Vector2 start, double tol, int max_iter) {
    auto f = [&y](const Vector2& p) {
        const double xi = p(1);
        if (xi <= xi_lo || xi >= xi_hi) return std::numeric_limits<double>::infinity();
        const double ll = loglik_flat(y, std::exp(p(0)), xi);
        return -ll;
    };

    Vector2 v[3] = {start, start + Vector2(0.2, 0.0), start + Vector2(0.0, 0.1)};
    double fv[3] = {f(v[0]), f(v[1]), f(v[2])};
    for (int it = 0; it < max_iter; ++it) {
        int order[3] = {0, 1, 2};
        std::sort(order, order + 3, [&fv](int a, int b) { return fv[a] < fv[b]; });
        const int lo = order[0], mid = order[1], hi = order[2];
        if (std::isfinite(fv[hi]) && fv[hi] - fv[lo] < tol) break;

        const Vector2 centroid = 0.5 * (v[lo] + v[mid]);
        const Vector2 refl = centroid + (centroid - v[hi]);
        const double f_refl = f(refl);
        if (f_refl < fv[lo]) {
            const Vector2 expand = centroid + 2.0 * (centroid - v[hi]);
            const double f_exp = f(expand);
            if (f_exp < f_refl) {
                v[hi] = expand;
                fv[hi] = f_exp;
            } else {
                v[hi] = refl;
                fv[hi] = f_refl;
            }
        } else if (f_refl < fv[mid]) {
            v[hi] = refl;
            fv[hi] = f_refl;
        } else {
            const Vector2 contract = centroid + 0.5 * (v[hi] - centroid);
            const double f_con = f(contract);
            if (f_con < fv[hi]) {
                v[hi] = contract;
                fv[hi] = f_con;
            } else {
                for (int i : {mid, hi}) {
                    v[i] = v[lo] + 0.5 * (v[i] - v[lo]);
                    fv[i] = f(v[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (fv[i] < fv[best]) best = i;
    return v[best];
}

double scaled_gradient_norm(const Vector2& g, double sigma, double loglik) {
    const double gs = g(0) * sigma;  // gradient in log-sigma coordinates
    return std::max(std::abs(gs), std::abs(g(1))) / std::max(1.0, std::abs(loglik));
}

}  // namespace

Exceedances Exceedances::from_site_data(const SiteData& data) {
    Exceedances exc;
    exc.n_sites = data.n_sites;
    exc.n_periods = data.n_periods;
    exc.y.resize(data.n_sites);
    exc.t.resize(data.n_sites);
    for (int k = 0; k < data.n_sites; ++k) {
        std::vector<double> yk;
        for (int t = 0; t < data.n_periods; ++t) {
            if (!data.observed(k, t)) continue;
            const double excess = data.values(k, t) - data.thresholds(k);
            if (excess > 0.0) {
                yk.push_back(excess);
                exc.t[k].push_back(t);
            }
        }
        exc.y[k] = Eigen::Map<Vector>(yk.data(), static_cast<long>(yk.size()));
    }
    return exc;
}

int Exceedances::total() const {
    int n = 0;
    for (const auto& v : y) n += static_cast<int>(v.size());
    return n;
}

double cluster_loglik_ind(const std::vector<int>& sites, const Exceedances& exc, double sigma,
                          double xi) {
    if (!(sigma > 0.0)) return neg_inf;
    double total = 0.0;
    long n = 0;
    const bool small_xi = std::abs(xi) < gpd_xi_tol;
    for (int k : sites) {
        const auto& yk = exc.y[k];
        n += yk.size();
        if (small_xi) {
            const auto w = yk.array() / sigma;
            total += (-w + xi * (w.square() / 2 - w) + xi * xi * (w.square() / 2 - w.cube() / 3))
                         .sum();
        } else {
            const auto a = (xi / sigma) * yk.array();
            if ((a <= -1.0).any()) return neg_inf;
            total += a.unaryExpr([](double v) { return std::log1p(v); }).sum();
        }
    }
    if (small_xi) return total - static_cast<double>(n) * std::log(sigma);
    return -static_cast<double>(n) * std::log(sigma) - (1.0 / xi + 1.0) * total;
}

double loglik_ind(const Vector& sigma, const Vector& xi, const std::vector<int>& labels,
                  const Exceedances& exc) {
    const int J = static_cast<int>(sigma.size());
    std::vector<std::vector<int>> members(J);
    for (int k = 0; k < static_cast<int>(labels.size()); ++k) members[labels[k]].push_back(k);
    double total = 0.0;
    for (int j = 0; j < J; ++j) {
        const double term = cluster_loglik_ind(members[j], exc, sigma(j), xi(j));
        if (term == neg_inf) return neg_inf;
        total += term;
    }
    return total;
}

Vector2 fit_cluster_mle(const std::vector<int>& sites, const Exceedances& exc) {
    const ClusterData cd = gather(sites, exc);
    const long n = static_cast<long>(cd.y.size());
    if (n < 5) throw FitError("insufficient exceedances (need at least 5)");

    double mean = 0.0;
    for (double v : cd.y) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : cd.y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);

    // Moment starts: m = sigma/(1-xi), v = sigma^2 / ((1-xi)^2 (1-2 xi)).
    double xi0 = 0.5 * (1.0 - mean * mean / var);
    xi0 = std::min(std::max(xi0, -0.4), 1.5);
    const double sigma0 = std::max(mean * (1.0 - xi0), 1e-8 * mean);

    const Vector2 starts[3] = {
        Vector2(std::log(sigma0), xi0),
        Vector2(std::log(mean), 0.01),
        Vector2(std::log(1.5 * mean), 0.5 * xi0 + 0.05),
    };

    Vector2 best = Vector2::Zero();
    double best_ll = neg_inf;
    for (const auto& s : starts) {
        const Vector2 p = nelder_mead(cd.y, s, 1e-8, 400);
        const double ll = loglik_flat(cd.y, std::exp(p(0)), p(1));
        if (ll > best_ll) {
            best_ll = ll;
            best = p;
        }
    }
    if (best_ll == neg_inf) throw FitError("MLE search failed to find a finite likelihood");

    // Newton polish with the analytic score; step-halved onto the support.
    double sigma = std::exp(best(0));
    double xi = best(1);
    double ll = best_ll;
    for (int it = 0; it < 40; ++it) {
        const Vector2 g = loglik_flat_grad(cd.y, sigma, xi);
        if (scaled_gradient_norm(g, sigma, ll) < 1e-10) break;
        const Matrix2 h = loglik_flat_hess(cd.y, sigma, xi);
        Vector2 step = -h.fullPivLu().solve(g);
        if (!step.allFinite()) break;
        double scale = 1.0;
        bool moved = false;
        for (int half = 0; half < 30; ++half) {
            const double s2 = sigma + scale * step(0);
            const double x2 = xi + scale * step(1);
            if (s2 > 0.0 && x2 > xi_lo && x2 < xi_hi) {
                const double ll2 = loglik_flat(cd.y, s2, x2);
                if (ll2 >= ll) {
                    sigma = s2;
                    xi = x2;
                    ll = ll2;
                    moved = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if (!moved) break;
    }

    const Vector2 g = loglik_flat_grad(cd.y, sigma, xi);
    if (scaled_gradient_norm(g, sigma, ll) > 1e-6)
        throw FitError("MLE did not converge (scaled gradient above 1e-6)");
    return Vector2(sigma, xi);
}

std::vector<Vector2> fit_mle(const std::vector<int>& labels, int n_clusters,
                             const Exceedances& exc) {
    std::vector<std::vector<int>> members(n_clusters);
    for (int k = 0; k < static_cast<int>(labels.size()); ++k) members[labels[k]].push_back(k);
    std::vector<Vector2> out;
    out.reserve(n_clusters);
    for (int j = 0; j < n_clusters; ++j) out.push_back(fit_cluster_mle(members[j], exc));
    return out;
}

std::pair<Matrix2, Matrix2> sandwich_blocks(const std::vector<int>& sites,
                                            const Exceedances& exc, const Vector2& theta_hat) {
    const double sigma = theta_hat(0);
    const double xi = theta_hat(1);
    Matrix2 info = Matrix2::Zero();
    std::unordered_map<int, Vector2> per_period;
    per_period.reserve(256);
    for (int k : sites) {
        const auto& yk = exc.y[k];
        for (int i = 0; i < yk.size(); ++i) {
            info -= gpd_hessian(yk(i), sigma, xi);
            auto [it, inserted] = per_period.try_emplace(exc.t[k][i], Vector2::Zero());
            it->second += gpd_score(yk(i), sigma, xi);
        }
    }
    // Deterministic summation order for bit-reproducibility.
    std::vector<std::pair<int, Vector2>> rows(per_period.begin(), per_period.end());
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Matrix2 score_cov = Matrix2::Zero();
    for (const auto& [t, s] : rows) score_cov += s * s.transpose();

    Eigen::SelfAdjointEigenSolver<Matrix2> es(info);
    if (!(es.eigenvalues().minCoeff() > 0.0))
        throw FitError("observed information not positive definite (boundary or degenerate fit)");
    return {info, score_cov};
}

Matrix2 compute_B(const Matrix2& info, const Matrix2& score_cov) {
    Eigen::SelfAdjointEigenSolver<Matrix2> es_h(info);
    if (!(es_h.eigenvalues().minCoeff() > 0.0))
        throw FitError("compute_B: H not positive definite");

    Matrix2 v = score_cov;
    Eigen::SelfAdjointEigenSolver<Matrix2> es_v(v);
    const double v_min = es_v.eigenvalues().minCoeff();
    const double v_max = es_v.eigenvalues().maxCoeff();
    if (!(v_min > 0.0) || v_max / v_min > 1e12)
        v += (1e-8 * v.trace() / 2.0) * Matrix2::Identity();

    const Matrix2 h_inv = info.inverse();
    const Matrix2 sigma_mat = h_inv * v * h_inv;
    Eigen::SelfAdjointEigenSolver<Matrix2> es_s(sigma_mat);
    if (!(es_s.eigenvalues().minCoeff() > 0.0))
        throw FitError("compute_B: Sigma not positive definite after regularization");

    const Matrix2 h_inv_sqrt = es_h.operatorInverseSqrt();
    // (Sigma^{-1})^{1/2} = principal inverse square root of Sigma.
    const Matrix2 sigma_inv_sqrt = es_s.operatorInverseSqrt();
    return h_inv_sqrt * sigma_inv_sqrt;
}

ClusterFit make_cluster_fit(const std::vector<int>& sites, const Exceedances& exc) {
    ClusterFit fit;
    fit.sites = sites;
    std::sort(fit.sites.begin(), fit.sites.end());
    fit.theta_hat = fit_cluster_mle(fit.sites, exc);
    auto [info, score_cov] = sandwich_blocks(fit.sites, exc, fit.theta_hat);
    fit.info = info;
    fit.score_cov = score_cov;
    fit.curvature = compute_B(info, score_cov);
    fit.loglik_mode = cluster_loglik_ind(fit.sites, exc, fit.theta_hat(0), fit.theta_hat(1));
    for (int k : fit.sites) fit.n_excesses += static_cast<int>(exc.y[k].size());
    return fit;
}

AdjustedMarginal make_adjusted_marginal(const std::vector<int>& labels, int n_clusters,
                                        const Exceedances& exc) {
    std::vector<std::vector<int>> members(n_clusters);
    for (int k = 0; k < static_cast<int>(labels.size()); ++k) members[labels[k]].push_back(k);
    AdjustedMarginal adj;
    adj.blocks.reserve(n_clusters);
    for (int j = 0; j < n_clusters; ++j)
        adj.blocks.push_back(std::make_shared<const ClusterFit>(make_cluster_fit(members[j], exc)));
    return adj;
}

double cluster_loglik_adjusted(const ClusterFit& fit, const Exceedances& exc, double sigma,
                               double xi) {
    const Vector2 mapped =
        fit.theta_hat + fit.curvature * (Vector2(sigma, xi) - fit.theta_hat);
    if (!(mapped(0) > 0.0)) return neg_inf;
    return cluster_loglik_ind(fit.sites, exc, mapped(0), mapped(1));
}

double loglik_adjusted(const Vector& theta, const AdjustedMarginal& adj,
                       const std::vector<int>& labels, const Exceedances& exc) {
    (void)labels;  // membership is already frozen inside the blocks
    const int J = static_cast<int>(adj.blocks.size());
    if (theta.size() != 2 * J)
        throw std::invalid_argument("loglik_adjusted: theta must have 2J entries");
    double total = 0.0;
    for (int j = 0; j < J; ++j) {
        const double term =
            cluster_loglik_adjusted(*adj.blocks[j], exc, theta(2 * j), theta(2 * j + 1));
        if (term == neg_inf) return neg_inf;
        total += term;
    }
    return total;
}

std::shared_ptr<const ClusterFit> AdjustedMarginalCache::get(const std::vector<int>& sorted_sites) {
    std::string key(reinterpret_cast<const char*>(sorted_sites.data()),
                    sorted_sites.size() * sizeof(int));
    {
        std::shared_lock lock(mutex_);
        auto it = map_.find(key);
        if (it != map_.end()) return it->second;
    }
    auto fit = std::make_shared<const ClusterFit>(make_cluster_fit(sorted_sites, *exc_));
    std::unique_lock lock(mutex_);
    return map_.emplace(std::move(key), std::move(fit)).first->second;
}

std::size_t AdjustedMarginalCache::size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
}

void AdjustedMarginalCache::clear() {
    std::unique_lock lock(mutex_);
    map_.clear();
}

}  // namespace extremeclust
