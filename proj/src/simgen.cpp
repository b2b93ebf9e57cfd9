#include "extremeclust/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "extremeclust/dependence.hpp"
#include "extremeclust/distributions.hpp"
#include "extremeclust/gpd.hpp"

namespace extremeclust {

const SyntheticMap& fixture_map() {
    static const SyntheticMap map = [] {
        SyntheticMap m;
        m.locations.resize(20, 2);
        m.locations << 0.0, 0.0,    // group A
            1.0, 0.3,
            0.4, 1.0,
            -0.6, 0.7,
            0.2, -0.9,
            3.6, 0.2,               // group B
            4.4, -0.3,
            5.1, 0.5,
            4.0, 1.1,
            4.8, 1.3,
            5.5, -0.4,
            3.4, -0.8,
            1.2, 3.0,               // group C
            2.0, 3.4,
            2.9, 3.1,
            1.5, 4.1,
            2.4, 4.3,
            3.2, 4.0,
            0.8, 3.9,
            2.0, 2.6;
        const int K = 20;
        Matrix d = Matrix::Zero(K, K);
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j)
                d(i, j) = (m.locations.row(i) - m.locations.row(j)).norm();
        const double scale = d.maxCoeff();
        m.distances = d / scale;
        m.adjacency = voronoi_adjacency(m.locations);
        m.true_centres = {0, 6, 13};
        m.true_labels = assign_labels(m.true_centres, m.distances);
        return m;
    }();
    return map;
}

Exceedances simulate_marginals(int n_sites, int n_excesses, const Vector& sigma,
                               const Vector& xi, const std::vector<int>& labels,
                               RngStream& rng) {
    Exceedances exc;
    exc.n_sites = n_sites;
    exc.n_periods = n_excesses;
    exc.y.resize(n_sites);
    exc.t.resize(n_sites);
    for (int k = 0; k < n_sites; ++k) {
        const double s = sigma(labels[k]);
        const double x = xi(labels[k]);
        Vector yk(n_excesses);
        for (int i = 0; i < n_excesses; ++i)
            yk(i) = gpd_inverse_survival(rng.uniform01(), s, x);
        exc.y[k] = std::move(yk);
        exc.t[k].resize(n_excesses);
        std::iota(exc.t[k].begin(), exc.t[k].end(), 0);
    }
    return exc;
}

void impose_rank_matching(Exceedances& exc) {
    if (exc.y.empty()) return;
    const long n = exc.y.front().size();
    for (const auto& yk : exc.y)
        if (yk.size() != n)
            throw std::invalid_argument("impose_rank_matching: unequal excess counts");

    // Rank order of site 0 becomes the common rank-to-period assignment;
    // every other site is reordered so ranks agree period by period.
    std::vector<int> rank_of(n);
    {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        const auto& y0 = exc.y.front();
        std::sort(order.begin(), order.end(), [&y0](int a, int b) { return y0(a) < y0(b); });
        for (long r = 0; r < n; ++r) rank_of[order[r]] = static_cast<int>(r);
    }
    for (auto& yk : exc.y) {
        Vector sorted = yk;
        std::sort(sorted.data(), sorted.data() + n);
        Vector matched(n);
        for (long i = 0; i < n; ++i) matched(i) = sorted(rank_of[i]);
        yk = std::move(matched);
    }
}

DependenceCounts simulate_dependence_counts(const std::vector<int>& labels,
                                            const Matrix& distances,
                                            const std::vector<SitePair>& adjacency,
                                            double gamma0, const Vector& epsilon, double beta,
                                            int q, RngStream& rng) {
    DependenceCounts out;
    out.entries.reserve(adjacency.size());
    for (auto [k, kp] : adjacency) {
        const double gamma = labels[k] == labels[kp]
                                 ? gamma_from_epsilon(gamma0, epsilon(labels[k]))
                                 : gamma0;
        const auto [alpha, b] = bb_shape(gamma, distances(k, kp), beta);
        DependenceCounts::PairCounts e;
        e.k = k;
        e.kp = kp;
        e.q_fwd = q;
        e.q_rev = q;
        e.p_fwd = rng.binomial(q, rng.beta(alpha, b));
        e.p_rev = rng.binomial(q, rng.beta(alpha, b));
        out.entries.push_back(e);
    }
    out.finalize();
    return out;
}

Matrix exponential_correlation(const Matrix& distances, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("exponential_correlation: rho must be positive");
    return (-distances / rho).array().exp();
}

Exceedances simulate_gaussian_copula(int n_sites, int n_excesses, const Vector& sigma,
                                     const Vector& xi, const std::vector<int>& labels,
                                     const Matrix& correlation, RngStream& rng) {
    Eigen::LLT<Matrix> llt(correlation);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("simulate_gaussian_copula: correlation not positive definite");
    const Matrix chol = llt.matrixL();

    Exceedances exc;
    exc.n_sites = n_sites;
    exc.n_periods = n_excesses;
    exc.y.resize(n_sites);
    exc.t.resize(n_sites);
    for (int k = 0; k < n_sites; ++k) {
        exc.y[k].resize(n_excesses);
        exc.t[k].resize(n_excesses);
        std::iota(exc.t[k].begin(), exc.t[k].end(), 0);
    }
    Vector z(n_sites);
    for (int i = 0; i < n_excesses; ++i) {
        for (int k = 0; k < n_sites; ++k) z(k) = rng.normal();
        const Vector corr = chol * z;
        for (int k = 0; k < n_sites; ++k) {
            const double u = normal_cdf(corr(k));
            exc.y[k](i) = gpd_quantile(u, sigma(labels[k]), xi(labels[k]));
        }
    }
    return exc;
}

StudyData make_study(int study, std::uint64_t seed, bool dependent, double rho) {
    const auto& map = fixture_map();
    const int K = 20;
    constexpr int n_excesses = 100;
    constexpr int q = 20;

    StudyData sd;
    RngStream rng_marg = RngStream::derive(seed, "study_marginals");
    RngStream rng_dep = RngStream::derive(seed, "study_dependence");

    if (study == 1 || study == 2) {
        sd.true_labels.assign(K, 0);
        sd.true_sigma = Vector::Constant(1, 2.0);
        sd.true_xi = Vector::Constant(1, 0.1);
        sd.true_gamma0 = 2.0;  // single cluster: gamma_1 only
        sd.true_beta = 10.0;
        sd.exc = simulate_marginals(K, n_excesses, sd.true_sigma, sd.true_xi, sd.true_labels,
                                    rng_marg);
        if (study == 2) impose_rank_matching(sd.exc);
        sd.counts = simulate_dependence_counts(sd.true_labels, map.distances, map.adjacency,
                                               sd.true_gamma0, Vector::Zero(1), sd.true_beta, q,
                                               rng_dep);
    } else if (study == 3) {
        sd.true_labels = map.true_labels;
        sd.true_sigma = Vector(3);
        sd.true_sigma << 2.0, 2.3, 2.6;
        sd.true_xi = Vector(3);
        sd.true_xi << 0.05, 0.10, 0.15;
        sd.true_gamma0 = 3.0;
        sd.true_beta = 10.0;
        const Vector eps = Vector::Constant(3, std::log(3.0 / 2.0));  // gamma_j = 2
        if (dependent) {
            const Matrix corr = exponential_correlation(map.distances, rho);
            sd.exc = simulate_gaussian_copula(K, n_excesses, sd.true_sigma, sd.true_xi,
                                              sd.true_labels, corr, rng_marg);
        } else {
            sd.exc = simulate_marginals(K, n_excesses, sd.true_sigma, sd.true_xi,
                                        sd.true_labels, rng_marg);
        }
        sd.counts = simulate_dependence_counts(sd.true_labels, map.distances, map.adjacency,
                                               sd.true_gamma0, eps, sd.true_beta, q, rng_dep);
    } else {
        throw std::invalid_argument("make_study: study must be 1, 2 or 3");
    }

    // Assemble the SiteData view: thresholds are 0, so values = excesses.
    Matrix values(K, n_excesses);
    for (int k = 0; k < K; ++k) values.row(k) = sd.exc.y[k].transpose();
    sd.data = SiteData::build(values, map.distances * 1.0, map.adjacency, Vector::Zero(K), 0.95,
                              map.locations);
    return sd;
}

}  // namespace extremeclust
