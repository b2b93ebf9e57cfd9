#pragma once
// Generalized Pareto density kernels for threshold excesses, parametrized by
// scale sigma > 0 and shape xi. The log-density for an excess y >= 0 is
//
//   log f(y) = -log(sigma) - (1/xi + 1) * log(1 + xi*y/sigma)
//
// on the support 1 + xi*y/sigma > 0, with the exponential limit at xi = 0.
// Below |xi| < gpd_xi_tol a second-order expansion in xi is used so the
// density, score and curvature are continuous across the switch.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace extremeclust {

inline constexpr double gpd_xi_tol = 1e-6;

template <class Scalar>
Scalar gpd_logpdf(Scalar y, Scalar sigma, Scalar xi) {
    if (!(sigma > Scalar(0))) throw std::invalid_argument("gpd_logpdf: sigma must be positive");
    if (y < Scalar(0)) return -std::numeric_limits<Scalar>::infinity();
    const Scalar w = y / sigma;
    if (std::abs(xi) < Scalar(gpd_xi_tol)) {
        return -std::log(sigma) - w + xi * (w * w / 2 - w) +
               xi * xi * (w * w / 2 - w * w * w / 3);
    }
    const Scalar a = Scalar(1) + xi * w;
    if (!(a > Scalar(0))) return -std::numeric_limits<Scalar>::infinity();
    return -std::log(sigma) - (Scalar(1) / xi + Scalar(1)) * std::log1p(xi * w);
}

// Score (d/dsigma, d/dxi) of gpd_logpdf at an interior point of the support.
template <class Scalar>
Eigen::Matrix<Scalar, 2, 1> gpd_score(Scalar y, Scalar sigma, Scalar xi) {
    const Scalar w = y / sigma;
    const Scalar a = Scalar(1) + xi * w;
    Eigen::Matrix<Scalar, 2, 1> g;
    g(0) = -Scalar(1) / sigma + (Scalar(1) + xi) * y / (sigma * sigma * a);
    if (std::abs(xi) < Scalar(gpd_xi_tol)) {
        g(1) = (w * w / 2 - w) + xi * (w * w - Scalar(2) * w * w * w / 3) +
               xi * xi * (Scalar(3) * w * w * w * w / 4 - w * w * w);
    } else {
        g(1) = std::log1p(xi * w) / (xi * xi) - (Scalar(1) / xi + Scalar(1)) * w / a;
    }
    return g;
}

// Hessian of gpd_logpdf in (sigma, xi) at an interior point of the support.
template <class Scalar>
Eigen::Matrix<Scalar, 2, 2> gpd_hessian(Scalar y, Scalar sigma, Scalar xi) {
    const Scalar w = y / sigma;
    const Scalar a = Scalar(1) + xi * w;
    Eigen::Matrix<Scalar, 2, 2> h;
    h(0, 0) = Scalar(1) / (sigma * sigma) -
              Scalar(2) * (Scalar(1) + xi) * y / (sigma * sigma * sigma * a) +
              xi * (Scalar(1) + xi) * y * y / (sigma * sigma * sigma * sigma * a * a);
    h(0, 1) = y / (sigma * sigma * a) - (Scalar(1) + xi) * y * y / (sigma * sigma * sigma * a * a);
    h(1, 0) = h(0, 1);
    if (std::abs(xi) < Scalar(gpd_xi_tol)) {
        h(1, 1) = (w * w - Scalar(2) * w * w * w / 3) +
                  xi * (Scalar(3) * w * w * w * w / 2 - Scalar(2) * w * w * w);
    } else {
        const Scalar lg = std::log1p(xi * w);
        h(1, 1) = -Scalar(2) * lg / (xi * xi * xi) + Scalar(2) * w / (xi * xi * a) +
                  (Scalar(1) + Scalar(1) / xi) * w * w / (a * a);
    }
    return h;
}

// Quantile of the excess distribution: F^{-1}(p) for p in [0,1).
template <class Scalar>
Scalar gpd_quantile(Scalar p, Scalar sigma, Scalar xi) {
    if (!(sigma > Scalar(0))) throw std::invalid_argument("gpd_quantile: sigma must be positive");
    if (!(p >= Scalar(0) && p < Scalar(1))) throw std::invalid_argument("gpd_quantile: p outside [0,1)");
    const Scalar l = std::log1p(-p);
    if (std::abs(xi) < Scalar(gpd_xi_tol)) return -sigma * l;
    return sigma * std::expm1(-xi * l) / xi;
}

// Inverse-CDF sampling transform: u ~ Uniform(0,1) plays the survival
// probability, y = sigma * (u^{-xi} - 1) / xi.
template <class Scalar>
Scalar gpd_inverse_survival(Scalar u, Scalar sigma, Scalar xi) {
    if (std::abs(xi) < Scalar(gpd_xi_tol)) return -sigma * std::log(u);
    return sigma * std::expm1(-xi * std::log(u)) / xi;
}

// P(Y > y) for an excess Y; used by the return-level inversion oracle.
template <class Scalar>
Scalar gpd_survival(Scalar y, Scalar sigma, Scalar xi) {
    if (y <= Scalar(0)) return Scalar(1);
    if (std::abs(xi) < Scalar(gpd_xi_tol)) return std::exp(-y / sigma);
    const Scalar a = Scalar(1) + xi * y / sigma;
    if (!(a > Scalar(0))) return Scalar(0);
    return std::exp(-std::log1p(xi * y / sigma) / xi);
}

}  // namespace extremeclust
