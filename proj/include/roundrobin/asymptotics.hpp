#pragma once

#include <cmath>
#include <string>

#include "roundrobin/errors.hpp"
#include "roundrobin/model.hpp"

namespace roundrobin {

inline constexpr double kEulerGamma = 0.5772156649015329;
inline constexpr double kPiSquaredOverSix = 1.6449340668482264;

/// Normalizing constants of the extreme-value limit (natural logarithms):
///   a_n = (2 log n)^{-1/2}
///   b_n = (2 log n)^{1/2} - (1/2)(2 log n)^{-1/2} (log log n + log 4 pi)
/// The threshold sequence is x_n(t) = a_n t + b_n.
struct NormConstants {
    int n;
    double a;
    double b;

    double threshold(double t) const noexcept { return a * t + b; }
};

inline NormConstants norm_constants(int n) {
    if (n < 2) throw DomainError("normalizing constants need n >= 2, got " + std::to_string(n));
    const double two_log_n = 2.0 * std::log(static_cast<double>(n));
    const double root = std::sqrt(two_log_n);
    const double a = 1.0 / root;
    const double b = root - 0.5 * a * (std::log(std::log(static_cast<double>(n))) +
                                       std::log(4.0 * M_PI));
    return {n, a, b};
}

inline double threshold(int n, double t) { return norm_constants(n).threshold(t); }

/// Gumbel distribution function G(t) = exp(-exp(-t)).
inline double gumbel_cdf(double t) noexcept { return std::exp(-std::exp(-t)); }

/// Limit CDF of the (j+1)-th largest normalized score:
/// G(t) * sum_{k=0}^{j} e^{-kt} / k!
inline double limit_cdf_order(int j, double t) {
    if (j < 0) throw DomainError("rank offset must be nonnegative, got " + std::to_string(j));
    const double emt = std::exp(-t);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= j; ++k) {
        term *= emt / k;
        sum += term;
    }
    // the product can land an ulp above 1 where both factors saturate
    return std::min(1.0, gumbel_cdf(t) * sum);
}

/// Poisson point mass e^{-lambda} lambda^k / k!; log-space beyond k = 30 so
/// large k or lambda cannot overflow the intermediate terms.
inline double poisson_pmf(int k, double lambda) {
    if (k < 0) throw DomainError("Poisson pmf needs k >= 0, got " + std::to_string(k));
    if (!(lambda > 0.0)) throw DomainError("Poisson pmf needs lambda > 0");
    if (k <= 30 && lambda < 700.0) {
        double v = std::exp(-lambda);
        for (int i = 1; i <= k; ++i) v *= lambda / i;
        return v;
    }
    return std::exp(static_cast<double>(k) * std::log(lambda) - lambda -
                    std::lgamma(static_cast<double>(k) + 1.0));
}

/// Upper normal tail 1 - Phi(x), computed through erfc so the relative
/// accuracy survives deep into the tail.
inline double std_normal_tail(double x) noexcept {
    return 0.5 * std::erfc(x * M_SQRT1_2);
}

/// Closed-form moment approximations for the (j+1)-th largest score.
///
/// Normalized scale: e* = b_n + (gamma - H_j) a_n and
/// sd* = sqrt(pi^2/6 - H2_j) a_n, with the harmonic offsets
/// H_j = sum_{k<=j} 1/k and H2_j = sum_{k<=j} 1/k^2 (exact 1, 3/2 and
/// 1, 5/4 for j = 1, 2). Raw scale via e_hat = E_n + sigma_n e* and
/// sd_hat = sigma_n sd*.
struct MomentApprox {
    int j;           ///< rank offset: 0 = maximum, 1 = second, 2 = third
    double e_star;   ///< normalized-scale expectation
    double sd_star;  ///< normalized-scale standard deviation
    double e_hat;    ///< expectation in points
    double sd_hat;   ///< standard deviation in points
};

namespace detail {

inline double harmonic(int j) noexcept {
    double s = 0.0;
    for (int k = 1; k <= j; ++k) s += 1.0 / k;
    return s;
}

inline double harmonic2(int j) noexcept {
    double s = 0.0;
    for (int k = 1; k <= j; ++k) s += 1.0 / (static_cast<double>(k) * k);
    return s;
}

}  // namespace detail

/// Strict mode covers the ranks the limit theory is tabulated for
/// (j in {0,1,2}); `allow_extended_rank` continues the same harmonic
/// pattern to larger j as an extrapolation.
inline MomentApprox approx_moments(int j, const ModelParams& params,
                                   bool allow_extended_rank = false) {
    if (j < 0 || (j > 2 && !allow_extended_rank))
        throw DomainError("rank offset must be in {0,1,2}, got " + std::to_string(j));
    const NormConstants nc = norm_constants(params.n);
    const auto [mean, sd] = score_moments(params);
    const double e_star = nc.b + (kEulerGamma - detail::harmonic(j)) * nc.a;
    const double sd_star =
        std::sqrt(std::max(0.0, kPiSquaredOverSix - detail::harmonic2(j))) * nc.a;
    return {j, e_star, sd_star, mean + sd * e_star, sd * sd_star};
}

}  // namespace roundrobin
