#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "roundrobin/errors.hpp"

namespace roundrobin {

/// Total variation distance between a finite pmf on {0, 1, ...} and
/// Poisson(lambda): (1/2) sum_k |dist(k) - e^{-lambda} lambda^k / k!|.
/// The Poisson sum is carried past the pmf support until its cumulative
/// mass exceeds 1 - 1e-15; whatever tail remains is added in full, keeping
/// the truncation error below 5e-16.
inline double exact_tv(std::span<const double> dist, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("total variation vs Poisson needs lambda > 0");
    double pk = std::exp(-lambda);
    double cumulative = pk;
    double l1 = 0.0;
    std::size_t k = 0;
    // 60 sigma past the mean the cumulative is as close to 1 as doubles get
    const std::size_t k_stop =
        dist.size() + static_cast<std::size_t>(lambda + 60.0 * std::sqrt(lambda)) + 64;
    for (;;) {
        const double d = k < dist.size() ? dist[k] : 0.0;
        l1 += std::abs(d - pk);
        const bool covered = k + 1 >= dist.size() && cumulative > 1.0 - 1e-15;
        if (covered || k >= k_stop) break;
        ++k;
        pk *= lambda / static_cast<double>(k);
        cumulative += pk;
    }
    l1 += 1.0 - cumulative;  // unreached Poisson tail, all of it discrepancy
    return 0.5 * l1;
}

/// Chen-Stein style bound on d_TV(L(W_n), Poisson(lambda)) for negatively
/// related exceedance indicators:
///   (1 - e^{-lambda}) / lambda * (lambda - Var W_n).
/// A negative result means Var(W_n) > lambda, i.e. the negative-correlation
/// premise failed for these parameters.
inline double poisson_tv_bound(double lambda, double var_w) {
    if (!(lambda > 0.0)) throw DomainError("bound needs lambda > 0");
    if (!(var_w >= 0.0)) throw DomainError("bound needs Var(W) >= 0");
    return (1.0 - std::exp(-lambda)) / lambda * (lambda - var_w);
}

}  // namespace roundrobin
