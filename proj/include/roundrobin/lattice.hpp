#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "roundrobin/asymptotics.hpp"
#include "roundrobin/errors.hpp"
#include "roundrobin/model.hpp"

namespace roundrobin {

/// Probability mass function on the half-point lattice.
/// probs[i] is the mass at origin_hp + i half-points.
struct LatticePmf {
    std::int32_t origin_hp = 0;
    std::vector<double> probs;

    std::int32_t max_hp() const noexcept {
        return origin_hp + static_cast<std::int32_t>(probs.size()) - 1;
    }

    double mass_at(std::int32_t hp) const noexcept {
        const std::int64_t i = static_cast<std::int64_t>(hp) - origin_hp;
        if (i < 0 || i >= static_cast<std::int64_t>(probs.size())) return 0.0;
        return probs[static_cast<std::size_t>(i)];
    }

    /// Mass at lattice points >= hp, accumulated small-to-large from the
    /// far tail.
    double mass_at_or_above(std::int32_t hp) const noexcept {
        double s = 0.0;
        for (std::int32_t h = max_hp(); h >= hp && h >= origin_hp; --h) s += mass_at(h);
        return s;
    }

    double total_mass() const noexcept {
        return std::accumulate(probs.begin(), probs.end(), 0.0);
    }

    double mean_hp() const noexcept {
        double m = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i)
            m += probs[i] * (origin_hp + static_cast<double>(i));
        return m;
    }

    double variance_hp() const noexcept {
        const double m = mean_hp();
        double v = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const double d = origin_hp + static_cast<double>(i) - m;
            v += probs[i] * d * d;
        }
        return v;
    }

    double mean_points() const noexcept { return mean_hp() * 0.5; }
    double sd_points() const noexcept { return std::sqrt(variance_hp()) * 0.5; }
};

/// Exact single-score marginal: the (n-1)-fold convolution of the per-game
/// half-point mass {0: (1-p)/2, 1: p, 2: (1-p)/2}. Runs in place, O(n^2),
/// renormalizing every 64 steps to keep accumulated rounding off the tail.
inline LatticePmf single_score_pmf(const ModelParams& params) {
    const double q = (1.0 - params.p) / 2.0;
    const double p = params.p;
    LatticePmf pmf;
    pmf.origin_hp = 0;
    pmf.probs.assign(static_cast<std::size_t>(params.max_half_points()) + 1, 0.0);
    pmf.probs[0] = 1.0;
    std::int32_t top = 0;  // current highest occupied index
    for (int game = 1; game <= params.n - 1; ++game) {
        top += 2;
        for (std::int32_t k = top; k >= 0; --k) {
            const double w2 = k >= 2 ? pmf.probs[static_cast<std::size_t>(k - 2)] : 0.0;
            const double w1 = k >= 1 ? pmf.probs[static_cast<std::size_t>(k - 1)] : 0.0;
            const double w0 = k <= top - 2 ? pmf.probs[static_cast<std::size_t>(k)] : 0.0;
            pmf.probs[static_cast<std::size_t>(k)] = q * w2 + p * w1 + q * w0;
        }
        if (game % 64 == 0) {
            const double total = pmf.total_mass();
            for (auto& v : pmf.probs) v /= total;
        }
    }
    return pmf;
}

/// Smallest lattice value (half-points) strictly above the raw threshold
/// 2(E_n + sigma_n x*). A raw value within 1e-9 of a lattice point counts
/// as hitting it, and the atom there is excluded (strict inequality).
inline std::int32_t exceedance_threshold_hp(const ModelParams& params, double x_star) {
    const auto [mean, sd] = score_moments(params);
    const double raw_hp = 2.0 * (mean + sd * x_star);
    const double nearest = std::nearbyint(raw_hp);
    if (std::abs(raw_hp - nearest) < 1e-9)
        return static_cast<std::int32_t>(nearest) + 1;
    return static_cast<std::int32_t>(std::ceil(raw_hp));
}

/// pi_1 = P(s* > x*) = P(s > E_n + sigma_n x*), strict, exact on the lattice.
inline double tail_probability(const LatticePmf& pmf, const ModelParams& params, double x_star) {
    return pmf.mass_at_or_above(exceedance_threshold_hp(params, x_star));
}

/// lambda_n = E(W_n) = n pi_1 at threshold x_n(t); by exchangeability all
/// players share the same exceedance probability.
inline double lambda_n(const ModelParams& params, double t, const LatticePmf& marginal) {
    return params.n * tail_probability(marginal, params, threshold(params.n, t));
}

inline double lambda_n(const ModelParams& params, double t) {
    return lambda_n(params, t, single_score_pmf(params));
}

/// Side-by-side finite-n values for the tail and intensity limits:
/// pi_1 against the normal tail, and n pi_1 against e^{-t}. Diagnostic
/// only; nothing here is a pass/fail decision.
struct TailLimitDiagnostics {
    double pi1;          ///< exact P(s* > x_n(t)) from the convolution
    double normal_tail;  ///< 1 - Phi(x_n(t))
    double tail_ratio;   ///< pi1 / normal tail
    double n_pi1;        ///< n pi_1 = lambda_n
    double limit_e_t;    ///< e^{-t}, the limiting intensity
};

inline TailLimitDiagnostics tail_limit_diagnostics(const ModelParams& params, double t,
                                                   const LatticePmf& marginal) {
    const double x = threshold(params.n, t);
    const double pi1 = tail_probability(marginal, params, x);
    const double tail = std_normal_tail(x);
    return {pi1, tail, pi1 / tail, params.n * pi1, std::exp(-t)};
}

inline TailLimitDiagnostics tail_limit_diagnostics(const ModelParams& params, double t) {
    return tail_limit_diagnostics(params, t, single_score_pmf(params));
}

}  // namespace roundrobin
