#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "roundrobin/asymptotics.hpp"
#include "roundrobin/errors.hpp"
#include "roundrobin/lattice.hpp"
#include "roundrobin/model.hpp"

namespace roundrobin {

/// Hard cap on the brute-force enumeration: 3^(n(n-1)/2) outcomes means
/// 3^15 ~ 1.4e7 at n = 6; n = 7 would be 3^21 and has no business here.
inline constexpr int kDefaultEnumerationMaxPlayers = 6;

/// Everything the full-outcome enumeration can state exactly at one
/// threshold x_n(t): marginals and moments of the top three scores, the
/// exceedance-count distribution, the leading pair exceedance, and the
/// score correlation.
struct ExactSummary {
    int n = 0;
    double p = 0.0;
    double t = 0.0;
    double x_threshold = 0.0;       ///< x_n(t) on the normalized scale
    std::int32_t hp_threshold = 0;  ///< smallest half-point value counted as exceeding

    /// Order-statistic pmfs, rank offsets 0 (max), 1, 2. For n = 2 only the
    /// first two entries are populated.
    std::array<LatticePmf, 3> top_pmf;
    std::array<double, 3> top_mean_points{};
    std::array<double, 3> top_sd_points{};

    std::vector<double> w_pmf;   ///< P(W_n = k), k = 0..n
    double lambda_from_w = 0.0;  ///< E(W_n) straight from w_pmf
    double var_w = 0.0;          ///< Var(W_n)
    double pair_exceedance = 0.0;  ///< P(s*_1 > x, s*_2 > x)
    double corr_s1_s2 = 0.0;       ///< exact corr of two named players' scores

    /// Exact marginal of one player's score, for cross-checks against the
    /// convolution path.
    LatticePmf marginal;
};

namespace detail {

struct EnumerationAccumulator {
    int n;
    std::int32_t hp_threshold;
    std::array<std::vector<double>, 3> top_mass;
    std::vector<double> w_mass;
    std::vector<double> marginal_mass;
    double pair_mass = 0.0;
    // centered at the exact integer mean (n-1 half-points), so the
    // covariance and variance sums stay O(1) and cancellation-free
    double centered_cov = 0.0;
    double centered_var = 0.0;

    explicit EnumerationAccumulator(const ModelParams& params, std::int32_t threshold_hp)
        : n(params.n), hp_threshold(threshold_hp) {
        const auto width = static_cast<std::size_t>(params.max_half_points()) + 1;
        for (auto& m : top_mass) m.assign(width, 0.0);
        w_mass.assign(static_cast<std::size_t>(n) + 1, 0.0);
        marginal_mass.assign(width, 0.0);
    }

    void leaf(const std::int32_t* totals, double weight) {
        std::array<std::int32_t, 3> top{-1, -1, -1};
        int exceed = 0;
        for (int i = 0; i < n; ++i) {
            const std::int32_t h = totals[i];
            if (h >= hp_threshold) ++exceed;
            if (h > top[0]) {
                top[2] = top[1]; top[1] = top[0]; top[0] = h;
            } else if (h > top[1]) {
                top[2] = top[1]; top[1] = h;
            } else if (h > top[2]) {
                top[2] = h;
            }
        }
        const int ranks = std::min(n, 3);
        for (int r = 0; r < ranks; ++r)
            top_mass[static_cast<std::size_t>(r)][static_cast<std::size_t>(top[static_cast<std::size_t>(r)])] += weight;
        w_mass[static_cast<std::size_t>(exceed)] += weight;
        if (totals[0] >= hp_threshold && totals[1] >= hp_threshold) pair_mass += weight;
        marginal_mass[static_cast<std::size_t>(totals[0])] += weight;
        const std::int32_t mean_hp = n - 1;
        const double d1 = totals[0] - mean_hp;
        const double d2 = totals[1] - mean_hp;
        centered_cov += weight * d1 * d2;
        centered_var += weight * d1 * d1;
    }
};

}  // namespace detail

/// Walks all 3^(n(n-1)/2) outcome assignments depth-first with incremental
/// weights p^{#draws} ((1-p)/2)^{#decisive}; zero-probability branches are
/// pruned, which reduces p = 0 to the 2^m decisive tournaments.
inline ExactSummary enumerate_small(const ModelParams& params, double t,
                                    int n_max = kDefaultEnumerationMaxPlayers) {
    if (params.n > n_max)
        throw CapacityError("enumeration supports n <= " + std::to_string(n_max) +
                            ", got n = " + std::to_string(params.n));

    const int n = params.n;
    std::vector<std::pair<int, int>> games;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) games.emplace_back(i, j);

    ExactSummary out;
    out.n = n;
    out.p = params.p;
    out.t = t;
    out.x_threshold = threshold(n, t);
    out.hp_threshold = exceedance_threshold_hp(params, out.x_threshold);

    detail::EnumerationAccumulator acc(params, out.hp_threshold);
    const double q = (1.0 - params.p) / 2.0;
    const std::array<double, 3> outcome_prob{q, params.p, q};  // first side gets 2, 1, 0
    std::vector<std::int32_t> totals(static_cast<std::size_t>(n), 0);

    // explicit DFS over game outcomes, weight multiplied edge by edge
    const auto num_games = static_cast<int>(games.size());
    std::vector<int> choice(static_cast<std::size_t>(num_games), -1);
    std::vector<double> weight(static_cast<std::size_t>(num_games) + 1);
    weight[0] = 1.0;
    int depth = 0;
    while (depth >= 0) {
        if (depth == num_games) {
            acc.leaf(totals.data(), weight[static_cast<std::size_t>(depth)]);
            --depth;
            continue;
        }
        auto& c = choice[static_cast<std::size_t>(depth)];
        const auto [i, j] = games[static_cast<std::size_t>(depth)];
        if (c >= 0) {  // undo previous outcome at this depth
            const std::int32_t k = 2 - c;
            totals[static_cast<std::size_t>(i)] -= k;
            totals[static_cast<std::size_t>(j)] -= 2 - k;
        }
        ++c;
        while (c < 3 && outcome_prob[static_cast<std::size_t>(c)] == 0.0) ++c;
        if (c >= 3) {
            c = -1;
            --depth;
            continue;
        }
        const std::int32_t k = 2 - c;
        totals[static_cast<std::size_t>(i)] += k;
        totals[static_cast<std::size_t>(j)] += 2 - k;
        weight[static_cast<std::size_t>(depth) + 1] =
            weight[static_cast<std::size_t>(depth)] * outcome_prob[static_cast<std::size_t>(c)];
        ++depth;
    }

    for (int r = 0; r < 3; ++r) {
        auto& pmf = out.top_pmf[static_cast<std::size_t>(r)];
        pmf.origin_hp = 0;
        pmf.probs = acc.top_mass[static_cast<std::size_t>(r)];
        out.top_mean_points[static_cast<std::size_t>(r)] = pmf.mean_points();
        out.top_sd_points[static_cast<std::size_t>(r)] = pmf.sd_points();
    }
    out.w_pmf = acc.w_mass;
    double ew = 0.0, ew2 = 0.0;
    for (std::size_t k = 0; k < out.w_pmf.size(); ++k) {
        ew += out.w_pmf[k] * static_cast<double>(k);
        ew2 += out.w_pmf[k] * static_cast<double>(k) * static_cast<double>(k);
    }
    out.lambda_from_w = ew;
    out.var_w = ew2 - ew * ew;
    out.pair_exceedance = acc.pair_mass;
    out.corr_s1_s2 = acc.centered_cov / acc.centered_var;
    out.marginal.origin_hp = 0;
    out.marginal.probs = acc.marginal_mass;
    return out;
}

}  // namespace roundrobin
