#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roundrobin/errors.hpp"
#include "roundrobin/rng.hpp"

namespace roundrobin {

/// Warning attached to reports when the Poisson limit is not proven for p.
inline constexpr const char* kApplicabilityWarning =
    "theorem coverage open for p in (0,1/3)";

/// The limit theorems are proven for p = 0 or p in [1/3, 1).
inline constexpr bool theorem_applicable(double p) noexcept {
    return p == 0.0 || p >= 1.0 / 3.0;
}

/// Tournament model: n equally strong players, common draw probability p.
/// Each game gives the two sides scores summing to 1 point; a side wins or
/// loses with probability (1-p)/2 each and draws with probability p.
struct ModelParams {
    int n = 2;              ///< player count, >= 2
    double p = 0.0;         ///< draw probability, in [0, 1)
    bool applicability = true;  ///< true iff p = 0 or p in [1/3, 1)

    /// Half-points a player accumulates over a full schedule: 2(n-1) max.
    std::int32_t max_half_points() const noexcept { return 2 * (n - 1); }
    /// Conserved total over all players, in half-points: n(n-1).
    std::int64_t total_half_points() const noexcept {
        return static_cast<std::int64_t>(n) * (n - 1);
    }
};

inline ModelParams validate_params(int n, double p) {
    if (n < 2) throw DomainError("player count must be at least 2, got " + std::to_string(n));
    if (!(p >= 0.0) || p >= 1.0)
        throw DomainError("draw probability must lie in [0, 1), got " + std::to_string(p));
    return ModelParams{n, p, theorem_applicable(p)};
}

/// Score stored exactly as a count of half-points (score = value / 2).
struct HalfPoints {
    std::int32_t value = 0;
    constexpr double points() const noexcept { return value * 0.5; }
    constexpr auto operator<=>(const HalfPoints&) const = default;
};

/// Per-player half-point totals of one sampled tournament.
struct ScoreVector {
    std::vector<HalfPoints> totals;

    int players() const noexcept { return static_cast<int>(totals.size()); }
    std::int64_t sum_half_points() const noexcept {
        std::int64_t s = 0;
        for (const auto h : totals) s += h.value;
        return s;
    }
};

/// One uniform draw partitioned as [0,(1-p)/2) win, then p draw, rest loss.
/// Bounds are precomputed on the 64-bit integer lattice so the hot loop is a
/// single draw and two compares.
class GameSampler {
public:
    explicit GameSampler(double p) noexcept {
        const long double two64 = 18446744073709551616.0L;  // 2^64
        const long double q = (1.0L - static_cast<long double>(p)) / 2.0L;
        win_bound_ = static_cast<std::uint64_t>(q * two64);
        draw_bound_ = static_cast<std::uint64_t>((q + static_cast<long double>(p)) * two64);
    }

    /// Half-points earned by the first side: 2, 1, or 0.
    std::int32_t sample_first_side(RngStream& rng) const noexcept {
        const std::uint64_t u = rng.next_u64();
        if (u < win_bound_) return 2;
        return u < draw_bound_ ? 1 : 0;
    }

private:
    std::uint64_t win_bound_;
    std::uint64_t draw_bound_;
};

/// Samples one game; the two components always hold 2 half-points total.
inline std::pair<HalfPoints, HalfPoints> sample_game(double p, RngStream& rng) {
    if (!(p >= 0.0) || p >= 1.0)
        throw DomainError("draw probability must lie in [0, 1), got " + std::to_string(p));
    const std::int32_t k = GameSampler(p).sample_first_side(rng);
    return {HalfPoints{k}, HalfPoints{2 - k}};
}

/// Hot path: writes the n half-point totals of one tournament into `totals`.
inline void sample_tournament_into(int n, const GameSampler& sampler, RngStream& rng,
                                   std::span<std::int32_t> totals) noexcept {
    std::fill(totals.begin(), totals.end(), 0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const std::int32_t k = sampler.sample_first_side(rng);
            totals[static_cast<std::size_t>(i)] += k;
            totals[static_cast<std::size_t>(j)] += 2 - k;
        }
    }
}

/// Samples all n(n-1)/2 games independently; the returned totals sum to
/// n(n-1) half-points exactly.
inline ScoreVector sample_tournament(const ModelParams& params, RngStream& rng) {
    std::vector<std::int32_t> raw(static_cast<std::size_t>(params.n), 0);
    sample_tournament_into(params.n, GameSampler(params.p), rng, raw);
    ScoreVector out;
    out.totals.reserve(raw.size());
    for (const auto v : raw) out.totals.push_back(HalfPoints{v});
    return out;
}

/// Single-score mean and standard deviation in points:
/// E_n = (n-1)/2, sigma_n = sqrt((n-1)(1-p))/2.
struct ScoreMoments {
    double mean_points;
    double sd_points;
};

inline ScoreMoments score_moments(const ModelParams& params) {
    const double n1 = static_cast<double>(params.n - 1);
    return {n1 / 2.0, std::sqrt(n1 * (1.0 - params.p)) / 2.0};
}

/// Normalized scores s* = (s - E_n)/sigma_n; half-point arithmetic is kept
/// exact up to the final division.
inline std::vector<double> normalize_scores(const ScoreVector& scores, const ModelParams& params) {
    if (scores.players() != params.n)
        throw DomainError("score vector length does not match player count");
    for (const auto h : scores.totals)
        if (h.value < 0 || h.value > params.max_half_points())
            throw DomainError("score total outside the reachable half-point range");
    if (scores.sum_half_points() != params.total_half_points())
        throw DomainError("score totals violate the conservation identity");
    const auto [mean, sd] = score_moments(params);
    std::vector<double> out;
    out.reserve(scores.totals.size());
    for (const auto h : scores.totals)
        out.push_back((h.points() - mean) / sd);
    return out;
}

/// Ascending stable sort; lattice ties keep their input order.
template <class T>
std::vector<T> order_statistics(std::span<const T> values) {
    if (values.empty()) throw DomainError("order statistics of an empty sequence");
    std::vector<T> sorted(values.begin(), values.end());
    std::stable_sort(sorted.begin(), sorted.end());
    return sorted;
}

template <class T>
std::vector<T> order_statistics(const std::vector<T>& values) {
    return order_statistics(std::span<const T>(values));
}

}  // namespace roundrobin
