#pragma once

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <new>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "roundrobin/accumulators.hpp"
#include "roundrobin/asymptotics.hpp"
#include "roundrobin/errors.hpp"
#include "roundrobin/lattice.hpp"
#include "roundrobin/model.hpp"
#include "roundrobin/rng.hpp"
#include "roundrobin/total_variation.hpp"

namespace roundrobin {

struct McConfig {
    std::uint64_t reps = 1;
    std::uint64_t master_seed = 0;
    std::vector<double> t_grid;  ///< thresholds for exceedance histograms
    unsigned worker_hint = 0;    ///< 0 = hardware concurrency
};

struct MomentEstimate {
    double mean = 0.0;
    double sd = 0.0;
    double se_mean = 0.0;  ///< sd / sqrt(reps)
    std::uint64_t reps = 0;
};

/// Occurrence counts of the exceedance count S_n at one threshold t.
struct ExceedanceHistogram {
    double t = 0.0;
    std::map<int, std::uint64_t> counts;
    std::uint64_t reps = 0;
};

/// A collector consumes each replication's half-point totals and merges
/// with peer states; the engine guarantees merges happen in a canonical
/// order, so merge only needs to be associative.
template <class C>
concept ReplicationCollector =
    std::copy_constructible<C> &&
    requires(C c, const C& other, std::uint64_t rep, std::span<const std::int32_t> totals) {
        c.consume(rep, totals);
        c.merge(other);
    };

namespace detail {

/// Block decomposition depends only on reps, never on the worker count, so
/// the block-ordered reduction gives bitwise identical results for any
/// parallelism degree.
inline std::uint64_t block_size_for(std::uint64_t reps) noexcept {
    const std::uint64_t target = (reps + 255) / 256;
    return std::clamp<std::uint64_t>(target, 1, 1024);
}

}  // namespace detail

/// Runs cfg.reps independent tournaments; replication i draws from
/// RngStream(master_seed, i). Replications are processed in fixed blocks;
/// block states merge into the result strictly in block order.
/// Every 1000th replication re-checks the conservation identity.
template <ReplicationCollector C>
C run_replications(const ModelParams& params, const McConfig& cfg, C collector) {
    if (cfg.reps < 1) throw DomainError("replication count must be >= 1");

    const std::uint64_t block = detail::block_size_for(cfg.reps);
    const std::uint64_t num_blocks = (cfg.reps + block - 1) / block;
    unsigned workers = cfg.worker_hint ? cfg.worker_hint : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(num_blocks)));

    C merged = collector;  // empty prototype receives the block states
    std::atomic<std::uint64_t> next_block{0};
    std::mutex merge_mutex;
    std::uint64_t next_to_merge = 0;
    std::map<std::uint64_t, C> parked;
    std::exception_ptr failure;

    auto work = [&]() {
        std::vector<std::int32_t> totals(static_cast<std::size_t>(params.n), 0);
        const GameSampler sampler(params.p);
        try {
            for (;;) {
                const std::uint64_t b = next_block.fetch_add(1, std::memory_order_relaxed);
                if (b >= num_blocks) return;
                C local = collector;
                const std::uint64_t lo = b * block;
                const std::uint64_t hi = std::min(cfg.reps, lo + block);
                for (std::uint64_t rep = lo; rep < hi; ++rep) {
                    RngStream rng(cfg.master_seed, rep);
                    sample_tournament_into(params.n, sampler, rng, totals);
                    if (rep % 1000 == 0) {
                        std::int64_t sum = 0;
                        for (const auto v : totals) sum += v;
                        if (sum != params.total_half_points())
                            throw std::logic_error("conservation identity violated in sampler");
                    }
                    local.consume(rep, std::span<const std::int32_t>(totals));
                }
                std::lock_guard<std::mutex> lock(merge_mutex);
                parked.emplace(b, std::move(local));
                while (!parked.empty() && parked.begin()->first == next_to_merge) {
                    merged.merge(parked.begin()->second);
                    parked.erase(parked.begin());
                    ++next_to_merge;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(merge_mutex);
            if (!failure) failure = std::current_exception();
            next_block.store(num_blocks, std::memory_order_relaxed);  // drain remaining work
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::bad_alloc&) {
            throw CapacityError("replication run exhausted memory; partial results discarded");
        }
    }
    return merged;
}

// ---------------------------------------------------------------------------
// collectors

/// Tracks the top three scores of each replication in one pass.
class OrderStatMomentsCollector {
public:
    void consume(std::uint64_t, std::span<const std::int32_t> totals) noexcept {
        std::int32_t a = -1, b = -1, c = -1;
        for (const std::int32_t h : totals) {
            if (h > a) {
                c = b; b = a; a = h;
            } else if (h > b) {
                c = b; b = h;
            } else if (h > c) {
                c = h;
            }
        }
        moments_[0].push(a * 0.5);
        moments_[1].push(b * 0.5);
        moments_[2].push(c * 0.5);
    }

    void merge(const OrderStatMomentsCollector& other) noexcept {
        for (int r = 0; r < 3; ++r)
            moments_[static_cast<std::size_t>(r)].merge(other.moments_[static_cast<std::size_t>(r)]);
    }

    /// Moments of s_(n-j), score in points.
    MomentEstimate estimate(int j) const {
        const auto& m = moments_.at(static_cast<std::size_t>(j));
        const double sd = m.sd_sample();
        return {m.mean(), sd, sd / std::sqrt(static_cast<double>(m.count())), m.count()};
    }

private:
    std::array<RunningMoments, 3> moments_{};
};

/// Counts, per threshold t, how many players strictly exceed x_n(t); the
/// comparison happens on precomputed integer half-point thresholds.
class ExceedanceCollector {
public:
    ExceedanceCollector(const ModelParams& params, std::span<const double> t_grid) {
        n_ = params.n;
        for (const double t : t_grid) {
            t_values_.push_back(t);
            hp_min_.push_back(exceedance_threshold_hp(params, threshold(params.n, t)));
            counts_.emplace_back(static_cast<std::size_t>(params.n) + 1, 0);
        }
        total_exceedances_.assign(t_values_.size(), 0);
    }

    void consume(std::uint64_t, std::span<const std::int32_t> totals) noexcept {
        ++reps_seen_;
        for (std::size_t ti = 0; ti < hp_min_.size(); ++ti) {
            const std::int32_t hp_min = hp_min_[ti];
            std::uint32_t exceed = 0;
            for (const std::int32_t h : totals) exceed += h >= hp_min;
            ++counts_[ti][exceed];
            total_exceedances_[ti] += exceed;
        }
    }

    void merge(const ExceedanceCollector& other) noexcept {
        for (std::size_t ti = 0; ti < counts_.size(); ++ti) {
            for (std::size_t k = 0; k < counts_[ti].size(); ++k)
                counts_[ti][k] += other.counts_[ti][k];
            total_exceedances_[ti] += other.total_exceedances_[ti];
        }
        reps_seen_ += other.reps_seen_;
    }

    ExceedanceHistogram histogram(std::size_t ti) const {
        ExceedanceHistogram h;
        h.t = t_values_.at(ti);
        h.reps = reps_seen_;
        for (std::size_t k = 0; k < counts_[ti].size(); ++k)
            if (counts_[ti][k] > 0) h.counts.emplace(static_cast<int>(k), counts_[ti][k]);
        return h;
    }

    std::size_t thresholds() const noexcept { return t_values_.size(); }
    std::uint64_t total_exceedances(std::size_t ti) const { return total_exceedances_.at(ti); }
    std::uint64_t reps_seen() const noexcept { return reps_seen_; }

private:
    int n_ = 0;
    std::vector<double> t_values_;
    std::vector<std::int32_t> hp_min_;
    std::vector<std::vector<std::uint64_t>> counts_;
    std::vector<std::uint64_t> total_exceedances_;
    std::uint64_t reps_seen_ = 0;
};

/// Streaming correlation between the scores of players 1 and 2.
class PairCorrelationCollector {
public:
    void consume(std::uint64_t, std::span<const std::int32_t> totals) noexcept {
        cov_.push(totals[0] * 0.5, totals[1] * 0.5);
    }
    void merge(const PairCorrelationCollector& other) noexcept { cov_.merge(other.cov_); }
    const RunningCovariance& state() const noexcept { return cov_; }

private:
    RunningCovariance cov_;
};

// ---------------------------------------------------------------------------
// estimation fronts

/// Moments of the (j+1)-th largest score for each requested rank offset.
inline std::map<int, MomentEstimate> estimate_order_stat_moments(
    const ModelParams& params, std::span<const int> j_set, const McConfig& cfg) {
    for (const int j : j_set) {
        if (j < 0 || j > 2) throw DomainError("rank offset must be in {0,1,2}");
        if (j >= params.n) throw DomainError("rank offset needs at least j+1 players");
    }
    const auto merged = run_replications(params, cfg, OrderStatMomentsCollector{});
    std::map<int, MomentEstimate> out;
    for (const int j : j_set) out.emplace(j, merged.estimate(j));
    return out;
}

/// One pass over all thresholds in cfg.t_grid.
inline std::map<double, ExceedanceHistogram> estimate_exceedance_histogram(
    const ModelParams& params, const McConfig& cfg) {
    const auto merged =
        run_replications(params, cfg, ExceedanceCollector(params, cfg.t_grid));
    std::map<double, ExceedanceHistogram> out;
    for (std::size_t ti = 0; ti < merged.thresholds(); ++ti) {
        auto h = merged.histogram(ti);
        out.emplace(h.t, std::move(h));
    }
    return out;
}

/// Empirical pmf of the histogram against Poisson(lambda).
inline double empirical_tv(const ExceedanceHistogram& h, double lambda) {
    if (h.reps < 1) throw DomainError("histogram has no replications");
    std::size_t max_k = 0;
    for (const auto& [k, c] : h.counts) max_k = std::max<std::size_t>(max_k, static_cast<std::size_t>(k));
    std::vector<double> dist(max_k + 1, 0.0);
    for (const auto& [k, c] : h.counts)
        dist[static_cast<std::size_t>(k)] = static_cast<double>(c) / static_cast<double>(h.reps);
    return exact_tv(dist, lambda);
}

/// Product-moment correlation of two players' scores. The sd field carries
/// the delta-method asymptotic value (1 - r^2), so se_mean = sd / sqrt(reps)
/// is the usual large-sample standard error of a correlation estimate.
inline MomentEstimate estimate_pair_correlation(const ModelParams& params, const McConfig& cfg) {
    const auto merged = run_replications(params, cfg, PairCorrelationCollector{});
    const double r = merged.state().correlation();
    const double sd = 1.0 - r * r;
    const double reps = static_cast<double>(merged.state().count());
    return {r, sd, sd / std::sqrt(reps), merged.state().count()};
}

}  // namespace roundrobin
