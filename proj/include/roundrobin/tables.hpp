#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "roundrobin/asymptotics.hpp"
#include "roundrobin/errors.hpp"
#include "roundrobin/model.hpp"
#include "roundrobin/monte_carlo.hpp"

namespace roundrobin {

/// One comparison row: Monte Carlo moments of s_(n-j) against the
/// closed-form approximations, with relative errors in percent.
struct TableRow {
    int j = 0;
    int n = 0;
    std::uint64_t reps = 0;
    double mc_e = 0.0;
    double hat_e = 0.0;
    double rel_e_pct = 0.0;
    double mc_sd = 0.0;
    double hat_sd = 0.0;
    double rel_sd_pct = 0.0;
};

/// Replication defaults follow the published table captions:
/// 100,000 up to n = 100; 10,000 up to n = 1000; 500 beyond.
inline std::uint64_t default_reps_for(int n) noexcept {
    if (n <= 100) return 100000;
    if (n <= 1000) return 10000;
    return 500;
}

/// kind 1 compares the maximum (j = 0); kind 2 the second and third
/// largest (j = 1, 2; two rows per n, j ascending).
inline std::vector<TableRow> table_rows(int kind, std::span<const int> n_list, double p,
                                        std::optional<std::uint64_t> reps_override,
                                        std::uint64_t seed, unsigned threads) {
    if (kind != 1 && kind != 2) throw DomainError("table kind must be 1 or 2");
    const std::vector<int> j_set = kind == 1 ? std::vector<int>{0} : std::vector<int>{1, 2};

    std::vector<TableRow> rows;
    for (const int n : n_list) {
        const ModelParams params = validate_params(n, p);
        McConfig cfg;
        cfg.reps = reps_override.value_or(default_reps_for(n));
        cfg.master_seed = seed;
        cfg.worker_hint = threads;
        const auto estimates = estimate_order_stat_moments(params, j_set, cfg);
        for (const int j : j_set) {
            const MomentEstimate& mc = estimates.at(j);
            const MomentApprox hat = approx_moments(j, params);
            TableRow row;
            row.j = j;
            row.n = n;
            row.reps = cfg.reps;
            row.mc_e = mc.mean;
            row.hat_e = hat.e_hat;
            row.rel_e_pct = std::abs(hat.e_hat / mc.mean - 1.0) * 100.0;
            row.mc_sd = mc.sd;
            row.hat_sd = hat.sd_hat;
            row.rel_sd_pct = std::abs(hat.sd_hat / mc.sd - 1.0) * 100.0;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace roundrobin
