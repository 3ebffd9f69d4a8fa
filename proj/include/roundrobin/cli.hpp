#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roundrobin/asymptotics.hpp"
#include "roundrobin/enumeration.hpp"
#include "roundrobin/errors.hpp"
#include "roundrobin/lattice.hpp"
#include "roundrobin/model.hpp"
#include "roundrobin/monte_carlo.hpp"
#include "roundrobin/tables.hpp"
#include "roundrobin/total_variation.hpp"

namespace roundrobin::cli {

enum class Command { kTable1, kTable2, kPoissonCheck, kCorrCheck, kExact, kAsymptotics };
enum class OutputFormat { kCsv, kJson };

inline const char* command_name(Command c) {
    switch (c) {
        case Command::kTable1: return "table1";
        case Command::kTable2: return "table2";
        case Command::kPoissonCheck: return "poisson-check";
        case Command::kCorrCheck: return "corr-check";
        case Command::kExact: return "exact";
        case Command::kAsymptotics: return "asymptotics";
    }
    return "?";
}

/// Fully resolved invocation: defaults are applied at parse time, so a spec
/// always round-trips through its canonical flag string unchanged.
struct RunSpec {
    Command command = Command::kTable1;
    std::vector<int> n_list;
    double p = 0.0;
    std::optional<std::uint64_t> reps;
    std::uint64_t seed = 0;
    std::vector<double> t_grid;
    OutputFormat format = OutputFormat::kCsv;
    unsigned threads = 0;
    std::optional<std::string> out;

    bool operator==(const RunSpec&) const = default;
};

/// Bad or missing flags; process exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// --help and friends; carries the text to print, exit code 0.
struct HelpRequested {
    std::string text;
};

namespace detail {

inline std::string shortest_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string csv_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

struct FlagStore {
    std::vector<int> n_list;
    double p = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    std::vector<double> t_grid;
    std::string format;
    unsigned threads = 0;
    std::string out;
};

enum : unsigned {
    kFlagReps = 1u << 0,
    kFlagSeed = 1u << 1,
    kFlagT = 1u << 2,
    kFlagThreads = 1u << 3,
};

inline bool flag_given(const CLI::App* sub, const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

inline void register_flags(CLI::App* sub, FlagStore& store, unsigned mask) {
    sub->add_option("--n", store.n_list, "player counts (repeatable or comma list)")
        ->delimiter(',');
    sub->add_option("--p", store.p, "draw probability in [0,1)");
    if (mask & kFlagReps)
        sub->add_option("--reps", store.reps, "Monte Carlo replications per n");
    if (mask & kFlagSeed) sub->add_option("--seed", store.seed, "master RNG seed");
    if (mask & kFlagT)
        sub->add_option("--t", store.t_grid, "threshold parameter t (repeatable or comma list)")
            ->delimiter(',');
    sub->add_option("--format", store.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    if (mask & kFlagThreads)
        sub->add_option("--threads", store.threads, "worker threads (0 = hardware)");
    sub->add_option("--out", store.out, "output file (default standard output)");
}

}  // namespace detail

inline const std::vector<int>& default_table_n_list() {
    static const std::vector<int> list{10, 20, 50, 100, 1000, 10000};
    return list;
}

/// Parses argv-style arguments (program name excluded). Throws UsageError
/// on bad flags and HelpRequested for --help.
inline RunSpec parse_run_spec(const std::vector<std::string>& args) {
    CLI::App app{"round-robin tournament score simulator"};
    app.require_subcommand(1);

    detail::FlagStore store;
    auto* table1 = app.add_subcommand("table1", "maximum score: MC vs closed form");
    auto* table2 = app.add_subcommand("table2", "second/third largest: MC vs closed form");
    auto* poisson = app.add_subcommand("poisson-check", "exceedance counts vs Poisson");
    auto* corr = app.add_subcommand("corr-check", "pair correlation vs -1/(n-1)");
    auto* exact = app.add_subcommand("exact", "exact small-n oracle report");
    auto* asym = app.add_subcommand("asymptotics", "normalizing constants and approximations");

    using namespace detail;
    const unsigned mc_mask = kFlagReps | kFlagSeed | kFlagThreads;
    register_flags(table1, store, mc_mask);
    register_flags(table2, store, mc_mask);
    register_flags(poisson, store, mc_mask | kFlagT);
    register_flags(corr, store, mc_mask);
    register_flags(exact, store, kFlagT);
    register_flags(asym, store, kFlagT);

    std::vector<const char*> argv;
    argv.push_back("roundrobin");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw UsageError(std::string("usage error: ") + e.what());
    }

    CLI::App* active = nullptr;
    RunSpec spec;
    if (table1->parsed()) { active = table1; spec.command = Command::kTable1; }
    else if (table2->parsed()) { active = table2; spec.command = Command::kTable2; }
    else if (poisson->parsed()) { active = poisson; spec.command = Command::kPoissonCheck; }
    else if (corr->parsed()) { active = corr; spec.command = Command::kCorrCheck; }
    else if (exact->parsed()) { active = exact; spec.command = Command::kExact; }
    else { active = asym; spec.command = Command::kAsymptotics; }

    const bool table_cmd = spec.command == Command::kTable1 || spec.command == Command::kTable2;
    const bool mc_cmd = table_cmd || spec.command == Command::kPoissonCheck ||
                        spec.command == Command::kCorrCheck;

    if (detail::flag_given(active, "--n")) spec.n_list = store.n_list;
    else if (table_cmd || spec.command == Command::kAsymptotics) spec.n_list = default_table_n_list();
    else throw UsageError(std::string("usage error: ") + command_name(spec.command) + " requires --n");

    if (detail::flag_given(active, "--p")) spec.p = store.p;
    else if (table_cmd) spec.p = 2.0 / 3.0;  // the published tables fix p = 2/3
    else throw UsageError(std::string("usage error: ") + command_name(spec.command) + " requires --p");

    if (detail::flag_given(active, "--reps")) spec.reps = store.reps;
    if (detail::flag_given(active, "--seed")) spec.seed = store.seed;
    if (detail::flag_given(active, "--threads")) spec.threads = store.threads;
    if (detail::flag_given(active, "--out")) spec.out = store.out;

    if (detail::flag_given(active, "--t")) spec.t_grid = store.t_grid;
    else if (spec.command == Command::kPoissonCheck) spec.t_grid = {-1.0, 0.0, 1.0, 2.0};
    else if (spec.command == Command::kExact || spec.command == Command::kAsymptotics)
        spec.t_grid = {0.0};

    const bool csv_capable = table_cmd || spec.command == Command::kCorrCheck;
    if (detail::flag_given(active, "--format"))
        spec.format = store.format == "csv" ? OutputFormat::kCsv : OutputFormat::kJson;
    else
        spec.format = table_cmd ? OutputFormat::kCsv : OutputFormat::kJson;
    if (spec.format == OutputFormat::kCsv && !csv_capable)
        throw UsageError(std::string("usage error: ") + command_name(spec.command) +
                         " emits JSON reports only");

    if (mc_cmd && spec.reps && *spec.reps < 1)
        throw UsageError("usage error: --reps must be at least 1");
    if (!std::isfinite(spec.p)) throw UsageError("usage error: --p must be finite");
    for (const double t : spec.t_grid)
        if (!std::isfinite(t)) throw UsageError("usage error: --t values must be finite");
    return spec;
}

/// Canonical, fully explicit flag sequence; parsing it reproduces the spec.
inline std::vector<std::string> canonical_flags(const RunSpec& spec) {
    std::vector<std::string> flags;
    flags.emplace_back(command_name(spec.command));
    std::string ns;
    for (std::size_t i = 0; i < spec.n_list.size(); ++i) {
        if (i) ns += ',';
        ns += std::to_string(spec.n_list[i]);
    }
    flags.emplace_back("--n");
    flags.push_back(ns);
    flags.emplace_back("--p");
    flags.push_back(detail::shortest_double(spec.p));
    if (spec.reps) {
        flags.emplace_back("--reps");
        flags.push_back(std::to_string(*spec.reps));
    }
    const bool table_cmd = spec.command == Command::kTable1 || spec.command == Command::kTable2;
    const bool mc_cmd = table_cmd || spec.command == Command::kPoissonCheck ||
                        spec.command == Command::kCorrCheck;
    if (mc_cmd) {
        flags.emplace_back("--seed");
        flags.push_back(std::to_string(spec.seed));
    }
    if (spec.command == Command::kPoissonCheck || spec.command == Command::kExact ||
        spec.command == Command::kAsymptotics) {
        for (const double t : spec.t_grid) {
            flags.emplace_back("--t");
            flags.push_back(detail::shortest_double(t));
        }
    }
    flags.emplace_back("--format");
    flags.emplace_back(spec.format == OutputFormat::kCsv ? "csv" : "json");
    if (mc_cmd) {
        flags.emplace_back("--threads");
        flags.push_back(std::to_string(spec.threads));
    }
    if (spec.out) {
        flags.emplace_back("--out");
        flags.push_back(*spec.out);
    }
    return flags;
}

inline std::string canonical_command_line(const RunSpec& spec) {
    std::string line;
    for (const auto& f : canonical_flags(spec)) {
        if (!line.empty()) line += ' ';
        line += f;
    }
    return line;
}

// ---------------------------------------------------------------------------
// command execution

namespace detail {

inline nlohmann::json params_json(const RunSpec& spec) {
    nlohmann::json j;
    j["command"] = command_name(spec.command);
    j["n_list"] = spec.n_list;
    j["p"] = spec.p;
    if (spec.reps) j["reps"] = *spec.reps;
    j["seed"] = spec.seed;
    j["t_grid"] = spec.t_grid;
    j["threads"] = spec.threads;
    return j;
}

inline nlohmann::json applicability_json(double p) {
    nlohmann::json j;
    j["applicability"] = theorem_applicable(p);
    if (!theorem_applicable(p)) j["warning"] = kApplicabilityWarning;
    return j;
}

inline nlohmann::json pmf_json(const LatticePmf& pmf) {
    nlohmann::json j;
    j["origin_hp"] = pmf.origin_hp;
    j["probs"] = pmf.probs;
    return j;
}

inline void emit_table_csv(std::span<const TableRow> rows, bool with_j, std::ostream& os) {
    if (with_j) os << "j,";
    os << "n,reps,E_mc,E_hat,rel_E_pct,sd_mc,sd_hat,rel_sd_pct\n";
    for (const TableRow& r : rows) {
        if (with_j) os << r.j << ',';
        os << r.n << ',' << r.reps << ',' << csv_number(r.mc_e) << ',' << csv_number(r.hat_e)
           << ',' << csv_number(r.rel_e_pct) << ',' << csv_number(r.mc_sd) << ','
           << csv_number(r.hat_sd) << ',' << csv_number(r.rel_sd_pct) << '\n';
    }
}

inline nlohmann::json table_row_json(const TableRow& r) {
    nlohmann::json j;
    j["j"] = r.j;
    j["n"] = r.n;
    j["reps"] = r.reps;
    j["E_mc"] = r.mc_e;
    j["E_hat"] = r.hat_e;
    j["rel_E_pct"] = r.rel_e_pct;
    j["sd_mc"] = r.mc_sd;
    j["sd_hat"] = r.hat_sd;
    j["rel_sd_pct"] = r.rel_sd_pct;
    return j;
}

inline void run_table(const RunSpec& spec, int kind, std::ostream& os) {
    const auto rows = table_rows(kind, spec.n_list, spec.p, spec.reps, spec.seed, spec.threads);
    if (spec.format == OutputFormat::kCsv) {
        emit_table_csv(rows, kind == 2, os);
        return;
    }
    nlohmann::json j;
    j["params"] = params_json(spec);
    nlohmann::json per_n = nlohmann::json::array();
    for (const auto& r : rows) per_n.push_back(table_row_json(r));
    j["per_n"] = per_n;
    j["diagnostics"] = applicability_json(spec.p);
    os << j.dump(2) << '\n';
}

inline void run_poisson_check(const RunSpec& spec, std::ostream& os) {
    nlohmann::json report;
    report["params"] = params_json(spec);
    nlohmann::json per_n = nlohmann::json::array();
    for (const int n : spec.n_list) {
        const ModelParams params = validate_params(n, spec.p);
        const LatticePmf marginal = single_score_pmf(params);
        McConfig cfg;
        cfg.reps = spec.reps.value_or(default_reps_for(n));
        cfg.master_seed = spec.seed;
        cfg.t_grid = spec.t_grid;
        cfg.worker_hint = spec.threads;
        const auto histograms = estimate_exceedance_histogram(params, cfg);

        nlohmann::json entry;
        entry["n"] = n;
        entry["reps"] = cfg.reps;
        nlohmann::json per_t = nlohmann::json::array();
        for (const double t : spec.t_grid) {
            const ExceedanceHistogram& h = histograms.at(t);
            const double lam = lambda_n(params, t, marginal);
            const double limit_lambda = std::exp(-t);
            const TailLimitDiagnostics diag = tail_limit_diagnostics(params, t, marginal);
            nlohmann::json jt;
            jt["t"] = t;
            jt["x"] = threshold(n, t);
            jt["lambda_n"] = lam;
            jt["limit_lambda"] = limit_lambda;
            nlohmann::json hist;
            for (const auto& [k, c] : h.counts) hist[std::to_string(k)] = c;
            jt["histogram"] = hist;
            jt["tv_vs_poisson_lambda_n"] = empirical_tv(h, lam);
            jt["tv_vs_poisson_limit"] = empirical_tv(h, limit_lambda);
            jt["diagnostics"] = {{"pi1", diag.pi1},
                                 {"normal_tail", diag.normal_tail},
                                 {"tail_ratio", diag.tail_ratio},
                                 {"n_pi1", diag.n_pi1},
                                 {"limit_e_t", diag.limit_e_t}};
            if (n <= kDefaultEnumerationMaxPlayers) {
                const ExactSummary ex = enumerate_small(params, t);
                const double tv = exact_tv(ex.w_pmf, ex.lambda_from_w);
                const double bound = poisson_tv_bound(ex.lambda_from_w, ex.var_w);
                jt["exact"] = {{"w_pmf", ex.w_pmf},
                               {"exact_tv", tv},
                               {"tv_bound", bound},
                               {"bound_holds", tv <= bound}};
            }
            per_t.push_back(jt);
        }
        entry["per_t"] = per_t;
        per_n.push_back(entry);
    }
    report["per_n"] = per_n;
    report["diagnostics"] = applicability_json(spec.p);
    os << report.dump(2) << '\n';
}

inline void run_corr_check(const RunSpec& spec, std::ostream& os) {
    struct Row {
        int n;
        std::uint64_t reps;
        double corr_mc, se, corr_exact, abs_z;
    };
    std::vector<Row> rows;
    for (const int n : spec.n_list) {
        const ModelParams params = validate_params(n, spec.p);
        McConfig cfg;
        cfg.reps = spec.reps.value_or(default_reps_for(n));
        cfg.master_seed = spec.seed;
        cfg.worker_hint = spec.threads;
        const MomentEstimate est = estimate_pair_correlation(params, cfg);
        const double exact = -1.0 / (n - 1);
        const double z = est.se_mean > 0.0 ? std::abs(est.mean - exact) / est.se_mean : 0.0;
        rows.push_back({n, est.reps, est.mean, est.se_mean, exact, z});
    }
    if (spec.format == OutputFormat::kCsv) {
        os << "n,reps,corr_mc,se,corr_exact,abs_z\n";
        for (const Row& r : rows)
            os << r.n << ',' << r.reps << ',' << csv_number(r.corr_mc) << ',' << csv_number(r.se)
               << ',' << csv_number(r.corr_exact) << ',' << csv_number(r.abs_z) << '\n';
        return;
    }
    nlohmann::json j;
    j["params"] = params_json(spec);
    nlohmann::json per_n = nlohmann::json::array();
    for (const Row& r : rows)
        per_n.push_back({{"n", r.n},
                         {"reps", r.reps},
                         {"corr_mc", r.corr_mc},
                         {"se", r.se},
                         {"corr_exact", r.corr_exact},
                         {"abs_z", r.abs_z}});
    j["per_n"] = per_n;
    j["diagnostics"] = applicability_json(spec.p);
    os << j.dump(2) << '\n';
}

inline void run_exact(const RunSpec& spec, std::ostream& os) {
    const double t = spec.t_grid.empty() ? 0.0 : spec.t_grid.front();
    nlohmann::json report;
    report["params"] = params_json(spec);
    nlohmann::json per_n = nlohmann::json::array();
    for (const int n : spec.n_list) {
        const ModelParams params = validate_params(n, spec.p);
        const ExactSummary ex = enumerate_small(params, t);
        const LatticePmf conv = single_score_pmf(params);
        double max_diff = 0.0;
        for (std::int32_t h = 0; h <= params.max_half_points(); ++h)
            max_diff = std::max(max_diff, std::abs(conv.mass_at(h) - ex.marginal.mass_at(h)));

        nlohmann::json entry;
        entry["n"] = n;
        entry["t"] = t;
        entry["x"] = ex.x_threshold;
        entry["hp_threshold"] = ex.hp_threshold;
        entry["single_score_pmf"] = pmf_json(conv);
        nlohmann::json order = nlohmann::json::array();
        for (int r = 0; r < std::min(n, 3); ++r) {
            order.push_back({{"rank_offset", r},
                             {"pmf", pmf_json(ex.top_pmf[static_cast<std::size_t>(r)])},
                             {"mean_points", ex.top_mean_points[static_cast<std::size_t>(r)]},
                             {"sd_points", ex.top_sd_points[static_cast<std::size_t>(r)]}});
        }
        entry["order_stats"] = order;
        entry["w_pmf"] = ex.w_pmf;
        entry["lambda_n"] = ex.lambda_from_w;
        entry["var_w"] = ex.var_w;
        entry["pair_exceedance"] = ex.pair_exceedance;
        entry["corr_s1_s2"] = ex.corr_s1_s2;
        entry["corr_formula"] = -1.0 / (n - 1);
        entry["marginal_max_abs_diff_vs_convolution"] = max_diff;
        per_n.push_back(entry);
    }
    report["per_n"] = per_n;
    report["diagnostics"] = applicability_json(spec.p);
    os << report.dump(2) << '\n';
}

inline void run_asymptotics(const RunSpec& spec, std::ostream& os) {
    nlohmann::json report;
    report["params"] = params_json(spec);
    nlohmann::json per_n = nlohmann::json::array();
    for (const int n : spec.n_list) {
        const ModelParams params = validate_params(n, spec.p);
        const NormConstants nc = norm_constants(n);
        const auto [mean, sd] = score_moments(params);
        nlohmann::json entry;
        entry["n"] = n;
        entry["a_n"] = nc.a;
        entry["b_n"] = nc.b;
        entry["E_n"] = mean;
        entry["sigma_n"] = sd;
        nlohmann::json thresholds = nlohmann::json::array();
        for (const double t : spec.t_grid)
            thresholds.push_back({{"t", t}, {"x", nc.threshold(t)}, {"limit_e_t", std::exp(-t)}});
        entry["thresholds"] = thresholds;
        nlohmann::json moments = nlohmann::json::array();
        for (int j = 0; j <= 2 && j < n; ++j) {
            const MomentApprox m = approx_moments(j, params);
            moments.push_back({{"j", m.j},
                               {"e_star", m.e_star},
                               {"sd_star", m.sd_star},
                               {"e_hat", m.e_hat},
                               {"sd_hat", m.sd_hat}});
        }
        entry["moments"] = moments;
        per_n.push_back(entry);
    }
    report["per_n"] = per_n;
    report["diagnostics"] = applicability_json(spec.p);
    os << report.dump(2) << '\n';
}

}  // namespace detail

/// Executes a parsed spec, writing the report to `os`. Domain and capacity
/// failures propagate as exceptions; the tool maps them to exit code 2.
inline void run_spec(const RunSpec& spec, std::ostream& os) {
    switch (spec.command) {
        case Command::kTable1: detail::run_table(spec, 1, os); return;
        case Command::kTable2: detail::run_table(spec, 2, os); return;
        case Command::kPoissonCheck: detail::run_poisson_check(spec, os); return;
        case Command::kCorrCheck: detail::run_corr_check(spec, os); return;
        case Command::kExact: detail::run_exact(spec, os); return;
        case Command::kAsymptotics: detail::run_asymptotics(spec, os); return;
    }
}

}  // namespace roundrobin::cli
