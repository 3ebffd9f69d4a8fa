#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "roundrobin/cli.hpp"

using namespace roundrobin;
namespace rc = roundrobin::cli;
using Catch::Approx;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::string run_to_string(const rc::RunSpec& spec) {
    std::ostringstream os;
    rc::run_spec(spec, os);
    return os.str();
}

}  // namespace

TEST_CASE("parse applies the documented defaults") {
    const rc::RunSpec t1 = rc::parse_run_spec({"table1"});
    CHECK(t1.command == rc::Command::kTable1);
    CHECK(t1.n_list == std::vector<int>{10, 20, 50, 100, 1000, 10000});
    CHECK(t1.p == Approx(2.0 / 3.0).margin(0));
    CHECK_FALSE(t1.reps.has_value());
    CHECK(t1.seed == 0);
    CHECK(t1.format == rc::OutputFormat::kCsv);

    const rc::RunSpec pc = rc::parse_run_spec({"poisson-check", "--n", "5", "--p", "0.5"});
    CHECK(pc.t_grid == std::vector<double>{-1.0, 0.0, 1.0, 2.0});
    CHECK(pc.format == rc::OutputFormat::kJson);

    const rc::RunSpec ex = rc::parse_run_spec({"exact", "--n", "3", "--p", "0"});
    CHECK(ex.t_grid == std::vector<double>{0.0});
}

TEST_CASE("parse rejects bad usage with exit-code-1 errors") {
    CHECK_THROWS_AS(rc::parse_run_spec({}), rc::UsageError);
    CHECK_THROWS_AS(rc::parse_run_spec({"tabel1"}), rc::UsageError);
    CHECK_THROWS_AS(rc::parse_run_spec({"table1", "--bogus", "3"}), rc::UsageError);
    CHECK_THROWS_AS(rc::parse_run_spec({"exact", "--p", "0.5"}), rc::UsageError);   // missing --n
    CHECK_THROWS_AS(rc::parse_run_spec({"poisson-check", "--n", "4"}), rc::UsageError);  // missing --p
    CHECK_THROWS_AS(rc::parse_run_spec({"exact", "--n", "3", "--p", "0", "--format", "csv"}),
                    rc::UsageError);
    CHECK_THROWS_AS(rc::parse_run_spec({"table1", "--format", "xml"}), rc::UsageError);
    CHECK_THROWS_AS(rc::parse_run_spec({"table1", "--t", "1"}), rc::UsageError);  // tables take no --t
    CHECK_THROWS_AS(rc::parse_run_spec({"exact", "--n", "3", "--p", "0", "--seed", "1"}),
                    rc::UsageError);  // exact has no RNG
    CHECK_THROWS(rc::parse_run_spec({"--help"}));
}

TEST_CASE("a parsed spec round-trips through its canonical flags") {
    const std::vector<std::vector<std::string>> cases = {
        {"table1"},
        {"table1", "--n", "10", "--p", "0.6667", "--reps", "100000", "--seed", "42",
         "--format", "csv"},
        {"table2", "--n", "10,20", "--seed", "7", "--threads", "3", "--out", "rows.csv"},
        {"poisson-check", "--n", "5,10", "--p", "0.5", "--t", "-1", "--t", "0.25",
         "--reps", "1000"},
        {"corr-check", "--n", "3", "--p", "0", "--format", "csv"},
        {"exact", "--n", "3,4", "--p", "0.3333333333333333", "--t", "0.5"},
        {"asymptotics", "--n", "100", "--p", "0.6666666666666666", "--t", "0", "--t", "2"},
    };
    for (const auto& args : cases) {
        CAPTURE(args);
        const rc::RunSpec spec = rc::parse_run_spec(args);
        const rc::RunSpec again = rc::parse_run_spec(rc::canonical_flags(spec));
        CHECK(spec == again);
        CHECK(rc::canonical_command_line(spec) == rc::canonical_command_line(again));
    }
}

TEST_CASE("table CSV carries the documented header and column order") {
    rc::RunSpec spec = rc::parse_run_spec(
        {"table1", "--n", "4", "--p", "0.5", "--reps", "400", "--seed", "9"});
    const std::string csv = run_to_string(spec);
    CHECK(first_line(csv) == "n,reps,E_mc,E_hat,rel_E_pct,sd_mc,sd_hat,rel_sd_pct");

    rc::RunSpec spec2 = rc::parse_run_spec(
        {"table2", "--n", "4", "--p", "0.5", "--reps", "400", "--seed", "9"});
    const std::string csv2 = run_to_string(spec2);
    CHECK(first_line(csv2) == "j,n,reps,E_mc,E_hat,rel_E_pct,sd_mc,sd_hat,rel_sd_pct");
    // one row per requested rank, j ascending
    CHECK(csv2.find("\n1,4,400,") != std::string::npos);
    CHECK(csv2.find("\n2,4,400,") != std::string::npos);
}

TEST_CASE("table rows recompute their relative-error columns") {
    const std::vector<int> n_list{4, 6};
    const auto rows = table_rows(2, n_list, 0.5, 500, 11, 0);
    REQUIRE(rows.size() == 4);
    for (const TableRow& r : rows) {
        CHECK(r.rel_e_pct == Approx(std::abs(r.hat_e / r.mc_e - 1.0) * 100.0).margin(1e-9));
        CHECK(r.rel_sd_pct == Approx(std::abs(r.hat_sd / r.mc_sd - 1.0) * 100.0).margin(1e-9));
    }

    // the JSON emission carries the same full-precision numbers
    rc::RunSpec spec = rc::parse_run_spec(
        {"table2", "--n", "4,6", "--p", "0.5", "--reps", "500", "--seed", "11",
         "--format", "json"});
    const auto doc = nlohmann::json::parse(run_to_string(spec));
    REQUIRE(doc.at("per_n").size() == 4);
    for (const auto& row : doc.at("per_n")) {
        const double rel = row.at("rel_E_pct").get<double>();
        const double recomputed =
            std::abs(row.at("E_hat").get<double>() / row.at("E_mc").get<double>() - 1.0) * 100.0;
        CHECK(rel == Approx(recomputed).margin(1e-9));
    }
}

TEST_CASE("identical specs emit byte-identical reports") {
    const rc::RunSpec spec = rc::parse_run_spec(
        {"poisson-check", "--n", "4", "--p", "0.5", "--reps", "2000", "--seed", "3"});
    CHECK(run_to_string(spec) == run_to_string(spec));
}

TEST_CASE("poisson-check report structure and the open-region warning") {
    rc::RunSpec spec = rc::parse_run_spec(
        {"poisson-check", "--n", "4", "--p", "0.2", "--reps", "500", "--seed", "1",
         "--t", "0"});
    const auto doc = nlohmann::json::parse(run_to_string(spec));
    CHECK(doc.at("diagnostics").at("applicability").get<bool>() == false);
    CHECK(doc.at("diagnostics").at("warning").get<std::string>() ==
          "theorem coverage open for p in (0,1/3)");

    const auto& per_t = doc.at("per_n").at(0).at("per_t").at(0);
    CHECK(per_t.contains("lambda_n"));
    CHECK(per_t.contains("histogram"));
    CHECK(per_t.contains("tv_vs_poisson_lambda_n"));
    CHECK(per_t.contains("tv_vs_poisson_limit"));
    // n = 4 <= 6: the exact enumeration section with the bound verdict
    CHECK(per_t.at("exact").contains("exact_tv"));
    CHECK(per_t.at("exact").contains("tv_bound"));
    CHECK(per_t.at("exact").at("bound_holds").get<bool>());

    rc::RunSpec covered = rc::parse_run_spec(
        {"poisson-check", "--n", "4", "--p", "0.5", "--reps", "500", "--seed", "1",
         "--t", "0"});
    const auto doc2 = nlohmann::json::parse(run_to_string(covered));
    CHECK(doc2.at("diagnostics").at("applicability").get<bool>());
    CHECK_FALSE(doc2.at("diagnostics").contains("warning"));
}

TEST_CASE("exact report cross-checks its own oracles") {
    rc::RunSpec spec =
        rc::parse_run_spec({"exact", "--n", "4", "--p", "0.6666666666666666", "--t", "0"});
    const auto doc = nlohmann::json::parse(run_to_string(spec));
    const auto& entry = doc.at("per_n").at(0);
    CHECK(entry.at("marginal_max_abs_diff_vs_convolution").get<double>() < 1e-12);
    CHECK(entry.at("corr_s1_s2").get<double>() == Approx(-1.0 / 3.0).margin(1e-12));
    CHECK(entry.at("order_stats").size() == 3);
    CHECK(entry.at("w_pmf").size() == 5);
}

TEST_CASE("asymptotics report lists constants and moment approximations") {
    rc::RunSpec spec = rc::parse_run_spec(
        {"asymptotics", "--n", "10", "--p", "0.6666666666666666", "--t", "0", "--t", "1"});
    const auto doc = nlohmann::json::parse(run_to_string(spec));
    const auto& entry = doc.at("per_n").at(0);
    CHECK(entry.at("a_n").get<double>() == Approx(0.46599060178466).epsilon(1e-10));
    CHECK(entry.at("b_n").get<double>() == Approx(1.36192362976645).epsilon(1e-10));
    CHECK(entry.at("moments").size() == 3);
    CHECK(entry.at("moments").at(0).at("e_hat").get<double>() == Approx(5.912).margin(5e-4));
    CHECK(entry.at("thresholds").size() == 2);
}

TEST_CASE("table1 handles the degenerate two-player row") {
    const std::vector<int> n_list{2};
    const auto rows = table_rows(1, n_list, 2.0 / 3.0, 300, 1, 0);
    REQUIRE(rows.size() == 1);
    CHECK(std::isfinite(rows[0].mc_e));
    CHECK(std::isfinite(rows[0].hat_e));
    CHECK(rows[0].mc_sd > 0.0);

    // p = 0 collapses the winner's score to a point mass; the row must
    // still emit rather than crash
    const auto degenerate = table_rows(1, n_list, 0.0, 300, 1, 0);
    CHECK(degenerate[0].mc_e == 1.0);
    CHECK(degenerate[0].mc_sd == 0.0);
    rc::RunSpec spec = rc::parse_run_spec(
        {"table1", "--n", "2", "--p", "0", "--reps", "300", "--seed", "1"});
    CHECK_FALSE(run_to_string(spec).empty());
}

#ifdef ROUNDROBIN_CLI_PATH
namespace {

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string("\"") + ROUNDROBIN_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("the binary maps failures to the documented exit codes") {
    CHECK(run_cli("asymptotics --n 4 --p 0.5") == 0);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("table1 --bogus") == 1);           // usage
    CHECK(run_cli("exact --p 0.5") == 1);            // missing --n
    CHECK(run_cli("exact --n 7 --p 0.5") == 2);      // enumeration capacity
    CHECK(run_cli("table1 --n 1 --reps 100") == 2);  // invalid model params
    CHECK(run_cli("corr-check --n 4 --p 1.5 --reps 100") == 2);
}
#endif

TEST_CASE("corr-check emits both formats") {
    rc::RunSpec csv_spec = rc::parse_run_spec(
        {"corr-check", "--n", "3", "--p", "0", "--reps", "4000", "--seed", "2",
         "--format", "csv"});
    const std::string csv = run_to_string(csv_spec);
    CHECK(first_line(csv) == "n,reps,corr_mc,se,corr_exact,abs_z");

    rc::RunSpec json_spec = rc::parse_run_spec(
        {"corr-check", "--n", "3", "--p", "0", "--reps", "4000", "--seed", "2"});
    const auto doc = nlohmann::json::parse(run_to_string(json_spec));
    CHECK(doc.at("per_n").at(0).at("corr_exact").get<double>() == -0.5);
    CHECK(std::abs(doc.at("per_n").at(0).at("abs_z").get<double>()) < 6.0);
}
