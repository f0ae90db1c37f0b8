#include <gtest/gtest.h>

#include <sstream>

#include "factorlab/backtest.hpp"
#include "factorlab/cli.hpp"
#include "factorlab/report.hpp"
#include "test_support.hpp"

using namespace factorlab;
using namespace factorlab::testing;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class CliRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new std::filesystem::path(scratch_dir("cli"));
        const auto r = run({"synth", "--days", "160", "--seed", "5", "--synth-out", prices()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    static void TearDownTestSuite() {
        delete dir_;
        dir_ = nullptr;
    }

    static std::string prices() { return (*dir_ / "prices.csv").string(); }
    static std::string out() { return (*dir_ / "reports").string(); }
    static std::filesystem::path run_dir(const std::string& id) { return *dir_ / "reports" / id; }

    static std::vector<std::string> base(const std::string& command, const std::string& id) {
        return {command, "--prices", prices(), "--out", out(), "--run-id", id};
    }

    static std::filesystem::path* dir_;
};

std::filesystem::path* CliRun::dir_ = nullptr;

}  // namespace

TEST(CliExitCodes, MapErrorKinds) {
    EXPECT_EQ(exit_code_for(ErrorKind::BadInput), kExitUserInput);
    EXPECT_EQ(exit_code_for(ErrorKind::IoError), kExitUserInput);
    EXPECT_EQ(exit_code_for(ErrorKind::MissingInput), kExitUserInput);
    EXPECT_EQ(exit_code_for(ErrorKind::UniverseMismatch), kExitUserInput);
    EXPECT_EQ(exit_code_for(ErrorKind::SingularCovariance), kExitData);
    EXPECT_EQ(exit_code_for(ErrorKind::InsufficientData), kExitData);
    EXPECT_EQ(exit_code_for(ErrorKind::NonPositiveAversion), kExitData);
}

TEST(CliParsing, HelpAndUsageErrors) {
    EXPECT_EQ(run({"--help"}).code, kExitOk);
    EXPECT_NE(run({"--help"}).out.find("backtest"), std::string::npos);
    EXPECT_EQ(run({}).code, kExitUserInput);
    EXPECT_EQ(run({"frobnicate"}).code, kExitUserInput);
    EXPECT_EQ(run({"stats", "--prices", "/nonexistent/prices.csv"}).code, kExitUserInput);
    EXPECT_EQ(run({"stats", "--seed", "abc"}).code, kExitUserInput);
}

TEST_F(CliRun, MissingPricesIsUserError) {
    const auto r = run({"stats", "--out", out()});
    EXPECT_EQ(r.code, kExitUserInput);
    EXPECT_NE(r.err.find("--prices"), std::string::npos);
}

TEST_F(CliRun, StatsWritesTableAndCharts) {
    const auto r = run(base("stats", "stats"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto root = run_dir("stats");
    EXPECT_TRUE(std::filesystem::exists(root / "tables" / "summary_stats.csv"));
    EXPECT_TRUE(std::filesystem::exists(root / "charts" / "correlation.svg"));
    EXPECT_TRUE(std::filesystem::exists(root / "charts" / "cumulative_returns.svg"));
    EXPECT_NE(read_file(root / "run_meta.json").find("\"command\": \"stats\""), std::string::npos);
    const auto csv = read_file(root / "tables" / "summary_stats.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "series,count,mean,std,min,25%,50%,75%,max");
}

TEST_F(CliRun, AllocateAllSchemesWithCaps) {
    auto args = base("allocate", "alloc");
    args.insert(args.end(), {"--caps", data_path("market_caps.csv"), "--lambda", "2"});
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = read_file(run_dir("alloc") / "tables" / "weights.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "factor,Market Cap Weights,Equal Weights,Implied Beta Weights,GMV Weights,"
              "Markowitz Weights with lambda=2,Max Sharpe Weights,Black-Litterman Weights");
    EXPECT_TRUE(std::filesystem::exists(run_dir("alloc") / "charts" / "weights.svg"));
}

TEST_F(CliRun, AllocateRejectsUnknownSchemeAndMissingCaps) {
    auto bad = base("allocate", "alloc_bad");
    bad.insert(bad.end(), {"--schemes", "gmv,risk_parity"});
    EXPECT_EQ(run(bad).code, kExitUserInput);
    auto no_caps = base("allocate", "alloc_nocaps");
    no_caps.insert(no_caps.end(), {"--schemes", "market_cap"});
    EXPECT_EQ(run(no_caps).code, kExitUserInput);
    auto estimator = base("allocate", "alloc_est");
    estimator.insert(estimator.end(), {"--schemes", "gmv", "--estimator", "ledoit"});
    EXPECT_EQ(run(estimator).code, kExitUserInput);
}

TEST_F(CliRun, BlScenarioTableKeepsLambdaRatios) {
    auto args = base("bl", "bl");
    args.insert(args.end(), {"--caps", data_path("market_caps.csv"), "--views", data_path("views_example.json"),
                             "--lambda", "average"});
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = parse_percent_table(read_file(run_dir("bl") / "tables" / "bl_scenarios.csv"));
    ASSERT_EQ(t.columns, (std::vector<std::string>{"Empirical Mkt", "Kelly", "Market", "Risk Averse"}));
    ASSERT_EQ(t.rows.size(), 20u);
    // two-decimal percentages: compare only well-resolved entries
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (std::abs(t.values[3][i]) > 0.05) EXPECT_NEAR(t.values[2][i] / t.values[3][i], 3.0 / 1.12, 1e-2);
    }
    const auto meta = read_file(run_dir("bl") / "run_meta.json");
    EXPECT_NE(meta.find("lambda_empirical_half"), std::string::npos);
    EXPECT_NE(meta.find("\"lambda_source\": \"average\""), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(run_dir("bl") / "tables" / "bl_construction.csv"));
}

TEST_F(CliRun, StaticAndContrarianBacktests) {
    auto st = base("backtest", "bt_static");
    st.insert(st.end(), {"--mode", "static", "--caps", data_path("market_caps.csv"), "--schemes", "equal,gmv"});
    ASSERT_EQ(run(st).code, 0);
    EXPECT_TRUE(std::filesystem::exists(run_dir("bt_static") / "tables" / "ledger_static.csv"));
    EXPECT_TRUE(std::filesystem::exists(run_dir("bt_static") / "charts" / "cumulative_static.svg"));

    auto ct = base("backtest", "bt_contra");
    ct.insert(ct.end(), {"--mode", "contrarian"});
    ASSERT_EQ(run(ct).code, 0);
    EXPECT_TRUE(std::filesystem::exists(run_dir("bt_contra") / "tables" / "report_contrarian.json"));

    auto bad = base("backtest", "bt_bad");
    bad.insert(bad.end(), {"--mode", "weekly"});
    EXPECT_EQ(run(bad).code, kExitUserInput);
}

TEST_F(CliRun, DynamicBacktestIsReproducibleAndReportable) {
    auto args = base("backtest", "dyn_a");
    const std::vector<std::string> model{"--mode", "dynamic", "--generator", "lstm", "--sequence-length", "25",
                                         "--window", "5", "--train-span", "100", "--hidden", "3", "--epochs", "4"};
    args.insert(args.end(), model.begin(), model.end());
    ASSERT_EQ(run(args).code, 0);
    args[6] = "dyn_b";
    ASSERT_EQ(run(args).code, 0);
    for (const auto* file : {"tables/ledger_dynamic.csv", "tables/ledger_dynamic.json", "tables/views.json",
                             "charts/cumulative_dynamic.svg", "charts/weights_dynamic_black_litterman.svg"}) {
        const auto a = read_file(run_dir("dyn_a") / file);
        EXPECT_FALSE(a.empty()) << file;
        EXPECT_EQ(a, read_file(run_dir("dyn_b") / file)) << file;
    }
    const auto ledger = load_ledger_json(run_dir("dyn_a") / "tables" / "ledger_dynamic.json");
    EXPECT_TRUE(audit_no_lookahead(ledger).empty());

    auto rep = std::vector<std::string>{"report", "--ledger", (run_dir("dyn_a") / "tables" / "ledger_dynamic.json").string(),
                                        "--out", out(), "--run-id", "rep"};
    ASSERT_EQ(run(rep).code, 0);
    EXPECT_TRUE(std::filesystem::exists(run_dir("rep") / "tables" / "summary_dynamic.json"));
    EXPECT_TRUE(std::filesystem::exists(run_dir("rep") / "tables" / "corners_dynamic.csv"));

    auto bad = base("backtest", "dyn_bad");
    bad.insert(bad.end(), {"--mode", "dynamic", "--train-span", "30", "--sequence-length", "5"});
    EXPECT_EQ(run(bad).code, kExitUserInput);
}

TEST_F(CliRun, SweepWritesBothEstimators) {
    auto args = base("sweep", "sweep");
    args.insert(args.end(), {"--prior", "gmv"});
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto* file : {"tables/sweep_sample.csv", "tables/sweep_shrunk.csv", "tables/shrinkage_impact.json",
                             "charts/sweep_prior_sample.svg", "charts/sweep_posterior_shrunk.svg"}) {
        EXPECT_TRUE(std::filesystem::exists(run_dir("sweep") / file)) << file;
    }
    auto bad = base("sweep", "sweep_bad");
    bad.insert(bad.end(), {"--omega-mode", "sometimes"});
    EXPECT_EQ(run(bad).code, kExitUserInput);
}

TEST_F(CliRun, ConfigFileSuppliesOptions) {
    const auto cfg = *dir_ / "run.ini";
    write_text_file(cfg, "prices=" + prices() + "\nout=" + out() + "\nrun-id=from_config\n");
    const auto r = run({"stats", "--config", cfg.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(run_dir("from_config") / "tables" / "summary_stats.csv"));
    write_text_file(cfg, "bogus_key=1\n");
    EXPECT_EQ(run({"stats", "--config", cfg.string()}).code, kExitUserInput);
}
