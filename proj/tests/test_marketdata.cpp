#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "factorlab/error.hpp"
#include "factorlab/marketdata.hpp"
#include "test_support.hpp"

using namespace factorlab;
using namespace factorlab::testing;

namespace {

PriceTable three_series_prices(std::vector<double> factor, std::vector<double> bench, std::vector<double> rf) {
    PriceTable t;
    t.dates = weekdays(factor.size());
    t.tickers = {"BENCH", "T0", "RF"};
    t.prices.resize(static_cast<Eigen::Index>(factor.size()), 3);
    for (std::size_t i = 0; i < factor.size(); ++i) {
        t.prices(static_cast<Eigen::Index>(i), 0) = bench[i];
        t.prices(static_cast<Eigen::Index>(i), 1) = factor[i];
        t.prices(static_cast<Eigen::Index>(i), 2) = rf[i];
    }
    return t;
}

}  // namespace

TEST(FactorUniverse, StandardHasTwentyFactorsBenchmarkAndRiskFree) {
    const auto u = FactorUniverse::standard();
    EXPECT_EQ(u.size(), 22u);
    EXPECT_EQ(u.factor_count(), 20u);
    EXPECT_EQ(u.entries()[u.benchmark_column()].ticker, "SPY");
    EXPECT_EQ(u.entries()[u.risk_free_column()].ticker, "^IRX");
    EXPECT_EQ(u.factor_names().front(), "us_growth");
    EXPECT_EQ(u.factor_names().back(), "vix");
    EXPECT_EQ(u.factor_index("us_momentum"), 6u);
    EXPECT_FALSE(u.factor_index("nope").has_value());
}

TEST(FactorUniverse, RejectsDuplicateRolesAndGaps) {
    auto entries = small_universe(2).entries();
    auto two_bench = entries;
    two_bench[1].role = SeriesRole::Benchmark;
    EXPECT_EQ(error_kind_of([&] { FactorUniverse{two_bench}; }), ErrorKind::BadInput);
    auto gap = entries;
    gap.back().id = 10;
    EXPECT_EQ(error_kind_of([&] { FactorUniverse{gap}; }), ErrorKind::BadInput);
    auto no_rf = entries;
    no_rf.back().role = SeriesRole::Factor;
    EXPECT_EQ(error_kind_of([&] { FactorUniverse{no_rf}; }), ErrorKind::BadInput);
}

TEST(FactorUniverse, FileRoundTrip) {
    const auto dir = scratch_dir("universe");
    write_universe(dir / "u.json", FactorUniverse::standard());
    const auto back = load_universe(dir / "u.json");
    ASSERT_EQ(back.size(), 22u);
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back.entries()[i].ticker, FactorUniverse::standard().entries()[i].ticker);
        EXPECT_EQ(back.entries()[i].role, FactorUniverse::standard().entries()[i].role);
    }
    const auto shipped = load_universe(data_path("universe.json"));
    EXPECT_EQ(shipped.factor_names(), FactorUniverse::standard().factor_names());
}

TEST(LoadPrices, SimpleReturnsFromPrices) {
    const auto panel = prices_to_panel(three_series_prices({100, 101, 99.99}, {50, 50, 50}, {1, 1, 1}), small_universe(1));
    ASSERT_EQ(panel.rows(), 2u);
    const auto r = panel.factor_returns(panel.full());
    EXPECT_NEAR(r(0, 0), 0.01, 1e-12);
    EXPECT_NEAR(r(1, 0), -0.01, 1e-12);
}

TEST(LoadPrices, RiskFreeQuoteIsAnnualPercent) {
    EXPECT_NEAR(risk_free_quote_to_daily(5.04), 0.0002, 1e-18);
    const auto panel = prices_to_panel(three_series_prices({1, 1, 1}, {1, 1, 1}, {5.04, 5.04, 2.52}), small_universe(1));
    const auto rf = panel.risk_free(panel.full());
    EXPECT_NEAR(rf(0), 0.0002, 1e-18);
    EXPECT_NEAR(rf(1), 0.0001, 1e-18);
}

TEST(LoadPrices, MissingTickerColumnIsUniverseMismatch) {
    auto table = three_series_prices({1, 2, 3}, {1, 2, 3}, {1, 1, 1});
    table.tickers[1] = "VUG";
    EXPECT_EQ(error_kind_of([&] { prices_to_panel(table, small_universe(1)); }), ErrorKind::UniverseMismatch);
}

TEST(LoadPrices, DropsDatesWithMissingValues) {
    auto table = three_series_prices({100, 101, 102, 103, 104}, {1, 1, 1, 1, 1}, {1, 1, 1, 1, 1});
    table.prices(2, 1) = std::numeric_limits<double>::quiet_NaN();
    const auto panel = prices_to_panel(table, small_universe(1));
    ASSERT_EQ(panel.rows(), 3u);
    EXPECT_EQ(panel.dates()[1], table.dates[3]);
    EXPECT_NEAR(panel.factor_returns(panel.full())(1, 0), 103.0 / 101.0 - 1.0, 1e-15);
}

TEST(LoadPrices, TooFewRowsIsInsufficientData) {
    EXPECT_EQ(error_kind_of([&] { prices_to_panel(three_series_prices({1, 2}, {1, 2}, {1, 1}), small_universe(1)); }),
              ErrorKind::InsufficientData);
}

TEST(LoadPrices, FileErrors) {
    const auto dir = scratch_dir("prices");
    EXPECT_EQ(error_kind_of([&] { load_prices(dir / "absent.csv", small_universe(1)); }), ErrorKind::IoError);
    write_text_file(dir / "bad.csv", "date,BENCH,T0,RF\n2021-01-05,1,1,1\n2021-01-04,1,1,1\n2021-01-06,1,1,1\n");
    EXPECT_EQ(error_kind_of([&] { load_prices(dir / "bad.csv", small_universe(1)); }), ErrorKind::BadInput);
}

TEST(LoadPrices, CsvRoundTripThroughFile) {
    const auto dir = scratch_dir("prices_rt");
    const auto table = make_synthetic_prices(FactorUniverse::standard(), 60, 7);
    write_price_csv(dir / "p.csv", table);
    const auto direct = prices_to_panel(table, FactorUniverse::standard());
    const auto loaded = load_prices(dir / "p.csv", FactorUniverse::standard());
    ASSERT_EQ(direct.rows(), loaded.rows());
    EXPECT_EQ(direct.returns(), loaded.returns());
}

TEST(ReturnPanel, RejectsBadShapes) {
    const auto u = small_universe(1);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 3);
    auto dates = weekdays(2);
    EXPECT_EQ(error_kind_of([&] { ReturnPanel(std::vector<Date>{dates[0]}, Eigen::MatrixXd::Zero(1, 3), u); }),
              ErrorKind::InsufficientData);
    Eigen::MatrixXd crash = r;
    crash(1, 1) = -1.0;
    EXPECT_EQ(error_kind_of([&] { ReturnPanel(dates, crash, u); }), ErrorKind::BadInput);
    std::swap(dates[0], dates[1]);
    EXPECT_EQ(error_kind_of([&] { ReturnPanel(dates, r, u); }), ErrorKind::BadInput);
}

TEST(ReturnPanel, ReturnsCsvRoundTripIsBitExact) {
    const auto dir = scratch_dir("returns_rt");
    const auto panel = prices_to_panel(make_synthetic_prices(FactorUniverse::standard(), 120, 3), FactorUniverse::standard());
    write_returns_csv(dir / "r.csv", panel);
    const auto back = load_returns_csv(dir / "r.csv", FactorUniverse::standard());
    ASSERT_EQ(back.rows(), panel.rows());
    EXPECT_EQ(back.dates(), panel.dates());
    for (Eigen::Index i = 0; i < panel.returns().size(); ++i) {
        EXPECT_EQ(back.returns().data()[i], panel.returns().data()[i]);
    }
}

TEST(SyntheticPrices, DeterministicPerSeed) {
    const auto a = make_synthetic_prices(FactorUniverse::standard(), 50, 11);
    const auto b = make_synthetic_prices(FactorUniverse::standard(), 50, 11);
    const auto c = make_synthetic_prices(FactorUniverse::standard(), 50, 12);
    EXPECT_EQ(a.prices, b.prices);
    EXPECT_NE(a.prices, c.prices);
    EXPECT_EQ(a.dates.size(), 50u);
}

TEST(SummaryStats, ConstantAndTwoPointSeries) {
    Eigen::MatrixXd f(2, 2);
    f << 0.01, 0.0, 0.01, 0.02;
    const auto panel = make_panel(f);
    const auto rows = summary_stats(panel);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[1].name, "f0");
    EXPECT_DOUBLE_EQ(rows[1].mean, 0.01);
    EXPECT_DOUBLE_EQ(rows[1].std, 0.0);
    EXPECT_DOUBLE_EQ(rows[2].mean, 0.01);
    EXPECT_NEAR(rows[2].std, std::sqrt(2.0) * 0.01, 1e-15);
    EXPECT_DOUBLE_EQ(rows[2].q50, 0.01);
    EXPECT_EQ(rows[2].count, 2u);
}

TEST(SummaryStats, QuartilesInterpolateLinearly) {
    Eigen::MatrixXd f(5, 1);
    f << 0.05, 0.01, 0.04, 0.02, 0.03;
    const auto rows = summary_stats(make_panel(f));
    EXPECT_DOUBLE_EQ(rows[1].min, 0.01);
    EXPECT_DOUBLE_EQ(rows[1].q25, 0.02);
    EXPECT_DOUBLE_EQ(rows[1].q50, 0.03);
    EXPECT_DOUBLE_EQ(rows[1].q75, 0.04);
    EXPECT_DOUBLE_EQ(rows[1].max, 0.05);
}

TEST(Correlation, SelfAndNegation) {
    Rng rng(5);
    Eigen::MatrixXd f(50, 2);
    for (Eigen::Index t = 0; t < 50; ++t) {
        f(t, 0) = 0.01 * rng.normal();
        f(t, 1) = -f(t, 0);
    }
    const auto c = correlation_matrix(make_panel(f));
    EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
    EXPECT_NEAR(c(0, 1), -1.0, 1e-12);
    EXPECT_EQ(c(0, 1), c(1, 0));
}

TEST(Correlation, IndependentSeriesAreNearlyUncorrelated) {
    Rng rng(2024);
    Eigen::MatrixXd f(10000, 3);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = 0.01 * rng.normal();
    const auto c = correlation_of(f);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) EXPECT_LT(std::abs(c(i, j)), 0.05);
}

TEST(Correlation, ZeroVarianceIsDegenerate) {
    Eigen::MatrixXd f(4, 2);
    f << 0.01, 0.02, 0.01, -0.01, 0.01, 0.03, 0.01, 0.0;
    EXPECT_EQ(error_kind_of([&] { correlation_matrix(make_panel(f)); }), ErrorKind::DegenerateSeries);
}

TEST(Correlation, PositiveSemidefiniteAndBounded) {
    const auto panel = random_panel(300, 12, 99);
    const auto c = correlation_matrix(panel);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    EXPECT_LE(c.cwiseAbs().maxCoeff(), 1.0);
}

TEST(MarketCaps, ShippedFileLoadsAndNormalizes) {
    const auto caps = load_market_caps(data_path("market_caps.csv"), FactorUniverse::standard());
    ASSERT_EQ(caps.weights.size(), 20);
    EXPECT_NEAR(caps.weights.sum(), 1.0, 1e-9);
    EXPECT_NEAR(caps.weights(0), 0.279375, 5e-4);
    EXPECT_GE(caps.weights.minCoeff(), 0.0);
}

TEST(MarketCaps, EqualAndScaledInputs) {
    const auto equal = normalize_market_caps(Eigen::VectorXd::Constant(20, 0.05));
    EXPECT_TRUE(equal.weights.isApprox(Eigen::VectorXd::Constant(20, 0.05), 1e-15));
    Eigen::VectorXd raw(4);
    raw << 0.8, 0.6, 0.4, 0.2;
    const auto scaled = normalize_market_caps(raw);
    EXPECT_NEAR(scaled.weights.sum(), 1.0, 1e-12);
    EXPECT_NEAR(scaled.weights(0), 0.4, 1e-15);
}

TEST(MarketCaps, MissingFactorAndNegativeValue) {
    const auto dir = scratch_dir("caps");
    write_text_file(dir / "missing.csv", "variable_name,weight\nf0,0.5\n");
    EXPECT_EQ(error_kind_of([&] { load_market_caps(dir / "missing.csv", small_universe(2)); }),
              ErrorKind::UniverseMismatch);
    write_text_file(dir / "neg.csv", "variable_name,weight\nf0,0.5\nf1,-0.1\n");
    EXPECT_EQ(error_kind_of([&] { load_market_caps(dir / "neg.csv", small_universe(2)); }), ErrorKind::BadInput);
    write_text_file(dir / "unknown.csv", "variable_name,weight\nf0,0.5\nf1,0.5\nzz,0.1\n");
    EXPECT_EQ(error_kind_of([&] { load_market_caps(dir / "unknown.csv", small_universe(2)); }),
              ErrorKind::UniverseMismatch);
}
