#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factorlab/csv.hpp"

namespace factorlab {

enum class AssetClass {
    EquityUS,
    EquityChina,
    BondUS,
    BondChina,
    Commodity,
    RealEstate,
    Volatility,
    Rate,
};

enum class SeriesRole { Factor, Benchmark, RiskFree };

std::string_view to_string(AssetClass asset_class);
std::string_view to_string(SeriesRole role);
std::optional<AssetClass> parse_asset_class(std::string_view text);
std::optional<SeriesRole> parse_series_role(std::string_view text);

struct UniverseEntry {
    int id = 0;
    std::string ticker;
    std::string variable_name;
    AssetClass asset_class = AssetClass::EquityUS;
    SeriesRole role = SeriesRole::Factor;
};

/// The set of series a panel is built from: N factors, one benchmark and one
/// risk-free rate. Entries are kept in id order; "factor index" below always
/// means the position among Factor-role entries (0..N-1).
class FactorUniverse {
public:
    explicit FactorUniverse(std::vector<UniverseEntry> entries);

    /// The 20-factor ETF universe with SPY as benchmark and ^IRX as risk-free.
    static FactorUniverse standard();

    const std::vector<UniverseEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t factor_count() const { return factor_columns_.size(); }

    /// Positions (into entries()) of the factor series, in factor-index order.
    const std::vector<std::size_t>& factor_columns() const { return factor_columns_; }
    std::size_t benchmark_column() const { return benchmark_column_; }
    std::size_t risk_free_column() const { return risk_free_column_; }

    std::vector<std::string> factor_names() const;
    std::optional<std::size_t> factor_index(std::string_view variable_name) const;
    std::optional<std::size_t> column_of_ticker(std::string_view ticker) const;

private:
    std::vector<UniverseEntry> entries_;
    std::vector<std::size_t> factor_columns_;
    std::size_t benchmark_column_ = 0;
    std::size_t risk_free_column_ = 0;
};

/// Reads the universe JSON file: an array of objects with keys
/// id, ticker, variable_name, asset_class, role.
FactorUniverse load_universe(const std::filesystem::path& path);
void write_universe(const std::filesystem::path& path, const FactorUniverse& universe);

/// Half-open row range [begin, end) into a panel.
struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const Window&) const = default;
};

/// Date-indexed simple daily returns. Column j of returns() is
/// universe().entries()[j]; the risk-free column already holds a daily rate.
class ReturnPanel {
public:
    ReturnPanel(std::vector<Date> dates, Eigen::MatrixXd returns, FactorUniverse universe);

    std::size_t rows() const { return dates_.size(); }
    const std::vector<Date>& dates() const { return dates_; }
    const Eigen::MatrixXd& returns() const { return returns_; }
    const FactorUniverse& universe() const { return universe_; }
    std::size_t factor_count() const { return universe_.factor_count(); }

    Window full() const { return {0, rows()}; }

    /// rows x N block of factor returns; throws BadInput for an invalid window.
    Eigen::MatrixXd factor_returns(Window window) const;
    Eigen::VectorXd benchmark_returns(Window window) const;
    Eigen::VectorXd risk_free(Window window) const;
    Eigen::VectorXd column(std::size_t column, Window window) const;

    void check_window(Window window) const;

private:
    std::vector<Date> dates_;
    Eigen::MatrixXd returns_;
    FactorUniverse universe_;
};

/// Raw price file contents: one column per ticker, NaN where missing.
struct PriceTable {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd prices;
};

PriceTable read_price_csv(const std::filesystem::path& path);
void write_price_csv(const std::filesystem::path& path, const PriceTable& table);

/// Converts adjusted closes to simple returns after dropping every date with a
/// missing value. The risk-free ticker is an annualized percent quote and is
/// converted to a daily rate by dividing by 100 * 252.
ReturnPanel prices_to_panel(const PriceTable& table, const FactorUniverse& universe);
ReturnPanel load_prices(const std::filesystem::path& path, const FactorUniverse& universe);

inline constexpr double kTradingDaysPerYear = 252.0;
double risk_free_quote_to_daily(double annual_percent);

/// Returns panel as CSV keyed by variable_name; reloading is bit-exact.
void write_returns_csv(const std::filesystem::path& path, const ReturnPanel& panel);
ReturnPanel load_returns_csv(const std::filesystem::path& path, const FactorUniverse& universe);

/// Deterministic one-factor-model price paths on weekdays from start, for
/// demos and tests. Prices for tradable series, percent quotes for risk-free.
PriceTable make_synthetic_prices(const FactorUniverse& universe, std::size_t days,
                                 std::uint64_t seed, Date start = Date{std::chrono::year{2020},
                                                                       std::chrono::month{4},
                                                                       std::chrono::day{1}});

struct SummaryRow {
    std::string name;
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double q25 = 0.0;
    double q50 = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

/// One row per series in universe order; std uses the T-1 divisor and
/// quartiles use linear interpolation between order statistics.
std::vector<SummaryRow> summary_stats(const ReturnPanel& panel);

/// Pearson correlation of the columns of a T x K block.
Eigen::MatrixXd correlation_of(const Eigen::MatrixXd& columns);
/// N x N factor correlation; DegenerateSeries if any factor is constant.
Eigen::MatrixXd correlation_matrix(const ReturnPanel& panel);

struct MarketCapWeights {
    Eigen::VectorXd weights;
};

MarketCapWeights normalize_market_caps(const Eigen::VectorXd& raw);
/// Two-column file `variable_name,weight` covering every factor.
MarketCapWeights load_market_caps(const std::filesystem::path& path, const FactorUniverse& universe);

}  // namespace factorlab
