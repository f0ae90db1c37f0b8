#include "factorlab/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "factorlab/error.hpp"
#include "factorlab/random.hpp"

namespace factorlab {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

bool is_missing_token(std::string_view text) {
    text = trim(text);
    return text.empty() || text == "NA" || text == "NaN" || text == "nan" || text == "null" ||
           text == "N/A";
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view to_string(AssetClass asset_class) {
    switch (asset_class) {
        case AssetClass::EquityUS: return "EquityUS";
        case AssetClass::EquityChina: return "EquityChina";
        case AssetClass::BondUS: return "BondUS";
        case AssetClass::BondChina: return "BondChina";
        case AssetClass::Commodity: return "Commodity";
        case AssetClass::RealEstate: return "RealEstate";
        case AssetClass::Volatility: return "Volatility";
        case AssetClass::Rate: return "Rate";
    }
    return "EquityUS";
}

std::string_view to_string(SeriesRole role) {
    switch (role) {
        case SeriesRole::Factor: return "Factor";
        case SeriesRole::Benchmark: return "Benchmark";
        case SeriesRole::RiskFree: return "RiskFree";
    }
    return "Factor";
}

std::optional<AssetClass> parse_asset_class(std::string_view text) {
    for (auto c : {AssetClass::EquityUS, AssetClass::EquityChina, AssetClass::BondUS,
                   AssetClass::BondChina, AssetClass::Commodity, AssetClass::RealEstate,
                   AssetClass::Volatility, AssetClass::Rate}) {
        if (to_string(c) == text) return c;
    }
    return std::nullopt;
}

std::optional<SeriesRole> parse_series_role(std::string_view text) {
    for (auto r : {SeriesRole::Factor, SeriesRole::Benchmark, SeriesRole::RiskFree}) {
        if (to_string(r) == text) return r;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// FactorUniverse

FactorUniverse::FactorUniverse(std::vector<UniverseEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const UniverseEntry& a, const UniverseEntry& b) { return a.id < b.id; });
    std::set<std::string> names;
    std::set<std::string> tickers;
    int benchmarks = 0;
    int risk_free = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.id != static_cast<int>(i)) {
            fail(ErrorKind::BadInput, "universe ids must be unique and contiguous from 0");
        }
        if (e.variable_name.empty() || e.ticker.empty()) {
            fail(ErrorKind::BadInput, "universe entry " + std::to_string(e.id) + " lacks a name");
        }
        if (!names.insert(e.variable_name).second) {
            fail(ErrorKind::BadInput, "duplicate variable_name '" + e.variable_name + "'");
        }
        if (!tickers.insert(e.ticker).second) {
            fail(ErrorKind::BadInput, "duplicate ticker '" + e.ticker + "'");
        }
        switch (e.role) {
            case SeriesRole::Factor: factor_columns_.push_back(i); break;
            case SeriesRole::Benchmark: benchmark_column_ = i; ++benchmarks; break;
            case SeriesRole::RiskFree: risk_free_column_ = i; ++risk_free; break;
        }
    }
    if (benchmarks != 1 || risk_free != 1) {
        fail(ErrorKind::BadInput, "universe needs exactly one Benchmark and one RiskFree entry");
    }
    if (factor_columns_.empty()) fail(ErrorKind::BadInput, "universe has no Factor entries");
}

FactorUniverse FactorUniverse::standard() {
    using A = AssetClass;
    using R = SeriesRole;
    return FactorUniverse({
        {0, "SPY", "sp500", A::EquityUS, R::Benchmark},
        {1, "VUG", "us_growth", A::EquityUS, R::Factor},
        {2, "VTV", "us_value", A::EquityUS, R::Factor},
        {3, "SPHQ", "us_quality", A::EquityUS, R::Factor},
        {4, "SPHD", "us_dividend", A::EquityUS, R::Factor},
        {5, "IYW", "us_tech", A::EquityUS, R::Factor},
        {6, "VB", "us_small", A::EquityUS, R::Factor},
        {7, "MTUM", "us_momentum", A::EquityUS, R::Factor},
        {8, "MCHI", "china_benchmark", A::EquityChina, R::Factor},
        {9, "ECNS", "china_growth", A::EquityChina, R::Factor},
        {10, "FXI", "china_value", A::EquityChina, R::Factor},
        {11, "CQQQ", "china_tech", A::EquityChina, R::Factor},
        {12, "PGJ", "china_quality", A::EquityChina, R::Factor},
        {13, "SCHO", "us_bond_shortterm", A::BondUS, R::Factor},
        {14, "TLT", "us_bond_longterm", A::BondUS, R::Factor},
        {15, "CBON", "china_bond", A::BondChina, R::Factor},
        {16, "IEO", "commodity_oil", A::Commodity, R::Factor},
        {17, "IAU", "commodity_gold", A::Commodity, R::Factor},
        {18, "DBA", "commodity_agriculture", A::Commodity, R::Factor},
        {19, "VNQ", "house_us", A::RealEstate, R::Factor},
        {20, "VIXY", "vix", A::Volatility, R::Factor},
        {21, "^IRX", "tbill", A::Rate, R::RiskFree},
    });
}

std::vector<std::string> FactorUniverse::factor_names() const {
    std::vector<std::string> names;
    names.reserve(factor_columns_.size());
    for (auto col : factor_columns_) names.push_back(entries_[col].variable_name);
    return names;
}

std::optional<std::size_t> FactorUniverse::factor_index(std::string_view variable_name) const {
    for (std::size_t k = 0; k < factor_columns_.size(); ++k) {
        if (entries_[factor_columns_[k]].variable_name == variable_name) return k;
    }
    return std::nullopt;
}

std::optional<std::size_t> FactorUniverse::column_of_ticker(std::string_view ticker) const {
    for (std::size_t j = 0; j < entries_.size(); ++j) {
        if (entries_[j].ticker == ticker) return j;
    }
    return std::nullopt;
}

FactorUniverse load_universe(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open universe file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::BadInput, "universe file '" + path.string() + "': " + e.what());
    }
    const auto& list = doc.is_object() && doc.contains("entries") ? doc["entries"] : doc;
    if (!list.is_array()) fail(ErrorKind::BadInput, "universe file must hold an array of entries");
    std::vector<UniverseEntry> entries;
    for (const auto& item : list) {
        try {
            UniverseEntry e;
            e.id = item.at("id").get<int>();
            e.ticker = item.at("ticker").get<std::string>();
            e.variable_name = item.at("variable_name").get<std::string>();
            const auto cls = parse_asset_class(item.at("asset_class").get<std::string>());
            const auto role = parse_series_role(item.at("role").get<std::string>());
            if (!cls || !role) {
                fail(ErrorKind::BadInput, "bad asset_class or role for '" + e.variable_name + "'");
            }
            e.asset_class = *cls;
            e.role = *role;
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            fail(ErrorKind::BadInput, std::string("universe entry: ") + ex.what());
        }
    }
    return FactorUniverse(std::move(entries));
}

void write_universe(const std::filesystem::path& path, const FactorUniverse& universe) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& e : universe.entries()) {
        list.push_back({{"id", e.id},
                        {"ticker", e.ticker},
                        {"variable_name", e.variable_name},
                        {"asset_class", std::string(to_string(e.asset_class))},
                        {"role", std::string(to_string(e.role))}});
    }
    write_text_file(path, list.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// ReturnPanel

ReturnPanel::ReturnPanel(std::vector<Date> dates, Eigen::MatrixXd returns, FactorUniverse universe)
    : dates_(std::move(dates)), returns_(std::move(returns)), universe_(std::move(universe)) {
    if (dates_.size() < 2) {
        fail(ErrorKind::InsufficientData, "a return panel needs at least 2 rows, got " +
                                              std::to_string(dates_.size()));
    }
    if (static_cast<std::size_t>(returns_.rows()) != dates_.size() ||
        static_cast<std::size_t>(returns_.cols()) != universe_.size()) {
        fail(ErrorKind::BadInput, "return matrix shape does not match dates x universe");
    }
    for (std::size_t t = 1; t < dates_.size(); ++t) {
        if (!(std::chrono::sys_days{dates_[t - 1]} < std::chrono::sys_days{dates_[t]})) {
            fail(ErrorKind::BadInput, "dates not strictly increasing at " + format_date(dates_[t]));
        }
    }
    for (Eigen::Index t = 0; t < returns_.rows(); ++t) {
        for (Eigen::Index j = 0; j < returns_.cols(); ++j) {
            const double r = returns_(t, j);
            if (!std::isfinite(r) || r <= -1.0) {
                fail(ErrorKind::BadInput, "invalid return for '" +
                                              universe_.entries()[static_cast<std::size_t>(j)].variable_name +
                                              "' on " + format_date(dates_[static_cast<std::size_t>(t)]));
            }
        }
    }
}

void ReturnPanel::check_window(Window window) const {
    if (window.begin > window.end || window.end > rows()) {
        fail(ErrorKind::BadInput, "window [" + std::to_string(window.begin) + ", " +
                                      std::to_string(window.end) + ") outside panel of " +
                                      std::to_string(rows()) + " rows");
    }
}

Eigen::MatrixXd ReturnPanel::factor_returns(Window window) const {
    check_window(window);
    const auto& cols = universe_.factor_columns();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(window.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) =
            returns_.col(static_cast<Eigen::Index>(cols[k]))
                .segment(static_cast<Eigen::Index>(window.begin), static_cast<Eigen::Index>(window.size()));
    }
    return out;
}

Eigen::VectorXd ReturnPanel::column(std::size_t column, Window window) const {
    check_window(window);
    if (column >= universe_.size()) fail(ErrorKind::BadInput, "column out of range");
    return returns_.col(static_cast<Eigen::Index>(column))
        .segment(static_cast<Eigen::Index>(window.begin), static_cast<Eigen::Index>(window.size()));
}

Eigen::VectorXd ReturnPanel::benchmark_returns(Window window) const {
    return column(universe_.benchmark_column(), window);
}

Eigen::VectorXd ReturnPanel::risk_free(Window window) const {
    return column(universe_.risk_free_column(), window);
}

// ---------------------------------------------------------------------------
// Price and return files

PriceTable read_price_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        fail(ErrorKind::IoError, "prices file '" + path.string() + "' does not exist");
    }
    const auto lines = read_lines(path);
    if (lines.empty()) fail(ErrorKind::InsufficientData, "prices file '" + path.string() + "' is empty");
    const auto header = split_csv_line(lines.front());
    if (header.size() < 2) fail(ErrorKind::BadInput, "prices header needs a date and ticker columns");

    PriceTable table;
    table.tickers.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        const auto date = parse_date(fields.front());
        if (!date) fail(ErrorKind::BadInput, "bad date '" + fields.front() + "' on line " + std::to_string(i + 1));
        if (!table.dates.empty() &&
            !(std::chrono::sys_days{table.dates.back()} < std::chrono::sys_days{*date})) {
            fail(ErrorKind::BadInput, "dates are not strictly increasing at line " + std::to_string(i + 1));
        }
        std::vector<double> row(table.tickers.size(), kMissing);
        for (std::size_t j = 0; j < table.tickers.size() && j + 1 < fields.size(); ++j) {
            if (is_missing_token(fields[j + 1])) continue;
            const auto value = parse_double(fields[j + 1]);
            if (!value) {
                fail(ErrorKind::BadInput, "bad price '" + fields[j + 1] + "' on line " + std::to_string(i + 1));
            }
            row[j] = *value;
        }
        table.dates.push_back(*date);
        rows.push_back(std::move(row));
    }
    table.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.tickers.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < rows[t].size(); ++j) {
            table.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
        }
    }
    return table;
}

void write_price_csv(const std::filesystem::path& path, const PriceTable& table) {
    std::ostringstream out;
    out << "date";
    for (const auto& t : table.tickers) out << ',' << t;
    out << '\n';
    for (std::size_t t = 0; t < table.dates.size(); ++t) {
        out << format_date(table.dates[t]);
        for (Eigen::Index j = 0; j < table.prices.cols(); ++j) {
            const double p = table.prices(static_cast<Eigen::Index>(t), j);
            out << ',';
            if (std::isfinite(p)) out << format_double(p);
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

double risk_free_quote_to_daily(double annual_percent) {
    return annual_percent / (100.0 * kTradingDaysPerYear);
}

ReturnPanel prices_to_panel(const PriceTable& table, const FactorUniverse& universe) {
    std::vector<std::size_t> source(universe.size());
    for (std::size_t j = 0; j < universe.size(); ++j) {
        const auto& ticker = universe.entries()[j].ticker;
        const auto it = std::find(table.tickers.begin(), table.tickers.end(), ticker);
        if (it == table.tickers.end()) {
            fail(ErrorKind::UniverseMismatch, "prices are missing column '" + ticker + "' (" +
                                                  universe.entries()[j].variable_name + ")");
        }
        source[j] = static_cast<std::size_t>(it - table.tickers.begin());
    }

    // inner join: keep only dates where every series is present
    std::vector<std::size_t> kept;
    for (std::size_t t = 0; t < table.dates.size(); ++t) {
        bool complete = true;
        for (auto s : source) {
            if (!std::isfinite(table.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)))) {
                complete = false;
                break;
            }
        }
        if (complete) kept.push_back(t);
    }
    if (kept.size() < 3) {
        fail(ErrorKind::InsufficientData, "need at least 3 complete price rows (2 returns), got " +
                                              std::to_string(kept.size()));
    }

    const auto rf = universe.risk_free_column();
    const auto rows = static_cast<Eigen::Index>(kept.size() - 1);
    Eigen::MatrixXd returns(rows, static_cast<Eigen::Index>(universe.size()));
    std::vector<Date> dates;
    dates.reserve(kept.size() - 1);
    for (std::size_t i = 1; i < kept.size(); ++i) {
        const auto prev = static_cast<Eigen::Index>(kept[i - 1]);
        const auto cur = static_cast<Eigen::Index>(kept[i]);
        dates.push_back(table.dates[kept[i]]);
        for (std::size_t j = 0; j < universe.size(); ++j) {
            const auto s = static_cast<Eigen::Index>(source[j]);
            double r = 0.0;
            if (j == rf) {
                r = risk_free_quote_to_daily(table.prices(cur, s));
            } else {
                const double p0 = table.prices(prev, s);
                const double p1 = table.prices(cur, s);
                if (p0 <= 0.0 || p1 <= 0.0) {
                    fail(ErrorKind::BadInput, "non-positive price for '" + universe.entries()[j].ticker + "'");
                }
                r = p1 / p0 - 1.0;
            }
            returns(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) = r;
        }
    }
    return ReturnPanel(std::move(dates), std::move(returns), universe);
}

ReturnPanel load_prices(const std::filesystem::path& path, const FactorUniverse& universe) {
    return prices_to_panel(read_price_csv(path), universe);
}

void write_returns_csv(const std::filesystem::path& path, const ReturnPanel& panel) {
    std::ostringstream out;
    out << "date";
    for (const auto& e : panel.universe().entries()) out << ',' << e.variable_name;
    out << '\n';
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        out << format_date(panel.dates()[t]);
        for (Eigen::Index j = 0; j < panel.returns().cols(); ++j) {
            out << ',' << format_double(panel.returns()(static_cast<Eigen::Index>(t), j));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

ReturnPanel load_returns_csv(const std::filesystem::path& path, const FactorUniverse& universe) {
    const auto lines = read_lines(path);
    if (lines.empty()) fail(ErrorKind::InsufficientData, "returns file '" + path.string() + "' is empty");
    const auto header = split_csv_line(lines.front());
    std::vector<std::size_t> source(universe.size());
    for (std::size_t j = 0; j < universe.size(); ++j) {
        const auto& name = universe.entries()[j].variable_name;
        const auto it = std::find(header.begin() + 1, header.end(), name);
        if (it == header.end()) fail(ErrorKind::UniverseMismatch, "returns file lacks column '" + name + "'");
        source[j] = static_cast<std::size_t>(it - header.begin());
    }
    std::vector<Date> dates;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        const auto date = parse_date(fields.front());
        if (!date) fail(ErrorKind::BadInput, "bad date on line " + std::to_string(i + 1));
        std::vector<double> row(universe.size());
        for (std::size_t j = 0; j < universe.size(); ++j) {
            const auto value = source[j] < fields.size() ? parse_double(fields[source[j]]) : std::nullopt;
            if (!value) fail(ErrorKind::BadInput, "missing return on line " + std::to_string(i + 1));
            row[j] = *value;
        }
        dates.push_back(*date);
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd returns(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(universe.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < universe.size(); ++j) {
            returns(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
        }
    }
    return ReturnPanel(std::move(dates), std::move(returns), universe);
}

PriceTable make_synthetic_prices(const FactorUniverse& universe, std::size_t days, std::uint64_t seed,
                                 Date start) {
    struct Profile {
        double beta;
        double drift;
        double vol;
    };
    auto profile_of = [](AssetClass c) -> Profile {
        switch (c) {
            case AssetClass::EquityUS: return {1.0, 0.0001, 0.006};
            case AssetClass::EquityChina: return {0.5, 0.0, 0.016};
            case AssetClass::BondUS: return {-0.25, -0.0001, 0.004};
            case AssetClass::BondChina: return {0.0, 0.0001, 0.003};
            case AssetClass::Commodity: return {0.4, 0.0003, 0.014};
            case AssetClass::RealEstate: return {1.0, 0.0, 0.009};
            case AssetClass::Volatility: return {-3.0, -0.002, 0.03};
            case AssetClass::Rate: return {0.0, 0.0, 0.0};
        }
        return {1.0, 0.0, 0.01};
    };

    Rng rng(seed);
    PriceTable table;
    const auto m = universe.size();
    for (const auto& e : universe.entries()) table.tickers.push_back(e.ticker);
    table.prices.resize(static_cast<Eigen::Index>(days), static_cast<Eigen::Index>(m));

    // per-series variation so factors within a class are distinguishable
    std::vector<Profile> profiles(m);
    for (std::size_t j = 0; j < m; ++j) {
        auto p = profile_of(universe.entries()[j].asset_class);
        p.beta *= 0.8 + 0.4 * rng.uniform();
        p.vol *= 0.7 + 0.6 * rng.uniform();
        p.drift += 0.0002 * (rng.uniform() - 0.5);
        profiles[j] = p;
    }

    std::chrono::sys_days day{start};
    Eigen::VectorXd level = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), 100.0);
    double rate_quote = 0.1;
    const auto bench = universe.benchmark_column();
    const auto rf = universe.risk_free_column();
    for (std::size_t t = 0; t < days; ++t) {
        while (std::chrono::weekday{day}.iso_encoding() > 5) day += std::chrono::days{1};
        table.dates.emplace_back(day);
        const double market = 0.0004 + 0.011 * rng.normal();
        for (std::size_t j = 0; j < m; ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            if (j == rf) {
                rate_quote = std::clamp(rate_quote + 0.004 + 0.02 * rng.normal(), 0.0, 5.5);
                table.prices(static_cast<Eigen::Index>(t), col) = rate_quote;
                continue;
            }
            double r = j == bench ? market + 0.001 * rng.normal()
                                  : profiles[j].drift + profiles[j].beta * market + profiles[j].vol * rng.normal();
            r = std::max(r, -0.5);
            if (t > 0) level(col) *= 1.0 + r;
            table.prices(static_cast<Eigen::Index>(t), col) = level(col);
        }
        day += std::chrono::days{1};
    }
    return table;
}

// ---------------------------------------------------------------------------
// Statistics

std::vector<SummaryRow> summary_stats(const ReturnPanel& panel) {
    std::vector<SummaryRow> out;
    const auto t = panel.rows();
    for (std::size_t j = 0; j < panel.universe().size(); ++j) {
        const Eigen::VectorXd x = panel.returns().col(static_cast<Eigen::Index>(j));
        SummaryRow row;
        row.name = panel.universe().entries()[j].variable_name;
        row.count = t;
        row.mean = x.mean();
        row.std = std::sqrt((x.array() - row.mean).square().sum() / static_cast<double>(t - 1));
        std::vector<double> sorted(x.data(), x.data() + x.size());
        std::sort(sorted.begin(), sorted.end());
        row.min = sorted.front();
        row.max = sorted.back();
        row.q25 = quantile_sorted(sorted, 0.25);
        row.q50 = quantile_sorted(sorted, 0.50);
        row.q75 = quantile_sorted(sorted, 0.75);
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd correlation_of(const Eigen::MatrixXd& columns) {
    if (columns.rows() < 2) fail(ErrorKind::InsufficientData, "correlation needs at least 2 rows");
    const Eigen::RowVectorXd mean = columns.colwise().mean();
    const Eigen::MatrixXd centered = columns.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered;
    const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    for (Eigen::Index k = 0; k < sd.size(); ++k) {
        if (!(sd(k) > 0.0)) fail(ErrorKind::DegenerateSeries, "series " + std::to_string(k) + " has zero variance");
    }
    Eigen::MatrixXd corr = cov.array() / (sd * sd.transpose()).array();
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
        corr(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = std::clamp(0.5 * (corr(i, j) + corr(j, i)), -1.0, 1.0);
            corr(i, j) = v;
            corr(j, i) = v;
        }
    }
    return corr;
}

Eigen::MatrixXd correlation_matrix(const ReturnPanel& panel) {
    return correlation_of(panel.factor_returns(panel.full()));
}

MarketCapWeights normalize_market_caps(const Eigen::VectorXd& raw) {
    if (raw.size() == 0) fail(ErrorKind::BadInput, "no market caps");
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw(i)) || raw(i) < 0.0) fail(ErrorKind::BadInput, "market caps must be non-negative");
    }
    const double total = raw.sum();
    if (!(total > 0.0)) fail(ErrorKind::BadInput, "market caps sum to zero");
    return MarketCapWeights{raw / total};
}

MarketCapWeights load_market_caps(const std::filesystem::path& path, const FactorUniverse& universe) {
    const auto lines = read_lines(path);
    Eigen::VectorXd raw = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(universe.factor_count()), kMissing);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty() || trim(lines[i]).front() == '#') continue;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() < 2) fail(ErrorKind::BadInput, "market-cap line " + std::to_string(i + 1) + " needs 2 columns");
        const auto value = parse_double(fields[1]);
        if (!value) {
            if (i == 0) continue;  // header
            fail(ErrorKind::BadInput, "bad market-cap value on line " + std::to_string(i + 1));
        }
        const auto idx = universe.factor_index(fields[0]);
        if (!idx) fail(ErrorKind::UniverseMismatch, "unknown factor '" + fields[0] + "' in market caps");
        if (*value < 0.0) fail(ErrorKind::BadInput, "negative market cap for '" + fields[0] + "'");
        raw(static_cast<Eigen::Index>(*idx)) = *value;
    }
    for (std::size_t k = 0; k < universe.factor_count(); ++k) {
        if (std::isnan(raw(static_cast<Eigen::Index>(k)))) {
            fail(ErrorKind::UniverseMismatch, "market caps missing factor '" + universe.factor_names()[k] + "'");
        }
    }
    return normalize_market_caps(raw);
}

}  // namespace factorlab
