#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "factorlab/allocate.hpp"
#include "factorlab/blacklitterman.hpp"
#include "factorlab/covariance.hpp"
#include "factorlab/marketdata.hpp"
#include "factorlab/viewgen.hpp"

namespace factorlab {

/// One holding period of one scheme.
struct RebalanceRecord {
    std::size_t round = 0;
    Date date;                  // first invested day
    std::string scheme;         // Scheme::name(), unique within a ledger
    Eigen::VectorXd weights;
    bool constrained = false;
    std::size_t period_days = 0;
    double realized_period_return = 0.0;  // w' (per-factor cumulative return), floored at -1
    double rf_period_return = 0.0;
    std::optional<std::size_t> view_factor;
};

/// Row ranges and dates behind one rebalance. Label dates are absent when the
/// round was not fitted to labels (static mode).
struct RoundMeta {
    std::size_t index = 0;
    Window training;
    Window estimation;
    Window invested;
    Date training_first;
    std::optional<Date> label_last;
    Date estimation_first;
    Date estimation_last;
    Date invested_first;
    Date invested_last;
};

struct BacktestLedger {
    std::string mode;
    std::vector<std::string> factors;
    std::vector<RoundMeta> rounds;
    std::vector<RebalanceRecord> records;

    /// Scheme names in order of first appearance.
    std::vector<std::string> schemes() const;
    std::vector<const RebalanceRecord*> records_for(const std::string& scheme) const;
    /// 1.0 followed by the wealth after each of the scheme's records.
    std::vector<double> wealth(const std::string& scheme) const;
};

/// Inputs shared by every scheme when weights are computed on one window.
struct AllocationContext {
    EstimatorKind estimator = EstimatorKind::Sample;
    std::optional<MarketCapWeights> caps;
    std::optional<ViewSet> views;  // BlackLitterman only; omega is recomputed
    std::optional<RiskAversion> bl_lambda;  // default: market-implied over the window
    SolverOptions solver;
};

/// Weights of one scheme over a window. GMV, MaxSharpe and Markowitz use the
/// box-constrained solver; the BL prior is the market-cap vector.
WeightVector allocate_scheme(const ReturnPanel& panel, Window window, const Scheme& scheme,
                             const AllocationContext& context);

/// Scheme columns of the standard weights table, in display order.
std::vector<Scheme> default_static_schemes();

/// Weights from the full window held fixed, one record per day.
BacktestLedger run_static(const ReturnPanel& panel, const std::vector<Scheme>& schemes,
                          const AllocationContext& context);

struct DynamicOptions {
    ViewModelConfig model;
    double lambda = 2.0;
    EstimatorKind estimator = EstimatorKind::Sample;
    double tau = 1.0 / 252.0;
    SolverOptions solver;
};

/// Rounds that fit in a panel of `rows` rows (0 if none).
std::size_t dynamic_round_count(std::size_t rows, const ViewModelConfig& config);

/// Rolling protocol: per round, fit the view generator on the training rows,
/// estimate every scheme on the latest sequence_length rows, blend the view
/// into the constrained Markowitz prior, and hold for `window` rows.
BacktestLedger run_dynamic_bl(const ReturnPanel& panel, const DynamicOptions& options,
                              const ViewGenerator& generator);

/// Weekly (ISO week) rotation into the 5 factors with the lowest return over
/// the previous week, equally weighted.
BacktestLedger run_contrarian(const ReturnPanel& panel, std::size_t picks = 5);

/// First row index of each ISO week present in the panel, plus rows().
std::vector<std::size_t> week_starts(const std::vector<Date>& dates);

/// Indices of the `picks` smallest values, ties by lower index.
std::vector<std::size_t> bottom_k(const Eigen::VectorXd& values, std::size_t picks);

struct SchemeSummary {
    std::string scheme;
    std::size_t periods = 0;
    double cumulative_return = 0.0;
    double annualized_vol = 0.0;
    double max_drawdown = 0.0;
    std::optional<double> sharpe;  // null when excess returns have no dispersion
};

std::vector<SchemeSummary> ledger_report(const BacktestLedger& ledger);
std::string ledger_report_json(const std::vector<SchemeSummary>& summary);

/// One row per record; doubles are written shortest-round-trip.
std::string ledger_csv(const BacktestLedger& ledger);
/// Records nested under their rounds.
std::string ledger_json(const BacktestLedger& ledger);
BacktestLedger parse_ledger_json(const std::string& text);
BacktestLedger load_ledger_json(const std::filesystem::path& path);

struct AuditFinding {
    std::size_t round = 0;
    std::string message;
};

/// Every labelled round must have its last label date strictly before its
/// first invested date, and invested windows must follow estimation windows.
std::vector<AuditFinding> audit_no_lookahead(const BacktestLedger& ledger);

}  // namespace factorlab
