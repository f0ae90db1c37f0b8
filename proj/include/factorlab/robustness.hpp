#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "factorlab/allocate.hpp"
#include "factorlab/backtest.hpp"
#include "factorlab/blacklitterman.hpp"

namespace factorlab {

struct WeightPath {
    std::string scheme;
    std::vector<Date> dates;
    std::vector<Eigen::VectorXd> weights;
};

struct WeightPathSet {
    std::vector<WeightPath> paths;
    std::vector<Date> dates;           // rebalance dates, ascending
    std::vector<bool> corner;          // per date: some scheme put > threshold on one factor
    std::vector<std::string> corner_schemes;  // per date, comma-joined
};

inline constexpr double kCornerThreshold = 0.9;

/// Regroups ledger records by scheme and flags corner solutions per date.
WeightPathSet weight_paths(const BacktestLedger& ledger, double threshold = kCornerThreshold);

/// Prior weights as a function of the (scaled) covariance.
using PriorFunction = std::function<WeightVector(const Eigen::MatrixXd& sigma)>;

/// GMV and Markowitz re-solve on the scaled covariance; MarketCap and Equal
/// ignore it.
PriorFunction make_prior_function(const Scheme& scheme, const Eigen::VectorXd& mu,
                                  const std::optional<MarketCapWeights>& caps, SolverOptions solver = {});

enum class OmegaMode { Recompute, Fixed };

struct VolSweepResult {
    std::vector<double> multipliers;
    std::vector<Eigen::VectorXd> prior_weights;
    std::vector<Eigen::VectorXd> posterior_weights;
};

/// 21 log-spaced multipliers from 0.25 to 4.
std::vector<double> default_multipliers();

/// For each multiplier m: prior from m*S, pi from that prior, posterior on m*S.
/// Omega follows m*S in Recompute mode and stays at its m = 1 value in Fixed mode.
VolSweepResult volatility_sweep(const PriorFunction& prior, const Eigen::MatrixXd& sigma, const ViewSet& views,
                                const RiskAversion& lambda, const std::vector<double>& multipliers,
                                OmegaMode mode = OmegaMode::Recompute);

/// Columns: multiplier, series (prior|posterior), one per factor.
std::string sweep_csv(const VolSweepResult& result, const std::vector<std::string>& factors);

struct ShrinkageImpact {
    double frobenius = 0.0;           // ||S_shrunk - S_sample||_F
    double relative_frobenius = 0.0;  // divided by ||S_sample||_F
    double intensity = 0.0;
    double max_weight_difference = 0.0;  // over the compared schemes and factors
};

ShrinkageImpact shrinkage_impact(const ReturnPanel& panel, Window window, const std::vector<Scheme>& schemes,
                                 const AllocationContext& context);

}  // namespace factorlab
