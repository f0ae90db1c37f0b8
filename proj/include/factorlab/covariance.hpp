#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include "factorlab/marketdata.hpp"

namespace factorlab {

enum class EstimatorKind { Sample, Shrunk };

std::string to_string(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator(std::string_view text);

struct CovEstimate {
    Eigen::MatrixXd sigma;  // per-day return variance units
    EstimatorKind estimator = EstimatorKind::Sample;
    double intensity = 0.0;  // shrinkage weight on the target; 0 for Sample
    Date start;
    Date end;

    /// Same estimate with sigma scaled by a positive multiplier.
    CovEstimate scaled(double multiplier) const;
};

struct MomentEstimate {
    Eigen::VectorXd mu;  // mean daily excess return per factor
    double rf_mean = 0.0;
};

/// Unbiased (T-1) covariance of the factor columns over the window.
CovEstimate sample_cov(const ReturnPanel& panel, Window window);

/// Constant-correlation target: sample variances on the diagonal, the average
/// pairwise sample correlation applied to the sample standard deviations off it.
Eigen::MatrixXd constant_correlation_target(const Eigen::MatrixXd& sample);

/// Ledoit-Wolf analytic intensity for the constant-correlation target,
/// clamped to [0, 1]. Input is a T x N block of observations.
double ledoit_wolf_intensity(const Eigen::MatrixXd& observations);

/// delta * F + (1 - delta) * S with delta either supplied or estimated.
CovEstimate shrunk_cov(const ReturnPanel& panel, Window window,
                       std::optional<double> intensity = std::nullopt);

CovEstimate estimate_cov(const ReturnPanel& panel, Window window, EstimatorKind kind);

MomentEstimate mean_excess(const ReturnPanel& panel, Window window);

/// N x N matrix as CSV with factor names on the header row and first column.
std::string matrix_csv(const Eigen::MatrixXd& matrix, const std::vector<std::string>& names);

}  // namespace factorlab
