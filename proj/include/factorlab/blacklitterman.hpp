#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "factorlab/allocate.hpp"
#include "factorlab/covariance.hpp"
#include "factorlab/marketdata.hpp"

namespace factorlab {

enum class AversionSource { Empirical, NearKelly, Average, Averse, Custom };

std::string to_string(AversionSource source);

struct RiskAversion {
    double lambda = 1.0;
    AversionSource source = AversionSource::Custom;

    /// NonPositiveAversion unless lambda > 0.
    static RiskAversion make(double lambda, AversionSource source);
};

/// Benchmark mean daily excess return over twice its daily variance.
/// NonPositiveAversion if the benchmark earned no excess return.
RiskAversion market_risk_aversion(const ReturnPanel& panel, Window window);

/// Fixed investor profiles: NearKelly 0.005, Average 1.12, Averse 3.0.
/// Empirical needs a panel and is rejected here; use market_risk_aversion.
RiskAversion scenario_aversion(AversionSource kind);

/// A view as written by the user; factors are referenced by variable_name.
struct ViewSpec {
    enum class Kind { Absolute, Relative, Global };
    Kind kind = Kind::Absolute;
    std::vector<std::pair<std::string, double>> longs;
    std::vector<std::pair<std::string, double>> shorts;
    double q = 0.0;
    std::optional<double> omega;  // fixed view variance; default is proportional to the prior

    static ViewSpec absolute(std::string factor, double q);
    static ViewSpec relative(std::vector<std::pair<std::string, double>> longs,
                             std::vector<std::pair<std::string, double>> shorts, double q);
    static ViewSpec global(std::vector<std::pair<std::string, double>> longs,
                           std::vector<std::pair<std::string, double>> shorts, double q);
};

/// P (K x N), Q (K), diagonal Omega (K x K) and tau. K may be 0.
struct ViewSet {
    Eigen::MatrixXd p;
    Eigen::VectorXd q;
    Eigen::MatrixXd omega;
    double tau = 1.0;
    /// Per-view fixed variance, NaN where Omega follows the prior.
    Eigen::VectorXd fixed_omega;

    std::size_t count() const { return static_cast<std::size_t>(q.size()); }
    static ViewSet empty(std::size_t n, double tau);
};

/// Encodes the specs as rows of P. Omega is left for default_omega.
ViewSet build_views(const std::vector<ViewSpec>& specs, const FactorUniverse& universe, double tau);

/// Reads a JSON view file: {"tau": t, "views": [{"type": "absolute|relative|global",
/// "longs": {...} | [...], "shorts": ..., "q": x, "omega": optional}]}.
std::vector<ViewSpec> load_view_specs(const std::filesystem::path& path, double* tau = nullptr);
void write_view_specs(const std::filesystem::path& path, const std::vector<ViewSpec>& specs, double tau);

/// The three-view example: us_momentum +1%, us_growth over us_value by 1%, and
/// the printed global row (1/5 on each Chinese equity factor plus 1 on
/// us_bond_longterm) at 2%. Row 3 is kept exactly as printed.
std::vector<ViewSpec> example_view_specs();

/// diag(P (tau S) P'), with any fixed per-view variances substituted.
Eigen::MatrixXd default_omega(const ViewSet& views, const Eigen::MatrixXd& sigma);
/// Same views with omega recomputed against sigma.
ViewSet with_default_omega(ViewSet views, const Eigen::MatrixXd& sigma);

/// pi = 2 lambda S w.
Eigen::VectorXd equilibrium_prior(const Eigen::VectorXd& weights, const Eigen::MatrixXd& sigma,
                                  const RiskAversion& lambda);

/// [(tS)^-1 + P' O^-1 P]^-1 [(tS)^-1 pi + P' O^-1 Q]; returns pi itself for K = 0.
Eigen::VectorXd posterior_returns(const Eigen::VectorXd& prior, const Eigen::MatrixXd& sigma, const ViewSet& views);

/// w = S^-1 mu / (2 lambda), unconstrained.
WeightVector posterior_weights(const Eigen::VectorXd& mu_bl, const Eigen::MatrixXd& sigma, const RiskAversion& lambda);

struct BLResult {
    Eigen::VectorXd prior_pi;
    Eigen::VectorXd posterior_mu;
    WeightVector posterior_weights;
    RiskAversion lambda_used;      // applied to the posterior weights
    RiskAversion prior_lambda;     // used for reverse optimization
    Eigen::VectorXd prior_weights;
    Eigen::VectorXd active_weights;  // posterior - prior
};

/// Reverse-optimizes pi from the prior weights with prior_lambda, blends in the
/// views, and sizes the posterior with investor_lambda.
BLResult bl_pipeline(const WeightVector& prior_weights, const Eigen::MatrixXd& sigma, const ViewSet& views,
                     const RiskAversion& prior_lambda, const RiskAversion& investor_lambda);

}  // namespace factorlab
