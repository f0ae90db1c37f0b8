#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>

#include "factorlab/covariance.hpp"
#include "factorlab/marketdata.hpp"

namespace factorlab {

enum class SchemeKind {
    Equal,
    MarketCap,
    ImpliedBeta,
    GMV,
    MaxSharpe,
    Markowitz,
    BlackLitterman,
    Contrarian,
};

/// A weight-allocation scheme; lambda is meaningful for Markowitz and
/// BlackLitterman only.
struct Scheme {
    SchemeKind kind = SchemeKind::Equal;
    double lambda = 0.0;

    /// Stable machine name, e.g. "markowitz".
    std::string name() const;
    /// Column title as in the weights table, e.g. "Markowitz Weights with lambda=2".
    std::string title() const;

    bool operator==(const Scheme&) const = default;
};

std::optional<SchemeKind> parse_scheme_kind(std::string_view name);

struct WeightVector {
    Eigen::VectorXd weights;
    Scheme scheme;
    bool constrained = false;
};

struct SolverReport {
    int iterations = 0;
    double final_gradient_norm = 0.0;
    bool converged = false;
};

WeightVector equal_weights(std::size_t n);
WeightVector market_cap_weights(const MarketCapWeights& caps);

/// w = S^-1 1 / (1' S^-1 1).
WeightVector gmv_closed_form(const Eigen::MatrixXd& sigma);
/// w = S^-1 mu / (1' S^-1 mu); DegenerateTangency unless 1' S^-1 mu > 1e-12.
WeightVector max_sharpe_closed_form(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu);
/// Fully invested maximizer of w'mu - lambda w'S w.
WeightVector markowitz_closed_form(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu, double lambda);

/// Euclidean projection onto {w : 0 <= w_i <= 1, sum w = 1}. Sorts the 2N
/// breakpoints of the clipped-sum function once, so O(N log N).
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y);

struct ConstrainedObjective {
    enum class Kind { GMV, MaxSharpe, Markowitz };
    Kind kind = Kind::GMV;
    double lambda = 0.0;

    static ConstrainedObjective gmv() { return {Kind::GMV, 0.0}; }
    static ConstrainedObjective max_sharpe() { return {Kind::MaxSharpe, 0.0}; }
    static ConstrainedObjective markowitz(double lambda) { return {Kind::Markowitz, lambda}; }
};

struct SolverOptions {
    double tolerance = 1e-8;
    int max_iterations = 10000;
};

/// Spectral projected gradient over the capped simplex. The objective is
/// divided by trace(S)/N before solving so the stopping rule is independent of
/// the units of S; the reported gradient norm refers to that scaled problem.
std::pair<WeightVector, SolverReport> solve_constrained(ConstrainedObjective objective,
                                                        const Eigen::MatrixXd& sigma,
                                                        const Eigen::VectorXd& mu,
                                                        SolverOptions options = {});

/// Regression betas of factor excess returns on benchmark excess returns.
Eigen::VectorXd regression_betas(const ReturnPanel& panel, Window window);
/// w = s2 S^-1 beta with s2 = 1 / (beta' S^-1 beta); no constraints.
WeightVector implied_beta_from_betas(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& beta);
WeightVector implied_beta_weights(const Eigen::MatrixXd& sigma, const ReturnPanel& panel, Window window);

/// Objective values as used by the solver, on the original (unscaled) inputs.
double portfolio_variance(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& w);
double sharpe_ratio(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu, const Eigen::VectorXd& w);
double markowitz_utility(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu, double lambda,
                         const Eigen::VectorXd& w);

/// LDLT solve of S x = b after checking S is symmetric positive definite with
/// condition number below 1e12; SingularCovariance otherwise.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& rhs);

}  // namespace factorlab
