#include "factorlab/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "factorlab/error.hpp"

namespace factorlab {

WeightPathSet weight_paths(const BacktestLedger& ledger, double threshold) {
    WeightPathSet out;
    for (const auto& name : ledger.schemes()) {
        WeightPath path;
        path.scheme = name;
        for (const auto* r : ledger.records_for(name)) {
            path.dates.push_back(r->date);
            path.weights.push_back(r->weights);
        }
        out.paths.push_back(std::move(path));
    }
    std::map<std::chrono::sys_days, std::string> corners;
    for (const auto& r : ledger.records) {
        const std::chrono::sys_days day{r.date};
        auto& names = corners[day];
        if (r.weights.size() > 0 && r.weights.maxCoeff() > threshold &&
            names.find(r.scheme) == std::string::npos) {
            names += names.empty() ? r.scheme : "," + r.scheme;
        }
    }
    for (const auto& [day, names] : corners) {
        out.dates.emplace_back(day);
        out.corner.push_back(!names.empty());
        out.corner_schemes.push_back(names);
    }
    return out;
}

PriorFunction make_prior_function(const Scheme& scheme, const Eigen::VectorXd& mu,
                                  const std::optional<MarketCapWeights>& caps, SolverOptions solver) {
    switch (scheme.kind) {
        case SchemeKind::GMV:
            return [solver](const Eigen::MatrixXd& s) {
                return solve_constrained(ConstrainedObjective::gmv(), s, Eigen::VectorXd::Zero(s.rows()), solver).first;
            };
        case SchemeKind::Markowitz:
            if (!(scheme.lambda > 0.0)) fail(ErrorKind::BadInput, "Markowitz prior needs a positive lambda");
            return [mu, solver, lambda = scheme.lambda](const Eigen::MatrixXd& s) {
                return solve_constrained(ConstrainedObjective::markowitz(lambda), s, mu, solver).first;
            };
        case SchemeKind::MarketCap:
            if (!caps) fail(ErrorKind::MissingInput, "market-cap prior needs market-cap weights");
            return [w = market_cap_weights(*caps)](const Eigen::MatrixXd&) { return w; };
        case SchemeKind::Equal:
            return [](const Eigen::MatrixXd& s) { return equal_weights(static_cast<std::size_t>(s.rows())); };
        default: break;
    }
    fail(ErrorKind::BadInput, "scheme '" + scheme.name() + "' cannot serve as a sweep prior");
}

std::vector<double> default_multipliers() {
    std::vector<double> m;
    for (int k = 0; k <= 20; ++k) m.push_back(0.25 * std::pow(16.0, k / 20.0));
    return m;
}

VolSweepResult volatility_sweep(const PriorFunction& prior, const Eigen::MatrixXd& sigma, const ViewSet& views,
                                const RiskAversion& lambda, const std::vector<double>& multipliers,
                                OmegaMode mode) {
    for (std::size_t i = 0; i < multipliers.size(); ++i) {
        if (!(multipliers[i] > 0.0)) fail(ErrorKind::BadInput, "volatility multipliers must be positive");
        if (i > 0 && !(multipliers[i] > multipliers[i - 1])) {
            fail(ErrorKind::BadInput, "volatility multipliers must be strictly increasing");
        }
    }
    const Eigen::MatrixXd base_omega = default_omega(views, sigma);
    VolSweepResult out;
    out.multipliers = multipliers;
    for (double m : multipliers) {
        const Eigen::MatrixXd scaled = m * sigma;
        const WeightVector w = prior(scaled);
        ViewSet v = views;
        v.omega = mode == OmegaMode::Recompute ? default_omega(views, scaled) : base_omega;
        const BLResult bl = bl_pipeline(w, scaled, v, lambda, lambda);
        out.prior_weights.push_back(w.weights);
        out.posterior_weights.push_back(bl.posterior_weights.weights);
    }
    return out;
}

std::string sweep_csv(const VolSweepResult& result, const std::vector<std::string>& factors) {
    std::ostringstream out;
    out << "multiplier,series";
    for (const auto& f : factors) out << ',' << f;
    out << '\n';
    for (std::size_t i = 0; i < result.multipliers.size(); ++i) {
        for (const auto* series : {&result.prior_weights, &result.posterior_weights}) {
            out << format_double(result.multipliers[i]) << ','
                << (series == &result.prior_weights ? "prior" : "posterior");
            const auto& w = (*series)[i];
            for (Eigen::Index j = 0; j < w.size(); ++j) out << ',' << format_double(w(j));
            out << '\n';
        }
    }
    return out.str();
}

ShrinkageImpact shrinkage_impact(const ReturnPanel& panel, Window window, const std::vector<Scheme>& schemes,
                                 const AllocationContext& context) {
    const CovEstimate sample = estimate_cov(panel, window, EstimatorKind::Sample);
    const CovEstimate shrunk = estimate_cov(panel, window, EstimatorKind::Shrunk);
    ShrinkageImpact out;
    out.frobenius = (shrunk.sigma - sample.sigma).norm();
    out.relative_frobenius = out.frobenius / sample.sigma.norm();
    out.intensity = shrunk.intensity;
    AllocationContext a = context;
    AllocationContext b = context;
    a.estimator = EstimatorKind::Sample;
    b.estimator = EstimatorKind::Shrunk;
    for (const auto& s : schemes) {
        const auto wa = allocate_scheme(panel, window, s, a).weights;
        const auto wb = allocate_scheme(panel, window, s, b).weights;
        out.max_weight_difference = std::max(out.max_weight_difference, (wa - wb).cwiseAbs().maxCoeff());
    }
    return out;
}

}  // namespace factorlab
