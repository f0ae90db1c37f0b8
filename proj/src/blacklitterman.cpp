#include "factorlab/blacklitterman.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "factorlab/error.hpp"

namespace factorlab {

std::string to_string(AversionSource source) {
    switch (source) {
        case AversionSource::Empirical: return "empirical";
        case AversionSource::NearKelly: return "kelly";
        case AversionSource::Average: return "average";
        case AversionSource::Averse: return "averse";
        case AversionSource::Custom: return "custom";
    }
    return "custom";
}

RiskAversion RiskAversion::make(double lambda, AversionSource source) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        fail(ErrorKind::NonPositiveAversion, "risk aversion must be positive, got " + std::to_string(lambda));
    }
    return {lambda, source};
}

RiskAversion market_risk_aversion(const ReturnPanel& panel, Window window) {
    panel.check_window(window);
    if (window.size() < 2) fail(ErrorKind::InsufficientData, "risk aversion needs at least 2 observations");
    const Eigen::VectorXd bench = panel.benchmark_returns(window);
    const Eigen::VectorXd rf = panel.risk_free(window);
    const double mu_b = (bench - rf).mean();
    const double mean = bench.mean();
    const double var_b = (bench.array() - mean).square().sum() / static_cast<double>(bench.size() - 1);
    if (!(var_b > 0.0)) fail(ErrorKind::DegenerateSeries, "benchmark return has zero variance");
    return RiskAversion::make(mu_b / (2.0 * var_b), AversionSource::Empirical);
}

RiskAversion scenario_aversion(AversionSource kind) {
    switch (kind) {
        case AversionSource::NearKelly: return {0.005, kind};
        case AversionSource::Average: return {1.12, kind};
        case AversionSource::Averse: return {3.0, kind};
        case AversionSource::Empirical:
        case AversionSource::Custom: break;
    }
    fail(ErrorKind::BadInput, "scenario '" + to_string(kind) + "' has no fixed risk aversion");
}

ViewSpec ViewSpec::absolute(std::string factor, double q) {
    ViewSpec v;
    v.kind = Kind::Absolute;
    v.longs = {{std::move(factor), 1.0}};
    v.q = q;
    return v;
}

ViewSpec ViewSpec::relative(std::vector<std::pair<std::string, double>> longs,
                            std::vector<std::pair<std::string, double>> shorts, double q) {
    ViewSpec v;
    v.kind = Kind::Relative;
    v.longs = std::move(longs);
    v.shorts = std::move(shorts);
    v.q = q;
    return v;
}

ViewSpec ViewSpec::global(std::vector<std::pair<std::string, double>> longs,
                          std::vector<std::pair<std::string, double>> shorts, double q) {
    ViewSpec v = relative(std::move(longs), std::move(shorts), q);
    v.kind = Kind::Global;
    return v;
}

ViewSet ViewSet::empty(std::size_t n, double tau) {
    ViewSet v;
    v.p = Eigen::MatrixXd::Zero(0, static_cast<Eigen::Index>(n));
    v.q = Eigen::VectorXd::Zero(0);
    v.omega = Eigen::MatrixXd::Zero(0, 0);
    v.tau = tau;
    v.fixed_omega = Eigen::VectorXd::Zero(0);
    return v;
}

ViewSet build_views(const std::vector<ViewSpec>& specs, const FactorUniverse& universe, double tau) {
    if (!(tau > 0.0)) fail(ErrorKind::BadInput, "tau must be positive");
    const auto n = universe.factor_count();
    ViewSet views = ViewSet::empty(n, tau);
    const auto k = static_cast<Eigen::Index>(specs.size());
    views.p = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(n));
    views.q.resize(k);
    views.omega = Eigen::MatrixXd::Zero(k, k);
    views.fixed_omega = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());

    auto index_of = [&](const std::string& name) {
        const auto idx = universe.factor_index(name);
        if (!idx) fail(ErrorKind::UniverseMismatch, "view references unknown factor '" + name + "'");
        return static_cast<Eigen::Index>(*idx);
    };

    for (Eigen::Index row = 0; row < k; ++row) {
        const auto& spec = specs[static_cast<std::size_t>(row)];
        for (const auto& [name, weight] : spec.longs) views.p(row, index_of(name)) += weight;
        for (const auto& [name, weight] : spec.shorts) views.p(row, index_of(name)) -= weight;
        views.q(row) = spec.q;
        if (spec.omega) {
            if (!(*spec.omega > 0.0)) fail(ErrorKind::BadInput, "view variance must be positive");
            views.fixed_omega(row) = *spec.omega;
        }
        const double row_sum = views.p.row(row).sum();
        switch (spec.kind) {
            case ViewSpec::Kind::Absolute:
                if (spec.longs.size() != 1 || !spec.shorts.empty() || std::abs(row_sum - 1.0) > 1e-12) {
                    fail(ErrorKind::BadInput, "an absolute view names exactly one factor with weight 1");
                }
                break;
            case ViewSpec::Kind::Relative:
                if (spec.longs.empty() || spec.shorts.empty() || std::abs(row_sum) > 1e-12) {
                    fail(ErrorKind::BadInput, "relative view weights must net to zero");
                }
                break;
            case ViewSpec::Kind::Global:
                if (views.p.row(row).cwiseAbs().sum() == 0.0) {
                    fail(ErrorKind::BadInput, "global view has no exposure");
                }
                break;
        }
    }
    return views;
}

namespace {

std::vector<std::pair<std::string, double>> parse_legs(const nlohmann::json& node) {
    std::vector<std::pair<std::string, double>> legs;
    if (node.is_null()) return legs;
    if (node.is_string()) {
        legs.emplace_back(node.get<std::string>(), 1.0);
    } else if (node.is_array()) {
        // bare names share the leg equally
        const double w = node.empty() ? 0.0 : 1.0 / static_cast<double>(node.size());
        for (const auto& name : node) legs.emplace_back(name.get<std::string>(), w);
    } else if (node.is_object()) {
        for (const auto& [name, w] : node.items()) legs.emplace_back(name, w.get<double>());
    } else {
        fail(ErrorKind::BadInput, "view legs must be a name, a list of names, or a name->weight object");
    }
    return legs;
}

nlohmann::ordered_json legs_json(const std::vector<std::pair<std::string, double>>& legs) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (const auto& [name, w] : legs) obj[name] = w;
    return obj;
}

}  // namespace

std::vector<ViewSpec> load_view_specs(const std::filesystem::path& path, double* tau) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open view file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::BadInput, "view file '" + path.string() + "': " + e.what());
    }
    const auto& list = doc.is_object() ? doc.value("views", nlohmann::json::array()) : doc;
    if (tau && doc.is_object() && doc.contains("tau")) *tau = doc["tau"].get<double>();
    std::vector<ViewSpec> specs;
    try {
        for (const auto& item : list) {
            ViewSpec spec;
            const auto type = item.at("type").get<std::string>();
            if (type == "absolute") {
                spec.kind = ViewSpec::Kind::Absolute;
                spec.longs = parse_legs(item.contains("factor") ? item["factor"] : item.value("longs", nlohmann::json()));
            } else if (type == "relative" || type == "global") {
                spec.kind = type == "relative" ? ViewSpec::Kind::Relative : ViewSpec::Kind::Global;
                spec.longs = parse_legs(item.value("longs", nlohmann::json()));
                spec.shorts = parse_legs(item.value("shorts", nlohmann::json()));
            } else {
                fail(ErrorKind::BadInput, "unknown view type '" + type + "'");
            }
            spec.q = item.at("q").get<double>();
            if (item.contains("omega") && !item["omega"].is_null()) spec.omega = item["omega"].get<double>();
            specs.push_back(std::move(spec));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::BadInput, std::string("view file: ") + e.what());
    }
    return specs;
}

void write_view_specs(const std::filesystem::path& path, const std::vector<ViewSpec>& specs, double tau) {
    nlohmann::ordered_json doc;
    doc["tau"] = tau;
    doc["views"] = nlohmann::ordered_json::array();
    for (const auto& s : specs) {
        nlohmann::ordered_json item;
        item["type"] = s.kind == ViewSpec::Kind::Absolute ? "absolute"
                       : s.kind == ViewSpec::Kind::Relative ? "relative"
                                                            : "global";
        item["longs"] = legs_json(s.longs);
        if (!s.shorts.empty()) item["shorts"] = legs_json(s.shorts);
        item["q"] = s.q;
        if (s.omega) item["omega"] = *s.omega;
        doc["views"].push_back(std::move(item));
    }
    write_text_file(path, doc.dump(2) + "\n");
}

std::vector<ViewSpec> example_view_specs() {
    return {
        ViewSpec::absolute("us_momentum", 0.01),
        ViewSpec::relative({{"us_growth", 1.0}}, {{"us_value", 1.0}}, 0.01),
        ViewSpec::global({{"china_benchmark", 1.0 / 5.0},
                          {"china_growth", 1.0 / 5.0},
                          {"china_value", 1.0 / 5.0},
                          {"china_tech", 1.0 / 5.0},
                          {"china_quality", 1.0 / 5.0},
                          {"us_bond_longterm", 1.0}},
                         {}, 0.02),
    };
}

Eigen::MatrixXd default_omega(const ViewSet& views, const Eigen::MatrixXd& sigma) {
    const auto k = views.p.rows();
    if (views.p.cols() != sigma.rows()) fail(ErrorKind::BadInput, "view matrix does not match covariance size");
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const bool fixed = views.fixed_omega.size() == k && !std::isnan(views.fixed_omega(i));
        omega(i, i) = fixed ? views.fixed_omega(i)
                            : views.tau * views.p.row(i).dot(sigma * views.p.row(i).transpose());
    }
    return omega;
}

ViewSet with_default_omega(ViewSet views, const Eigen::MatrixXd& sigma) {
    views.omega = default_omega(views, sigma);
    return views;
}

Eigen::VectorXd equilibrium_prior(const Eigen::VectorXd& weights, const Eigen::MatrixXd& sigma,
                                  const RiskAversion& lambda) {
    if (weights.size() != sigma.rows()) fail(ErrorKind::BadInput, "weights do not match covariance size");
    return 2.0 * lambda.lambda * (sigma * weights);
}

Eigen::VectorXd posterior_returns(const Eigen::VectorXd& prior, const Eigen::MatrixXd& sigma, const ViewSet& views) {
    const auto n = sigma.rows();
    if (prior.size() != n) fail(ErrorKind::BadInput, "prior does not match covariance size");
    if (!(views.tau > 0.0)) fail(ErrorKind::BadInput, "tau must be positive");
    const auto k = views.p.rows();
    if (k == 0) return prior;
    if (views.p.cols() != n || views.q.size() != k || views.omega.rows() != k || views.omega.cols() != k) {
        fail(ErrorKind::BadInput, "view dimensions are inconsistent");
    }

    // (tau S)^-1 via the checked SPD solve; both right-hand sides at once
    const Eigen::MatrixXd scaled = views.tau * sigma;
    Eigen::MatrixXd rhs(n, n + 1);
    rhs.leftCols(n) = Eigen::MatrixXd::Identity(n, n);
    rhs.col(n) = prior;
    const Eigen::MatrixXd solved = solve_spd(scaled, rhs);
    const Eigen::MatrixXd prior_precision = solved.leftCols(n);

    Eigen::LDLT<Eigen::MatrixXd> omega_ldlt(views.omega);
    if (omega_ldlt.info() != Eigen::Success || !(views.omega.diagonal().minCoeff() > 0.0)) {
        fail(ErrorKind::SingularCovariance, "view uncertainty matrix is not invertible");
    }
    const Eigen::MatrixXd omega_inv_p = omega_ldlt.solve(views.p);
    const Eigen::VectorXd omega_inv_q = omega_ldlt.solve(views.q);

    Eigen::MatrixXd precision = prior_precision + views.p.transpose() * omega_inv_p;
    precision = 0.5 * (precision + precision.transpose());
    const Eigen::VectorXd b = solved.col(n) + views.p.transpose() * omega_inv_q;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(precision);
    if (ldlt.info() != Eigen::Success) fail(ErrorKind::SingularCovariance, "posterior precision is singular");
    return ldlt.solve(b);
}

WeightVector posterior_weights(const Eigen::VectorXd& mu_bl, const Eigen::MatrixXd& sigma, const RiskAversion& lambda) {
    if (!(lambda.lambda > 0.0)) fail(ErrorKind::NonPositiveAversion, "risk aversion must be positive");
    const Eigen::VectorXd x = solve_spd(sigma, mu_bl);
    return {x / (2.0 * lambda.lambda), {SchemeKind::BlackLitterman, lambda.lambda}, false};
}

BLResult bl_pipeline(const WeightVector& prior_weights, const Eigen::MatrixXd& sigma, const ViewSet& views,
                     const RiskAversion& prior_lambda, const RiskAversion& investor_lambda) {
    BLResult out;
    out.prior_weights = prior_weights.weights;
    out.prior_lambda = prior_lambda;
    out.lambda_used = investor_lambda;
    out.prior_pi = equilibrium_prior(prior_weights.weights, sigma, prior_lambda);
    out.posterior_mu = posterior_returns(out.prior_pi, sigma, views);
    out.posterior_weights = posterior_weights(out.posterior_mu, sigma, investor_lambda);
    out.active_weights = out.posterior_weights.weights - prior_weights.weights;
    return out;
}

}  // namespace factorlab
