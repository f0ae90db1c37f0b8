#include "factorlab/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "factorlab/error.hpp"

namespace factorlab {

namespace {

using json = nlohmann::ordered_json;

double period_return(const Eigen::VectorXd& weights, const Eigen::VectorXd& factor_cumulative) {
    // cash not allocated by the weights earns nothing; losses stop at the stake
    return std::max(-1.0, weights.dot(factor_cumulative));
}

double compound(const Eigen::VectorXd& daily) { return (1.0 + daily.array()).prod() - 1.0; }

RoundMeta make_meta(const ReturnPanel& panel, std::size_t index, Window training, Window estimation,
                    Window invested, std::optional<std::size_t> label_end) {
    const auto& d = panel.dates();
    RoundMeta m;
    m.index = index;
    m.training = training;
    m.estimation = estimation;
    m.invested = invested;
    m.training_first = d[training.begin];
    if (label_end) m.label_last = d[*label_end - 1];
    m.estimation_first = d[estimation.begin];
    m.estimation_last = d[estimation.end - 1];
    m.invested_first = d[invested.begin];
    m.invested_last = d[invested.end - 1];
    return m;
}

RebalanceRecord make_record(std::size_t round, Date date, const WeightVector& w, const Eigen::VectorXd& cumulative,
                            double rf, std::size_t days) {
    RebalanceRecord r;
    r.round = round;
    r.date = date;
    r.scheme = w.scheme.name();
    r.weights = w.weights;
    r.constrained = w.constrained;
    r.period_days = days;
    r.realized_period_return = period_return(w.weights, cumulative);
    r.rf_period_return = rf;
    return r;
}

}  // namespace

std::vector<std::string> BacktestLedger::schemes() const {
    std::vector<std::string> out;
    for (const auto& r : records) {
        if (std::find(out.begin(), out.end(), r.scheme) == out.end()) out.push_back(r.scheme);
    }
    return out;
}

std::vector<const RebalanceRecord*> BacktestLedger::records_for(const std::string& scheme) const {
    std::vector<const RebalanceRecord*> out;
    for (const auto& r : records) {
        if (r.scheme == scheme) out.push_back(&r);
    }
    return out;
}

std::vector<double> BacktestLedger::wealth(const std::string& scheme) const {
    std::vector<double> w{1.0};
    for (const auto* r : records_for(scheme)) w.push_back(w.back() * (1.0 + r->realized_period_return));
    return w;
}

WeightVector allocate_scheme(const ReturnPanel& panel, Window window, const Scheme& scheme,
                             const AllocationContext& context) {
    const std::size_t n = panel.factor_count();
    auto need_caps = [&]() -> const MarketCapWeights& {
        if (!context.caps) fail(ErrorKind::MissingInput, "scheme '" + scheme.name() + "' needs market-cap weights");
        if (static_cast<std::size_t>(context.caps->weights.size()) != n) {
            fail(ErrorKind::UniverseMismatch, "market-cap weights do not match the factor count");
        }
        return *context.caps;
    };
    switch (scheme.kind) {
        case SchemeKind::Equal: return equal_weights(n);
        case SchemeKind::MarketCap: return market_cap_weights(need_caps());
        case SchemeKind::Contrarian: fail(ErrorKind::BadInput, "contrarian weights come from run_contrarian");
        default: break;
    }
    const Eigen::MatrixXd sigma = estimate_cov(panel, window, context.estimator).sigma;
    switch (scheme.kind) {
        case SchemeKind::ImpliedBeta: return implied_beta_weights(sigma, panel, window);
        case SchemeKind::GMV:
            return solve_constrained(ConstrainedObjective::gmv(), sigma, Eigen::VectorXd::Zero(sigma.rows()),
                                     context.solver).first;
        case SchemeKind::MaxSharpe:
            return solve_constrained(ConstrainedObjective::max_sharpe(), sigma, mean_excess(panel, window).mu,
                                     context.solver).first;
        case SchemeKind::Markowitz:
            if (!(scheme.lambda > 0.0)) fail(ErrorKind::BadInput, "Markowitz scheme needs a positive lambda");
            return solve_constrained(ConstrainedObjective::markowitz(scheme.lambda), sigma,
                                     mean_excess(panel, window).mu, context.solver).first;
        case SchemeKind::BlackLitterman: {
            const WeightVector prior = market_cap_weights(need_caps());
            const RiskAversion lambda = context.bl_lambda ? *context.bl_lambda : market_risk_aversion(panel, window);
            ViewSet views = context.views ? *context.views : ViewSet::empty(n, 1.0);
            views = with_default_omega(std::move(views), sigma);
            WeightVector w = bl_pipeline(prior, sigma, views, lambda, lambda).posterior_weights;
            w.scheme.lambda = lambda.lambda;
            return w;
        }
        default: break;
    }
    fail(ErrorKind::BadInput, "unsupported scheme '" + scheme.name() + "'");
}

std::vector<Scheme> default_static_schemes() {
    return {{SchemeKind::MarketCap}, {SchemeKind::Equal}, {SchemeKind::ImpliedBeta}, {SchemeKind::GMV},
            {SchemeKind::Markowitz, 2.0}, {SchemeKind::MaxSharpe}, {SchemeKind::BlackLitterman}};
}

BacktestLedger run_static(const ReturnPanel& panel, const std::vector<Scheme>& schemes,
                          const AllocationContext& context) {
    BacktestLedger ledger;
    ledger.mode = "static";
    ledger.factors = panel.universe().factor_names();
    const Window all = panel.full();
    ledger.rounds.push_back(make_meta(panel, 0, all, all, all, std::nullopt));
    std::vector<WeightVector> weights;
    for (const auto& s : schemes) weights.push_back(allocate_scheme(panel, all, s, context));
    const Eigen::MatrixXd returns = panel.factor_returns(all);
    const Eigen::VectorXd rf = panel.risk_free(all);
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        const Eigen::VectorXd day = returns.row(static_cast<Eigen::Index>(t)).transpose();
        for (const auto& w : weights) {
            ledger.records.push_back(make_record(0, panel.dates()[t], w, day, rf(static_cast<Eigen::Index>(t)), 1));
        }
    }
    return ledger;
}

std::size_t dynamic_round_count(std::size_t rows, const ViewModelConfig& config) {
    const std::size_t need = config.train_span + config.sequence_length + config.window;
    if (config.window == 0 || rows < need) return 0;
    return (rows - need) / config.window + 1;
}

BacktestLedger run_dynamic_bl(const ReturnPanel& panel, const DynamicOptions& options,
                              const ViewGenerator& generator) {
    const auto& cfg = options.model;
    cfg.validate();
    const RiskAversion lambda = RiskAversion::make(options.lambda, AversionSource::Custom);
    const std::size_t rounds = dynamic_round_count(panel.rows(), cfg);
    if (rounds == 0) {
        fail(ErrorKind::InsufficientData,
             "dynamic backtest needs " + std::to_string(cfg.train_span + cfg.sequence_length + cfg.window) +
                 " rows, panel has " + std::to_string(panel.rows()));
    }
    const std::size_t n = panel.factor_count();
    BacktestLedger ledger;
    ledger.mode = "dynamic";
    ledger.factors = panel.universe().factor_names();
    for (std::size_t r = 0; r < rounds; ++r) {
        const std::size_t o = r * cfg.window;
        const Window training{o, o + cfg.training_rows()};
        const Window estimation{o + cfg.train_span, o + cfg.train_span + cfg.sequence_length};
        const Window invested{estimation.end, estimation.end + cfg.window};
        ledger.rounds.push_back(make_meta(panel, r, training, estimation, invested, training.end));

        const Eigen::MatrixXd sigma = estimate_cov(panel, estimation, options.estimator).sigma;
        const Eigen::VectorXd mu = mean_excess(panel, estimation).mu;
        const WeightVector prior =
            solve_constrained(ConstrainedObjective::markowitz(options.lambda), sigma, mu, options.solver).first;

        const GeneratedView view = generator.generate(panel, training, estimation, cfg, cfg.seed + r);
        ViewSet views = ViewSet::empty(n, options.tau);
        views.p = view.one_hot_row.transpose();
        views.q = Eigen::VectorXd::Constant(1, view.q);
        views.fixed_omega = Eigen::VectorXd::Constant(1, std::numeric_limits<double>::quiet_NaN());
        views = with_default_omega(std::move(views), sigma);
        const BLResult bl = bl_pipeline(prior, sigma, views, lambda, lambda);

        const std::vector<WeightVector> schemes{
            equal_weights(n),
            solve_constrained(ConstrainedObjective::gmv(), sigma, mu, options.solver).first,
            solve_constrained(ConstrainedObjective::max_sharpe(), sigma, mu, options.solver).first,
            prior,
            bl.posterior_weights,
        };
        const Eigen::VectorXd cumulative = cumulative_returns(panel.factor_returns(invested));
        const double rf = compound(panel.risk_free(invested));
        for (const auto& w : schemes) {
            auto rec = make_record(r, ledger.rounds.back().invested_first, w, cumulative, rf, invested.size());
            if (w.scheme.kind == SchemeKind::BlackLitterman) rec.view_factor = view.factor;
            ledger.records.push_back(std::move(rec));
        }
    }
    return ledger;
}

std::vector<std::size_t> week_starts(const std::vector<Date>& dates) {
    std::vector<std::size_t> starts;
    std::optional<std::chrono::sys_days> current;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        const std::chrono::sys_days day{dates[i]};
        const std::chrono::weekday wd{day};
        const auto monday = day - std::chrono::days{wd.iso_encoding() - 1};
        if (!current || monday != *current) {
            starts.push_back(i);
            current = monday;
        }
    }
    starts.push_back(dates.size());
    return starts;
}

std::vector<std::size_t> bottom_k(const Eigen::VectorXd& values, std::size_t picks) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return values(static_cast<Eigen::Index>(a)) < values(static_cast<Eigen::Index>(b));
    });
    idx.resize(std::min(picks, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

BacktestLedger run_contrarian(const ReturnPanel& panel, std::size_t picks) {
    if (picks == 0) fail(ErrorKind::BadInput, "contrarian strategy needs at least one pick");
    const auto starts = week_starts(panel.dates());
    const std::size_t weeks = starts.size() - 1;
    if (weeks < 2) fail(ErrorKind::InsufficientData, "contrarian strategy needs at least 2 weeks of data");
    const std::size_t n = panel.factor_count();
    const std::size_t k = std::min(picks, n);
    BacktestLedger ledger;
    ledger.mode = "contrarian";
    ledger.factors = panel.universe().factor_names();
    for (std::size_t week = 1; week < weeks; ++week) {
        const Window previous{starts[week - 1], starts[week]};
        const Window current{starts[week], starts[week + 1]};
        const std::size_t round = week - 1;
        ledger.rounds.push_back(make_meta(panel, round, previous, previous, current, previous.end));
        WeightVector w{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), {SchemeKind::Contrarian}, true};
        for (auto i : bottom_k(cumulative_returns(panel.factor_returns(previous)), k)) {
            w.weights(static_cast<Eigen::Index>(i)) = 1.0 / static_cast<double>(k);
        }
        ledger.records.push_back(make_record(round, ledger.rounds.back().invested_first, w,
                                             cumulative_returns(panel.factor_returns(current)),
                                             compound(panel.risk_free(current)), current.size()));
    }
    return ledger;
}

std::vector<SchemeSummary> ledger_report(const BacktestLedger& ledger) {
    std::vector<SchemeSummary> out;
    for (const auto& name : ledger.schemes()) {
        const auto recs = ledger.records_for(name);
        SchemeSummary s;
        s.scheme = name;
        s.periods = recs.size();
        const auto wealth = ledger.wealth(name);
        s.cumulative_return = wealth.back() - 1.0;
        double peak = wealth.front();
        for (double w : wealth) {
            peak = std::max(peak, w);
            if (peak > 0.0) s.max_drawdown = std::max(s.max_drawdown, 1.0 - w / peak);
        }
        const auto m = static_cast<Eigen::Index>(recs.size());
        if (m >= 2) {
            Eigen::VectorXd r(m), ex(m);
            double days = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                r(i) = recs[static_cast<std::size_t>(i)]->realized_period_return;
                ex(i) = r(i) - recs[static_cast<std::size_t>(i)]->rf_period_return;
                days += static_cast<double>(recs[static_cast<std::size_t>(i)]->period_days);
            }
            const double per_year = kTradingDaysPerYear / (days / static_cast<double>(m));
            auto stdev = [&](const Eigen::VectorXd& v) {
                return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(m - 1));
            };
            s.annualized_vol = stdev(r) * std::sqrt(per_year);
            const double sd = stdev(ex);
            if (sd > 0.0) s.sharpe = ex.mean() / sd * std::sqrt(per_year);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string ledger_report_json(const std::vector<SchemeSummary>& summary) {
    json doc = json::array();
    for (const auto& s : summary) {
        json item;
        item["scheme"] = s.scheme;
        item["periods"] = s.periods;
        item["cumulative_return"] = s.cumulative_return;
        item["annualized_vol"] = s.annualized_vol;
        item["max_drawdown"] = s.max_drawdown;
        item["sharpe"] = s.sharpe ? json(*s.sharpe) : json(nullptr);
        doc.push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

std::string ledger_csv(const BacktestLedger& ledger) {
    std::ostringstream out;
    out << "round,date,scheme,constrained,period_days,realized_return,rf_return,wealth,view_factor";
    for (const auto& f : ledger.factors) out << ",w_" << f;
    out << '\n';
    std::vector<std::pair<std::string, double>> wealth;
    auto wealth_of = [&](const std::string& s) -> double& {
        for (auto& [name, w] : wealth)
            if (name == s) return w;
        wealth.emplace_back(s, 1.0);
        return wealth.back().second;
    };
    for (const auto& r : ledger.records) {
        double& w = wealth_of(r.scheme);
        w *= 1.0 + r.realized_period_return;
        out << r.round << ',' << format_date(r.date) << ',' << r.scheme << ',' << (r.constrained ? 1 : 0) << ','
            << r.period_days << ',' << format_double(r.realized_period_return) << ','
            << format_double(r.rf_period_return) << ',' << format_double(w) << ',';
        if (r.view_factor) out << ledger.factors.at(*r.view_factor);
        for (Eigen::Index i = 0; i < r.weights.size(); ++i) out << ',' << format_double(r.weights(i));
        out << '\n';
    }
    return out.str();
}

namespace {

json window_json(Window w) { return json::array({w.begin, w.end}); }

Window window_from(const nlohmann::json& j) { return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()}; }

Date date_from(const nlohmann::json& j) {
    const auto d = parse_date(j.get<std::string>());
    if (!d) fail(ErrorKind::BadInput, "ledger: bad date '" + j.get<std::string>() + "'");
    return *d;
}

}  // namespace

std::string ledger_json(const BacktestLedger& ledger) {
    json doc;
    doc["mode"] = ledger.mode;
    doc["factors"] = ledger.factors;
    doc["rounds"] = json::array();
    for (const auto& m : ledger.rounds) {
        json round;
        round["index"] = m.index;
        round["training_rows"] = window_json(m.training);
        round["estimation_rows"] = window_json(m.estimation);
        round["invested_rows"] = window_json(m.invested);
        round["training_first"] = format_date(m.training_first);
        round["label_last"] = m.label_last ? json(format_date(*m.label_last)) : json(nullptr);
        round["estimation_first"] = format_date(m.estimation_first);
        round["estimation_last"] = format_date(m.estimation_last);
        round["invested_first"] = format_date(m.invested_first);
        round["invested_last"] = format_date(m.invested_last);
        round["records"] = json::array();
        for (const auto& r : ledger.records) {
            if (r.round != m.index) continue;
            json rec;
            rec["date"] = format_date(r.date);
            rec["scheme"] = r.scheme;
            rec["constrained"] = r.constrained;
            rec["period_days"] = r.period_days;
            rec["realized_return"] = r.realized_period_return;
            rec["rf_return"] = r.rf_period_return;
            rec["view_factor"] = r.view_factor ? json(*r.view_factor) : json(nullptr);
            rec["weights"] = std::vector<double>(r.weights.data(), r.weights.data() + r.weights.size());
            round["records"].push_back(std::move(rec));
        }
        doc["rounds"].push_back(std::move(round));
    }
    return doc.dump(1) + "\n";
}

BacktestLedger parse_ledger_json(const std::string& text) {
    BacktestLedger ledger;
    try {
        const auto doc = nlohmann::json::parse(text);
        ledger.mode = doc.at("mode").get<std::string>();
        ledger.factors = doc.at("factors").get<std::vector<std::string>>();
        for (const auto& round : doc.at("rounds")) {
            RoundMeta m;
            m.index = round.at("index").get<std::size_t>();
            m.training = window_from(round.at("training_rows"));
            m.estimation = window_from(round.at("estimation_rows"));
            m.invested = window_from(round.at("invested_rows"));
            m.training_first = date_from(round.at("training_first"));
            if (!round.at("label_last").is_null()) m.label_last = date_from(round.at("label_last"));
            m.estimation_first = date_from(round.at("estimation_first"));
            m.estimation_last = date_from(round.at("estimation_last"));
            m.invested_first = date_from(round.at("invested_first"));
            m.invested_last = date_from(round.at("invested_last"));
            for (const auto& rec : round.at("records")) {
                RebalanceRecord r;
                r.round = m.index;
                r.date = date_from(rec.at("date"));
                r.scheme = rec.at("scheme").get<std::string>();
                r.constrained = rec.at("constrained").get<bool>();
                r.period_days = rec.at("period_days").get<std::size_t>();
                r.realized_period_return = rec.at("realized_return").get<double>();
                r.rf_period_return = rec.at("rf_return").get<double>();
                if (!rec.at("view_factor").is_null()) r.view_factor = rec.at("view_factor").get<std::size_t>();
                const auto w = rec.at("weights").get<std::vector<double>>();
                r.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
                ledger.records.push_back(std::move(r));
            }
            ledger.rounds.push_back(m);
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::BadInput, std::string("ledger JSON: ") + e.what());
    }
    return ledger;
}

BacktestLedger load_ledger_json(const std::filesystem::path& path) {
    std::string text;
    for (const auto& line : read_lines(path)) text += line + "\n";
    return parse_ledger_json(text);
}

std::vector<AuditFinding> audit_no_lookahead(const BacktestLedger& ledger) {
    std::vector<AuditFinding> findings;
    for (const auto& m : ledger.rounds) {
        if (m.label_last && !(*m.label_last < m.invested_first)) {
            findings.push_back({m.index, "training label date " + format_date(*m.label_last) +
                                             " is not before first invested date " + format_date(m.invested_first)});
        }
        if (m.label_last && !(m.estimation_last < m.invested_first)) {
            findings.push_back({m.index, "estimation window overlaps the invested window"});
        }
        if (m.label_last && m.training.end > m.invested.begin) {
            findings.push_back({m.index, "training rows overlap the invested rows"});
        }
    }
    return findings;
}

}  // namespace factorlab
