#include "factorlab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>

#include "factorlab/allocate.hpp"
#include "factorlab/backtest.hpp"
#include "factorlab/blacklitterman.hpp"
#include "factorlab/covariance.hpp"
#include "factorlab/marketdata.hpp"
#include "factorlab/report.hpp"
#include "factorlab/robustness.hpp"
#include "factorlab/viewgen.hpp"

namespace factorlab {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::BadInput:
        case ErrorKind::UniverseMismatch:
        case ErrorKind::MissingInput:
        case ErrorKind::IoError: return kExitUserInput;
        case ErrorKind::InsufficientData:
        case ErrorKind::DegenerateSeries:
        case ErrorKind::SingularCovariance:
        case ErrorKind::DegenerateTangency:
        case ErrorKind::NonPositiveAversion:
        case ErrorKind::EmptyChart: return kExitData;
    }
    return kExitInternal;
}

namespace {

struct RunConfig {
    std::string universe_path;
    std::string prices_path;
    std::string caps_path;
    std::string views_path;
    std::string ledger_path;
    std::string lambda = "empirical";
    std::string estimator = "sample";
    std::uint64_t seed = 42;
    std::string out_dir = "reports";
    std::string run_id;
    std::vector<std::string> schemes;
    std::string mode = "dynamic";
    std::string generator = "lstm";
    std::string prior = "markowitz";
    double prior_lambda = 2.0;
    double tau = 1.0 / 252.0;
    std::string omega_mode = "recompute";
    ViewModelConfig model;
    std::size_t days = 800;
    std::string synth_out;
};

struct Session {
    RunConfig cfg;
    std::string command;
    std::ostream& out;

    FactorUniverse universe() const {
        return cfg.universe_path.empty() ? FactorUniverse::standard() : load_universe(cfg.universe_path);
    }

    ReturnPanel panel() const {
        if (cfg.prices_path.empty()) fail(ErrorKind::MissingInput, "--prices is required for '" + command + "'");
        return load_prices(cfg.prices_path, universe());
    }

    std::optional<MarketCapWeights> caps(const FactorUniverse& u) const {
        if (cfg.caps_path.empty()) return std::nullopt;
        return load_market_caps(cfg.caps_path, u);
    }

    EstimatorKind estimator() const {
        const auto e = parse_estimator(cfg.estimator);
        if (!e) fail(ErrorKind::BadInput, "unknown estimator '" + cfg.estimator + "' (expected sample or shrunk)");
        return *e;
    }

    RiskAversion lambda(const ReturnPanel& p) const {
        const auto& s = cfg.lambda;
        if (s == "empirical") return market_risk_aversion(p, p.full());
        if (s == "kelly") return scenario_aversion(AversionSource::NearKelly);
        if (s == "average") return scenario_aversion(AversionSource::Average);
        if (s == "averse") return scenario_aversion(AversionSource::Averse);
        const auto v = parse_double(s);
        if (!v) fail(ErrorKind::BadInput, "--lambda must be kelly, average, averse, empirical or a number");
        return RiskAversion::make(*v, AversionSource::Custom);
    }

    ViewSet views(const FactorUniverse& u) const {
        double tau = cfg.tau;
        const auto specs = cfg.views_path.empty() ? example_view_specs() : load_view_specs(cfg.views_path, &tau);
        return build_views(specs, u, tau);
    }

    ReportLayout layout() const {
        ReportLayout l(cfg.out_dir, cfg.run_id.empty() ? command : cfg.run_id);
        l.create();
        return l;
    }

    void write_meta(const ReportLayout& l, std::vector<std::pair<std::string, std::string>> extra) const {
        extra.emplace_back("command", command);
        extra.emplace_back("seed", std::to_string(cfg.seed));
        extra.emplace_back("estimator", cfg.estimator);
        extra.emplace_back("lambda", cfg.lambda);
        extra.emplace_back("universe", cfg.universe_path.empty() ? "standard" : cfg.universe_path);
        extra.emplace_back("prices", cfg.prices_path);
        extra.emplace_back("caps", cfg.caps_path);
        extra.emplace_back("views", cfg.views_path.empty() ? "example" : cfg.views_path);
        extra.emplace_back("tau", format_double(cfg.tau));
        write_text_file(l.meta(), run_meta_json(extra));
    }

    void wrote(const std::filesystem::path& p) const { out << "wrote " << p.string() << '\n'; }

    void table(const ReportLayout& l, const std::string& name, const std::string& text) const {
        write_text_file(l.table(name), text);
        wrote(l.table(name));
    }

    void chart(const ReportLayout& l, ChartSpec spec, const std::string& name) const {
        spec.path = l.chart(name);
        render_chart(spec);
        wrote(spec.path);
    }
};

std::vector<std::string> date_labels(const std::vector<Date>& dates) {
    std::vector<std::string> out;
    out.reserve(dates.size());
    for (const auto& d : dates) out.push_back(format_date(d));
    return out;
}

/// Requested schemes in the weights-table order; empty means all of them.
std::vector<Scheme> resolve_schemes(const std::vector<std::string>& names) {
    const auto all = default_static_schemes();
    if (names.empty()) return all;
    std::vector<SchemeKind> wanted;
    for (const auto& n : names) {
        const auto k = parse_scheme_kind(n);
        if (!k || *k == SchemeKind::Contrarian) {
            fail(ErrorKind::BadInput, "unknown scheme '" + n +
                                          "' (expected market_cap, equal, implied_beta, gmv, markowitz, "
                                          "max_sharpe, black_litterman)");
        }
        wanted.push_back(*k);
    }
    std::vector<Scheme> out;
    for (const auto& s : all) {
        if (std::find(wanted.begin(), wanted.end(), s.kind) != wanted.end()) out.push_back(s);
    }
    return out;
}

void cmd_stats(const Session& s) {
    const auto panel = s.panel();
    const auto layout = s.layout();
    std::ostringstream csv;
    csv << "series,count,mean,std,min,25%,50%,75%,max\n";
    for (const auto& r : summary_stats(panel)) {
        csv << r.name << ',' << r.count << ',' << format_double(r.mean) << ',' << format_double(r.std) << ','
            << format_double(r.min) << ',' << format_double(r.q25) << ',' << format_double(r.q50) << ','
            << format_double(r.q75) << ',' << format_double(r.max) << '\n';
    }
    s.table(layout, "summary_stats.csv", csv.str());

    const auto names = panel.universe().factor_names();
    const Eigen::MatrixXd corr = correlation_matrix(panel);
    ChartSpec heat{ChartKind::Heatmap, "Factor Correlation", {}, names, "", "", {}};
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
        ChartSeries row{names[static_cast<std::size_t>(i)], {}};
        for (Eigen::Index j = 0; j < corr.cols(); ++j) row.values.push_back(corr(i, j));
        heat.series.push_back(std::move(row));
    }
    s.chart(layout, heat, "correlation.svg");

    const Eigen::MatrixXd r = panel.factor_returns(panel.full());
    ChartSpec line{ChartKind::Line, "Cumulative Returns", {}, date_labels(panel.dates()), "date", "cumulative return", {}};
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
        ChartSeries series{names[static_cast<std::size_t>(j)], {}};
        double w = 1.0;
        for (Eigen::Index t = 0; t < r.rows(); ++t) {
            w *= 1.0 + r(t, j);
            series.values.push_back(w - 1.0);
        }
        line.series.push_back(std::move(series));
    }
    s.chart(layout, line, "cumulative_returns.svg");
    s.write_meta(layout, {});
}

AllocationContext context_for(const Session& s, const ReturnPanel& panel) {
    AllocationContext ctx;
    ctx.estimator = s.estimator();
    ctx.caps = s.caps(panel.universe());
    ctx.views = s.views(panel.universe());
    ctx.bl_lambda = s.lambda(panel);
    return ctx;
}

void cmd_allocate(const Session& s) {
    const auto schemes = resolve_schemes(s.cfg.schemes);
    const auto panel = s.panel();
    const auto ctx = context_for(s, panel);
    std::vector<std::pair<std::string, Eigen::VectorXd>> columns;
    for (const auto& scheme : schemes) {
        const auto w = allocate_scheme(panel, panel.full(), scheme, ctx);
        columns.emplace_back(scheme.title(), w.weights);
    }
    const auto layout = s.layout();
    const auto names = panel.universe().factor_names();
    s.table(layout, "weights.csv", percent_table_csv(names, columns));
    ChartSpec bars{ChartKind::GroupedBar, "Weights by Allocation Scheme", {}, names, "", "weight", {}};
    for (const auto& [title, w] : columns) bars.series.push_back({title, std::vector<double>(w.data(), w.data() + w.size())});
    s.chart(layout, bars, "weights.svg");
    s.write_meta(layout, {{"lambda_value", format_double(ctx.bl_lambda->lambda)}});
}

void cmd_bl(const Session& s) {
    const auto panel = s.panel();
    const auto& u = panel.universe();
    const auto caps = s.caps(u);
    if (!caps) fail(ErrorKind::MissingInput, "'bl' needs --caps for the market-cap prior");
    const Eigen::MatrixXd sigma = estimate_cov(panel, panel.full(), s.estimator()).sigma;
    const ViewSet views = with_default_omega(s.views(u), sigma);
    const WeightVector prior = market_cap_weights(*caps);
    const RiskAversion empirical = market_risk_aversion(panel, panel.full());
    const RiskAversion chosen = s.lambda(panel);

    const auto layout = s.layout();
    const auto names = u.factor_names();
    const BLResult main = bl_pipeline(prior, sigma, views, empirical, chosen);
    s.table(layout, "bl_construction.csv", emit_bl_table(main, prior, names));

    std::vector<std::pair<std::string, Eigen::VectorXd>> columns;
    const std::vector<std::pair<std::string, RiskAversion>> scenarios{
        {"Empirical Mkt", empirical},
        {"Kelly", scenario_aversion(AversionSource::NearKelly)},
        {"Market", scenario_aversion(AversionSource::Average)},
        {"Risk Averse", scenario_aversion(AversionSource::Averse)},
    };
    for (const auto& [title, lam] : scenarios) {
        columns.emplace_back(title, bl_pipeline(prior, sigma, views, empirical, lam).posterior_weights.weights);
    }
    s.table(layout, "bl_scenarios.csv", percent_table_csv(names, columns));
    ChartSpec bars{ChartKind::GroupedBar, "Black-Litterman Weights by Risk Aversion", {}, names, "", "weight", {}};
    for (const auto& [title, w] : columns) bars.series.push_back({title, std::vector<double>(w.data(), w.data() + w.size())});
    s.chart(layout, bars, "bl_scenarios.svg");
    s.write_meta(layout, {{"lambda_empirical", format_double(empirical.lambda)},
                          {"lambda_empirical_half", format_double(empirical.lambda / 2.0)},
                          {"lambda_value", format_double(chosen.lambda)},
                          {"lambda_source", to_string(chosen.source)}});
    s.out << "market-implied lambda " << format_double(empirical.lambda) << " (half: "
          << format_double(empirical.lambda / 2.0) << ")\n";
}

void emit_ledger(const Session& s, const ReportLayout& layout, const BacktestLedger& ledger, const std::string& tag) {
    s.table(layout, "ledger_" + tag + ".csv", ledger_csv(ledger));
    s.table(layout, "ledger_" + tag + ".json", ledger_json(ledger));
    s.table(layout, "report_" + tag + ".json", ledger_report_json(ledger_report(ledger)));
    ChartSpec line{ChartKind::Line, "Cumulative Wealth", {}, {}, "period", "wealth", {}};
    for (const auto& name : ledger.schemes()) {
        auto w = ledger.wealth(name);
        line.series.push_back({name, std::vector<double>(w.begin() + 1, w.end())});
        if (line.labels.empty()) {
            for (const auto* r : ledger.records_for(name)) line.labels.push_back(format_date(r->date));
        }
    }
    s.chart(layout, line, "cumulative_" + tag + ".svg");
}

void emit_weight_paths(const Session& s, const ReportLayout& layout, const BacktestLedger& ledger,
                       const std::string& tag) {
    const auto paths = weight_paths(ledger);
    std::ostringstream corners;
    corners << "date,corner,schemes\n";
    for (std::size_t i = 0; i < paths.dates.size(); ++i) {
        corners << format_date(paths.dates[i]) << ',' << (paths.corner[i] ? 1 : 0) << ','
                << csv_field(paths.corner_schemes[i]) << '\n';
    }
    s.table(layout, "corners_" + tag + ".csv", corners.str());
    for (const auto& path : paths.paths) {
        ChartSpec stack{ChartKind::StackedArea, path.scheme + " weights over time", {}, date_labels(path.dates),
                        "rebalance date", "weight", {}};
        for (std::size_t j = 0; j < ledger.factors.size(); ++j) {
            ChartSeries series{ledger.factors[j], {}};
            for (const auto& w : path.weights) series.values.push_back(w(static_cast<Eigen::Index>(j)));
            stack.series.push_back(std::move(series));
        }
        s.chart(layout, stack, "weights_" + tag + "_" + path.scheme + ".svg");
    }
}

void cmd_backtest(const Session& s) {
    const auto panel = s.panel();
    const auto layout = s.layout();
    const auto& mode = s.cfg.mode;
    std::vector<std::pair<std::string, std::string>> meta{{"mode", mode}};
    if (mode == "static") {
        const auto ledger = run_static(panel, resolve_schemes(s.cfg.schemes), context_for(s, panel));
        emit_ledger(s, layout, ledger, "static");
    } else if (mode == "contrarian") {
        emit_ledger(s, layout, run_contrarian(panel), "contrarian");
    } else if (mode == "dynamic") {
        DynamicOptions opt;
        opt.model = s.cfg.model;
        opt.model.seed = s.cfg.seed;
        opt.lambda = s.cfg.prior_lambda;
        opt.estimator = s.estimator();
        opt.tau = s.cfg.tau;
        const auto generator = make_view_generator(s.cfg.generator);
        const auto ledger = run_dynamic_bl(panel, opt, *generator);
        const auto findings = audit_no_lookahead(ledger);
        if (!findings.empty()) fail(ErrorKind::BadInput, "look-ahead audit failed: " + findings.front().message);
        emit_ledger(s, layout, ledger, "dynamic");
        emit_weight_paths(s, layout, ledger, "dynamic");
        std::vector<DatedView> views;
        for (const auto& r : ledger.records) {
            if (r.view_factor) views.push_back({r.date, ledger.factors[*r.view_factor], kGeneratedViewQ});
        }
        s.table(layout, "views.json", views_json(views));
        meta.emplace_back("generator", s.cfg.generator);
        meta.emplace_back("prior_lambda", format_double(s.cfg.prior_lambda));
        meta.emplace_back("sequence_length", std::to_string(opt.model.sequence_length));
        meta.emplace_back("window", std::to_string(opt.model.window));
        meta.emplace_back("train_span", std::to_string(opt.model.train_span));
        meta.emplace_back("hidden", std::to_string(opt.model.hidden_size));
        meta.emplace_back("epochs", std::to_string(opt.model.epochs));
        meta.emplace_back("learning_rate", format_double(opt.model.learning_rate));
    } else {
        fail(ErrorKind::BadInput, "unknown backtest mode '" + mode + "' (expected static, dynamic or contrarian)");
    }
    s.write_meta(layout, meta);
}

void cmd_sweep(const Session& s) {
    const auto panel = s.panel();
    const auto& u = panel.universe();
    const auto layout = s.layout();
    const auto names = u.factor_names();
    const auto multipliers = default_multipliers();
    OmegaMode omega_mode = OmegaMode::Recompute;
    if (s.cfg.omega_mode == "fixed") omega_mode = OmegaMode::Fixed;
    else if (s.cfg.omega_mode != "recompute") fail(ErrorKind::BadInput, "--omega-mode must be recompute or fixed");
    const auto prior_kind = parse_scheme_kind(s.cfg.prior);
    if (!prior_kind) fail(ErrorKind::BadInput, "unknown prior scheme '" + s.cfg.prior + "'");
    const Scheme prior_scheme{*prior_kind, *prior_kind == SchemeKind::Markowitz ? s.cfg.prior_lambda : 0.0};
    const RiskAversion lambda = RiskAversion::make(s.cfg.prior_lambda, AversionSource::Custom);
    const auto mu = mean_excess(panel, panel.full()).mu;
    const auto caps = s.caps(u);
    const auto views = s.views(u);
    std::vector<std::string> labels;
    for (double m : multipliers) labels.push_back(format_double(m));

    for (auto est : {EstimatorKind::Sample, EstimatorKind::Shrunk}) {
        const auto tag = to_string(est);
        const Eigen::MatrixXd sigma = estimate_cov(panel, panel.full(), est).sigma;
        const auto result = volatility_sweep(make_prior_function(prior_scheme, mu, caps), sigma, views, lambda,
                                             multipliers, omega_mode);
        s.table(layout, "sweep_" + tag + ".csv", sweep_csv(result, names));
        for (const auto* which : {"prior", "posterior"}) {
            const auto& ws = std::string(which) == "prior" ? result.prior_weights : result.posterior_weights;
            ChartSpec stack{ChartKind::StackedArea,
                            std::string(which == std::string("prior") ? "Prior" : "Posterior") +
                                " weights vs volatility multiplier (" + tag + ")",
                            {}, labels, "volatility multiplier", "weight", {}};
            for (std::size_t j = 0; j < names.size(); ++j) {
                ChartSeries series{names[j], {}};
                for (const auto& w : ws) series.values.push_back(w(static_cast<Eigen::Index>(j)));
                stack.series.push_back(std::move(series));
            }
            s.chart(layout, stack, "sweep_" + std::string(which) + "_" + tag + ".svg");
        }
    }

    AllocationContext ctx;
    ctx.caps = caps;
    std::vector<Scheme> compare{{SchemeKind::GMV}, {SchemeKind::Markowitz, s.cfg.prior_lambda}, {SchemeKind::MaxSharpe}};
    const auto impact = shrinkage_impact(panel, panel.full(), compare, ctx);
    std::ostringstream j;
    j << "{\n  \"frobenius\": " << format_double(impact.frobenius) << ",\n  \"relative_frobenius\": "
      << format_double(impact.relative_frobenius) << ",\n  \"intensity\": " << format_double(impact.intensity)
      << ",\n  \"max_weight_difference\": " << format_double(impact.max_weight_difference) << "\n}\n";
    s.table(layout, "shrinkage_impact.json", j.str());
    s.write_meta(layout, {{"prior", s.cfg.prior},
                          {"prior_lambda", format_double(s.cfg.prior_lambda)},
                          {"omega_mode", s.cfg.omega_mode}});
}

void cmd_report(const Session& s) {
    if (s.cfg.ledger_path.empty()) fail(ErrorKind::MissingInput, "'report' needs --ledger <ledger json>");
    const auto ledger = load_ledger_json(s.cfg.ledger_path);
    const auto layout = s.layout();
    s.table(layout, "summary_" + ledger.mode + ".json", ledger_report_json(ledger_report(ledger)));
    emit_weight_paths(s, layout, ledger, ledger.mode);
    s.write_meta(layout, {{"ledger", s.cfg.ledger_path}});
}

void cmd_synth(const Session& s) {
    if (s.cfg.synth_out.empty()) fail(ErrorKind::MissingInput, "'synth' needs --synth-out <csv path>");
    write_price_csv(s.cfg.synth_out, make_synthetic_prices(s.universe(), s.cfg.days, s.cfg.seed));
    s.wrote(s.cfg.synth_out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Factor portfolio construction, Black-Litterman and backtesting toolkit", "factorlab"};
    app.set_config("--config", "", "Flat key=value file; keys are flag names, flags on the command line win");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1, 1);
    app.fallthrough();

    app.add_option("--universe", cfg.universe_path, "Universe JSON (default: built-in 20-factor universe)")
        ->check(CLI::ExistingFile);
    app.add_option("--prices", cfg.prices_path, "Adjusted-close CSV, one column per ticker")->check(CLI::ExistingFile);
    app.add_option("--caps", cfg.caps_path, "Market-cap weights CSV (variable_name,weight)")->check(CLI::ExistingFile);
    app.add_option("--views", cfg.views_path, "View JSON (default: built-in three-view example)")
        ->check(CLI::ExistingFile);
    app.add_option("--ledger", cfg.ledger_path, "Ledger JSON for 'report'")->check(CLI::ExistingFile);
    app.add_option("--lambda", cfg.lambda, "Risk aversion: kelly, average, averse, empirical or a number")
        ->capture_default_str();
    app.add_option("--estimator", cfg.estimator, "Covariance estimator: sample or shrunk")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app.add_option("--out", cfg.out_dir, "Output directory root")->capture_default_str();
    app.add_option("--run-id", cfg.run_id, "Run directory name under --out (default: the subcommand)");
    app.add_option("--schemes", cfg.schemes, "Comma-separated scheme names (default: all)")->delimiter(',');
    app.add_option("--mode", cfg.mode, "Backtest mode: static, dynamic or contrarian")->capture_default_str();
    app.add_option("--generator", cfg.generator, "View generator for dynamic backtests: lstm or momentum")
        ->capture_default_str();
    app.add_option("--prior", cfg.prior, "Sweep prior scheme: markowitz, gmv, market_cap or equal")
        ->capture_default_str();
    app.add_option("--prior-lambda", cfg.prior_lambda, "Markowitz lambda for the dynamic and sweep prior")
        ->capture_default_str();
    app.add_option("--tau", cfg.tau, "Prior uncertainty scale tau")->capture_default_str();
    app.add_option("--omega-mode", cfg.omega_mode, "Sweep view variance: recompute or fixed")->capture_default_str();
    app.add_option("--sequence-length", cfg.model.sequence_length, "Feature days per sample")->capture_default_str();
    app.add_option("--window", cfg.model.window, "Holding and rolling window in days")->capture_default_str();
    app.add_option("--train-span", cfg.model.train_span, "Training span in days")->capture_default_str();
    app.add_option("--hidden", cfg.model.hidden_size, "Sequence model hidden units")->capture_default_str();
    app.add_option("--epochs", cfg.model.epochs, "Training epochs per round")->capture_default_str();
    app.add_option("--learning-rate", cfg.model.learning_rate, "Gradient-descent step")->capture_default_str();
    app.add_option("--days", cfg.days, "Trading days for 'synth'")->capture_default_str();
    app.add_option("--synth-out", cfg.synth_out, "Output price CSV for 'synth'");

    app.add_subcommand("stats", "Summary statistics, correlation heatmap and cumulative returns");
    app.add_subcommand("allocate", "Weights table for the allocation schemes");
    app.add_subcommand("bl", "Static Black-Litterman tables under the risk-aversion scenarios");
    app.add_subcommand("backtest", "Static, dynamic (rolling Black-Litterman) or contrarian backtest");
    app.add_subcommand("sweep", "Prior and posterior weights against a volatility multiplier");
    app.add_subcommand("report", "Weight-path charts and summary from a saved ledger");
    app.add_subcommand("synth", "Write a synthetic price file");

    std::vector<std::string> argv_store{"factorlab"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUserInput;
    }

    const auto* sub = app.get_subcommands().front();
    Session session{cfg, sub->get_name(), out};
    try {
        if (session.command == "stats") cmd_stats(session);
        else if (session.command == "allocate") cmd_allocate(session);
        else if (session.command == "bl") cmd_bl(session);
        else if (session.command == "backtest") cmd_backtest(session);
        else if (session.command == "sweep") cmd_sweep(session);
        else if (session.command == "report") cmd_report(session);
        else if (session.command == "synth") cmd_synth(session);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace factorlab
