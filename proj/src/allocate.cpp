#include "factorlab/allocate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "factorlab/error.hpp"

namespace factorlab {

namespace {

constexpr double kMaxCondition = 1e12;

Eigen::VectorXd ones(Eigen::Index n) { return Eigen::VectorXd::Ones(n); }

void check_square(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) {
        fail(ErrorKind::BadInput, "covariance must be a non-empty square matrix");
    }
}

void check_psd(const Eigen::MatrixXd& sigma) {
    check_square(sigma);
    const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1e-300);
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        fail(ErrorKind::BadInput, "covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
        fail(ErrorKind::BadInput, "covariance is not positive semidefinite");
    }
}

std::string fmt_lambda(double lambda) {
    std::ostringstream out;
    out << lambda;
    return out.str();
}

}  // namespace

std::string Scheme::name() const {
    switch (kind) {
        case SchemeKind::Equal: return "equal";
        case SchemeKind::MarketCap: return "market_cap";
        case SchemeKind::ImpliedBeta: return "implied_beta";
        case SchemeKind::GMV: return "gmv";
        case SchemeKind::MaxSharpe: return "max_sharpe";
        case SchemeKind::Markowitz: return "markowitz";
        case SchemeKind::BlackLitterman: return "black_litterman";
        case SchemeKind::Contrarian: return "contrarian";
    }
    return "unknown";
}

std::string Scheme::title() const {
    switch (kind) {
        case SchemeKind::Equal: return "Equal Weights";
        case SchemeKind::MarketCap: return "Market Cap Weights";
        case SchemeKind::ImpliedBeta: return "Implied Beta Weights";
        case SchemeKind::GMV: return "GMV Weights";
        case SchemeKind::MaxSharpe: return "Max Sharpe Weights";
        case SchemeKind::Markowitz: return "Markowitz Weights with lambda=" + fmt_lambda(lambda);
        case SchemeKind::BlackLitterman: return "Black-Litterman Weights";
        case SchemeKind::Contrarian: return "Contrarian Weights";
    }
    return "Weights";
}

std::optional<SchemeKind> parse_scheme_kind(std::string_view name) {
    for (auto k : {SchemeKind::Equal, SchemeKind::MarketCap, SchemeKind::ImpliedBeta, SchemeKind::GMV,
                   SchemeKind::MaxSharpe, SchemeKind::Markowitz, SchemeKind::BlackLitterman,
                   SchemeKind::Contrarian}) {
        if (Scheme{k, 0.0}.name() == name) return k;
    }
    return std::nullopt;
}

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& rhs) {
    check_square(sigma);
    if (rhs.rows() != sigma.rows()) fail(ErrorKind::BadInput, "dimension mismatch against covariance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition) {
        fail(ErrorKind::SingularCovariance, "covariance is singular or too ill-conditioned to invert");
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
    if (ldlt.info() != Eigen::Success) fail(ErrorKind::SingularCovariance, "LDLT factorization failed");
    return ldlt.solve(rhs);
}

WeightVector equal_weights(std::size_t n) {
    if (n == 0) fail(ErrorKind::BadInput, "equal weights need n >= 1");
    const auto size = static_cast<Eigen::Index>(n);
    return {Eigen::VectorXd::Constant(size, 1.0 / static_cast<double>(n)), {SchemeKind::Equal}, true};
}

WeightVector market_cap_weights(const MarketCapWeights& caps) {
    const auto normalized = normalize_market_caps(caps.weights);
    return {normalized.weights, {SchemeKind::MarketCap}, true};
}

WeightVector gmv_closed_form(const Eigen::MatrixXd& sigma) {
    const Eigen::VectorXd x = solve_spd(sigma, ones(sigma.rows()));
    return {x / x.sum(), {SchemeKind::GMV}, false};
}

WeightVector max_sharpe_closed_form(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu) {
    const Eigen::VectorXd x = solve_spd(sigma, mu);
    const double denom = x.sum();
    // a non-positive denominator would normalize onto the lowest-Sharpe portfolio
    if (!(denom > 1e-12)) {
        fail(ErrorKind::DegenerateTangency, "1' S^-1 mu is not positive; tangency portfolio undefined");
    }
    return {x / denom, {SchemeKind::MaxSharpe}, false};
}

WeightVector markowitz_closed_form(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu, double lambda) {
    if (!(lambda > 0.0)) fail(ErrorKind::BadInput, "Markowitz risk aversion must be positive");
    Eigen::MatrixXd rhs(sigma.rows(), 2);
    rhs.col(0) = mu;
    rhs.col(1) = ones(sigma.rows());
    const Eigen::MatrixXd x = solve_spd(sigma, rhs);
    const double v = (x.col(0).sum() - 2.0 * lambda) / x.col(1).sum();
    Eigen::VectorXd w = (x.col(0) - v * x.col(1)) / (2.0 * lambda);
    return {std::move(w), {SchemeKind::Markowitz, lambda}, false};
}

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y) {
    const auto n = y.size();
    if (n == 0) fail(ErrorKind::BadInput, "cannot project an empty vector");

    // g(theta) = sum_i clamp(y_i - theta, 0, 1) is non-increasing and piecewise
    // linear. Component i sits at 1 for theta < y_i - 1, is free on
    // [y_i - 1, y_i] and sits at 0 afterwards. Sweep the breakpoints in order.
    struct Event {
        double at;
        Eigen::Index index;
        bool leaves_free;  // false: 1 -> free, true: free -> 0
    };
    std::vector<Event> events;
    events.reserve(static_cast<std::size_t>(2 * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        events.push_back({y(i) - 1.0, i, false});
        events.push_back({y(i), i, true});
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.at != b.at) return a.at < b.at;
        if (a.leaves_free != b.leaves_free) return !a.leaves_free;
        return a.index < b.index;
    });

    double at_one = static_cast<double>(n);
    double free_sum = 0.0;
    double free_count = 0.0;
    double theta = events.back().at;
    bool found = false;
    for (const auto& e : events) {
        const double g = at_one + free_sum - free_count * e.at;
        if (g <= 1.0) {
            theta = free_count > 0.0 ? (at_one + free_sum - 1.0) / free_count : e.at;
            found = true;
            break;
        }
        if (e.leaves_free) {
            free_sum -= y(e.index);
            free_count -= 1.0;
        } else {
            at_one -= 1.0;
            free_sum += y(e.index);
            free_count += 1.0;
        }
    }
    if (!found) theta = events.back().at;
    return (y.array() - theta).cwiseMax(0.0).cwiseMin(1.0).matrix();
}

double portfolio_variance(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& w) { return w.dot(sigma * w); }

double sharpe_ratio(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu, const Eigen::VectorXd& w) {
    return w.dot(mu) / std::sqrt(portfolio_variance(sigma, w));
}

double markowitz_utility(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu, double lambda,
                         const Eigen::VectorXd& w) {
    return w.dot(mu) - lambda * portfolio_variance(sigma, w);
}

namespace {

/// Minimizer of lambda w'Sw - b'w with the coordinates of x at 0 or 1 held
/// fixed and the rest summing to the remaining budget; nullopt when that
/// point leaves the box or the face is degenerate.
std::optional<Eigen::VectorXd> polish_on_face(const Eigen::MatrixXd& s, const Eigen::VectorXd& b, double lambda,
                                              const Eigen::VectorXd& x) {
    constexpr double kEdge = 1e-9;
    const auto n = x.size();
    std::vector<Eigen::Index> free;
    Eigen::VectorXd fixed = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (x(i) >= 1.0 - kEdge) fixed(i) = 1.0;
        else if (x(i) > kEdge) free.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(free.size());
    const double budget = 1.0 - fixed.sum();
    if (k == 0) return std::abs(budget) < 1e-12 ? std::optional<Eigen::VectorXd>(fixed) : std::nullopt;
    Eigen::MatrixXd a(k, k);
    Eigen::VectorXd rhs(k);
    const Eigen::VectorXd s_fixed = s * fixed;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) a(i, j) = 2.0 * lambda * s(free[i], free[j]);
        rhs(i) = b(free[i]) - 2.0 * lambda * s_fixed(free[i]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
    const Eigen::VectorXd y1 = ldlt.solve(rhs);
    const Eigen::VectorXd y2 = ldlt.solve(Eigen::VectorXd::Ones(k));
    if (!(y2.sum() > 0.0)) return std::nullopt;
    const double nu = (budget - y1.sum()) / y2.sum();
    Eigen::VectorXd out = fixed;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double v = y1(i) + nu * y2(i);
        if (!(v >= 0.0 && v <= 1.0)) return std::nullopt;
        out(free[i]) = v;
    }
    return out;
}

/// Long-only tangency: Sharpe is unimodal along the efficient frontier, so a
/// search over log(lambda) of exact Markowitz solutions finds
/// the face, and the face tangency Sigma_FF^-1 mu_F is then solved directly.
Eigen::VectorXd frontier_tangency(const Eigen::MatrixXd& s, const Eigen::VectorXd& m, SolverOptions options) {
    auto solve = [&](double log_lambda) {
        return solve_constrained(ConstrainedObjective::markowitz(std::exp(log_lambda)), s, m, options).first.weights;
    };
    auto score = [&](const Eigen::VectorXd& w) { return sharpe_ratio(s, m, w); };
    // Both ends of the frontier are flat (top-return corner, GMV), so bracket
    // the peak on a coarse grid before refining.
    const double centre = std::log(std::max(m.cwiseAbs().maxCoeff(), 1e-300));
    constexpr int kGrid = 121;
    constexpr double kSpan = 30.0;
    const double spacing = 2.0 * kSpan / (kGrid - 1);
    int arg = 0;
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kGrid; ++i) {
        const double v = score(solve(centre - kSpan + i * spacing));
        if (v > top) {
            top = v;
            arg = i;
        }
    }
    double lo = centre - kSpan + std::max(arg - 1, 0) * spacing;
    double hi = centre - kSpan + std::min(arg + 1, kGrid - 1) * spacing;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - ratio * (hi - lo);
    double b = lo + ratio * (hi - lo);
    Eigen::VectorXd wa = solve(a);
    Eigen::VectorXd wb = solve(b);
    double fa = score(wa);
    double fb = score(wb);
    for (int i = 0; i < 60; ++i) {
        if (fa >= fb) {
            hi = b;
            b = a;
            wb = wa;
            fb = fa;
            a = hi - ratio * (hi - lo);
            wa = solve(a);
            fa = score(wa);
        } else {
            lo = a;
            a = b;
            wa = wb;
            fa = fb;
            b = lo + ratio * (hi - lo);
            wb = solve(b);
            fb = score(wb);
        }
    }
    Eigen::VectorXd best = fa >= fb ? wa : wb;

    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < best.size(); ++i) {
        if (best(i) > 1e-9) free.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd a_ff(k, k);
    Eigen::VectorXd m_f(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        m_f(i) = m(free[i]);
        for (Eigen::Index j = 0; j < k; ++j) a_ff(i, j) = s(free[i], free[j]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a_ff);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const Eigen::VectorXd y = ldlt.solve(m_f);
        if (y.minCoeff() >= 0.0 && y.sum() > 0.0) {
            Eigen::VectorXd exact = Eigen::VectorXd::Zero(best.size());
            for (Eigen::Index i = 0; i < k; ++i) exact(free[i]) = y(i) / y.sum();
            if (score(exact) >= score(best)) best = exact;
        }
    }
    return best;
}

}  // namespace

std::pair<WeightVector, SolverReport> solve_constrained(ConstrainedObjective objective, const Eigen::MatrixXd& sigma,
                                                        const Eigen::VectorXd& mu, SolverOptions options) {
    check_psd(sigma);
    const auto n = sigma.rows();
    const bool needs_mu = objective.kind != ConstrainedObjective::Kind::GMV;
    if (needs_mu && mu.size() != n) fail(ErrorKind::BadInput, "expected-return vector has the wrong length");
    if (objective.kind == ConstrainedObjective::Kind::Markowitz && !(objective.lambda > 0.0)) {
        fail(ErrorKind::BadInput, "Markowitz risk aversion must be positive");
    }

    double scale = sigma.trace() / static_cast<double>(n);
    if (!(scale > 0.0)) scale = 1.0;
    const Eigen::MatrixXd s = sigma / scale;

    // Everything is minimized: f returns the loss, grad its gradient.
    std::function<double(const Eigen::VectorXd&)> f;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
    Eigen::VectorXd m;
    Scheme scheme;
    switch (objective.kind) {
        case ConstrainedObjective::Kind::GMV:
            scheme = {SchemeKind::GMV};
            f = [&](const Eigen::VectorXd& w) { return w.dot(s * w); };
            grad = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd { return 2.0 * (s * w); };
            break;
        case ConstrainedObjective::Kind::Markowitz:
            scheme = {SchemeKind::Markowitz, objective.lambda};
            m = mu / scale;
            f = [&](const Eigen::VectorXd& w) { return -(w.dot(m) - objective.lambda * w.dot(s * w)); };
            grad = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
                return -(m - 2.0 * objective.lambda * (s * w));
            };
            break;
        case ConstrainedObjective::Kind::MaxSharpe:
            scheme = {SchemeKind::MaxSharpe};
            m = mu / std::sqrt(scale);
            f = [&](const Eigen::VectorXd& w) {
                const double var = w.dot(s * w);
                return var > 0.0 ? -w.dot(m) / std::sqrt(var) : std::numeric_limits<double>::infinity();
            };
            grad = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
                const Eigen::VectorXd sw = s * w;
                const double var = w.dot(sw);
                const double sd = std::sqrt(var);
                return -(m / sd - (w.dot(m) / (var * sd)) * sw);
            };
            break;
    }

    constexpr int kMemory = 10;
    constexpr double kSufficient = 1e-4;
    constexpr double kStepMin = 1e-30;
    constexpr double kStepMax = 1e30;

    Eigen::VectorXd x = project_capped_simplex(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
    double fx = f(x);
    Eigen::VectorXd g = grad(x);
    Eigen::VectorXd best = x;
    double best_f = fx;
    std::deque<double> history{fx};

    auto stationarity = [&](const Eigen::VectorXd& point, const Eigen::VectorXd& gradient) {
        return (project_capped_simplex(point - gradient) - point).norm();
    };

    SolverReport report;
    double pg = stationarity(x, g);
    double step = 1.0;
    {
        const double inf_norm = (project_capped_simplex(x - g) - x).lpNorm<Eigen::Infinity>();
        if (inf_norm > 0.0) step = std::clamp(1.0 / inf_norm, kStepMin, kStepMax);
    }
    int iter = 0;
    for (; iter < options.max_iterations && pg > options.tolerance; ++iter) {
        const Eigen::VectorXd d = project_capped_simplex(x - step * g) - x;
        const double f_ref = *std::max_element(history.begin(), history.end());
        const double slope = g.dot(d);
        double t = 1.0;
        Eigen::VectorXd x_new = x + d;
        double f_new = f(x_new);
        while (!(f_new <= f_ref + kSufficient * t * slope) && t > 1e-20) {
            // safeguarded quadratic backtracking
            const double t_quad = -0.5 * slope * t * t / (f_new - fx - slope * t);
            t = (t_quad >= 0.1 * t && t_quad <= 0.9 * t) ? t_quad : 0.5 * t;
            x_new = x + t * d;
            f_new = f(x_new);
        }
        const Eigen::VectorXd g_new = grad(x_new);
        const Eigen::VectorXd sk = x_new - x;
        const Eigen::VectorXd yk = g_new - g;
        const double sty = sk.dot(yk);
        step = sty > 0.0 ? std::clamp(sk.squaredNorm() / sty, kStepMin, kStepMax) : kStepMax;
        if (sk.squaredNorm() == 0.0) {
            // no progress possible at this step length; fall back to a unit step
            step = 1.0;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        history.push_back(fx);
        if (history.size() > kMemory) history.pop_front();
        if (fx < best_f) {
            best_f = fx;
            best = x;
        }
        pg = stationarity(x, g);
    }

    Eigen::VectorXd chosen = pg <= options.tolerance ? x : best;
    if (objective.kind == ConstrainedObjective::Kind::MaxSharpe && m.maxCoeff() > 0.0) {
        const Eigen::VectorXd tangent = frontier_tangency(s, m, options);
        if (f(tangent) < f(chosen)) {
            chosen = tangent;
            pg = stationarity(chosen, grad(chosen));
        }
    } else if (objective.kind != ConstrainedObjective::Kind::MaxSharpe) {
        // Quadratic objectives: re-solve exactly on the identified face.
        const double lam = objective.kind == ConstrainedObjective::Kind::GMV ? 1.0 : objective.lambda;
        const Eigen::VectorXd lin = objective.kind == ConstrainedObjective::Kind::GMV ? Eigen::VectorXd::Zero(n) : m;
        if (auto polished = polish_on_face(s, lin, lam, chosen)) {
            const Eigen::VectorXd gp = grad(*polished);
            const double pg_polished = stationarity(*polished, gp);
            if (pg_polished <= std::max(pg, options.tolerance) && f(*polished) <= f(chosen) + 1e-14 * (1.0 + std::abs(f(chosen)))) {
                chosen = *polished;
                pg = pg_polished;
            }
        }
    }

    report.iterations = iter;
    report.final_gradient_norm = pg;
    report.converged = pg <= options.tolerance;
    return {WeightVector{chosen, scheme, true}, report};
}

Eigen::VectorXd regression_betas(const ReturnPanel& panel, Window window) {
    panel.check_window(window);
    if (window.size() < 2) fail(ErrorKind::InsufficientData, "betas need at least 2 observations");
    const Eigen::VectorXd rf = panel.risk_free(window);
    const Eigen::MatrixXd factors = panel.factor_returns(window).colwise() - rf;
    const Eigen::VectorXd bench = panel.benchmark_returns(window) - rf;
    const Eigen::VectorXd b = bench.array() - bench.mean();
    const double var_b = b.squaredNorm();
    if (!(var_b > 0.0)) fail(ErrorKind::DegenerateSeries, "benchmark excess return has zero variance");
    const Eigen::MatrixXd centered = factors.rowwise() - factors.colwise().mean();
    return (centered.transpose() * b) / var_b;
}

WeightVector implied_beta_from_betas(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& beta) {
    if (beta.size() != sigma.rows()) fail(ErrorKind::BadInput, "beta vector has the wrong length");
    const Eigen::VectorXd x = solve_spd(sigma, beta);
    const double quad = beta.dot(x);
    if (!(quad > 0.0)) fail(ErrorKind::DegenerateSeries, "beta' S^-1 beta is not positive");
    return {x / quad, {SchemeKind::ImpliedBeta}, false};
}

WeightVector implied_beta_weights(const Eigen::MatrixXd& sigma, const ReturnPanel& panel, Window window) {
    return implied_beta_from_betas(sigma, regression_betas(panel, window));
}

}  // namespace factorlab
