#include "factorlab/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "factorlab/error.hpp"

namespace factorlab {

namespace {

Eigen::MatrixXd sample_covariance_of(const Eigen::MatrixXd& x) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    Eigen::MatrixXd s = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
    // exact symmetry
    return 0.5 * (s + s.transpose());
}

void require_rows(const ReturnPanel& panel, Window window) {
    panel.check_window(window);
    if (window.size() < 2) {
        fail(ErrorKind::InsufficientData, "covariance needs at least 2 observations, got " +
                                              std::to_string(window.size()));
    }
    if (window.size() < panel.factor_count() + 1) {
        std::clog << "warning: covariance window of " << window.size() << " rows for "
                  << panel.factor_count() << " factors is rank deficient\n";
    }
}

}  // namespace

std::string to_string(EstimatorKind kind) { return kind == EstimatorKind::Sample ? "sample" : "shrunk"; }

std::optional<EstimatorKind> parse_estimator(std::string_view text) {
    if (text == "sample") return EstimatorKind::Sample;
    if (text == "shrunk") return EstimatorKind::Shrunk;
    return std::nullopt;
}

CovEstimate CovEstimate::scaled(double multiplier) const {
    CovEstimate out = *this;
    out.sigma = multiplier * sigma;
    return out;
}

CovEstimate sample_cov(const ReturnPanel& panel, Window window) {
    require_rows(panel, window);
    CovEstimate est;
    est.sigma = sample_covariance_of(panel.factor_returns(window));
    est.estimator = EstimatorKind::Sample;
    est.start = panel.dates()[window.begin];
    est.end = panel.dates()[window.end - 1];
    return est;
}

Eigen::MatrixXd constant_correlation_target(const Eigen::MatrixXd& sample) {
    const auto n = sample.rows();
    const Eigen::VectorXd sd = sample.diagonal().cwiseSqrt();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(sd(i) > 0.0)) fail(ErrorKind::DegenerateSeries, "factor " + std::to_string(i) + " has zero variance");
    }
    double r_bar = 0.0;
    if (n > 1) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i != j) r_bar += sample(i, j) / (sd(i) * sd(j));
            }
        }
        r_bar /= static_cast<double>(n * (n - 1));
    }
    Eigen::MatrixXd target(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) target(i, j) = r_bar * (sd(i) * sd(j));
    }
    target.diagonal() = sample.diagonal();
    return target;
}

double ledoit_wolf_intensity(const Eigen::MatrixXd& observations) {
    const auto t = observations.rows();
    const auto n = observations.cols();
    if (t < 2) fail(ErrorKind::InsufficientData, "shrinkage needs at least 2 observations");
    if (n < 2) return 0.0;
    const double tt = static_cast<double>(t);

    const Eigen::RowVectorXd mean = observations.colwise().mean();
    const Eigen::MatrixXd x = observations.rowwise() - mean;
    const Eigen::MatrixXd s = (x.transpose() * x) / tt;  // ML moments for the estimator
    const Eigen::VectorXd var = s.diagonal();
    const Eigen::VectorXd sd = var.cwiseSqrt();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(sd(i) > 0.0)) fail(ErrorKind::DegenerateSeries, "factor " + std::to_string(i) + " has zero variance");
    }

    double r_bar = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) r_bar += s(i, j) / (sd(i) * sd(j));
        }
    }
    r_bar /= static_cast<double>(n * (n - 1));
    Eigen::MatrixXd target(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) target(i, j) = r_bar * (sd(i) * sd(j));
    }
    target.diagonal() = var;

    // pi-hat: sum of asymptotic variances of the sample covariance entries
    const Eigen::MatrixXd y = x.array().square().matrix();
    const Eigen::MatrixXd phi_mat = (y.transpose() * y) / tt - s.array().square().matrix();
    const double phi = phi_mat.sum();

    // rho-hat: asymptotic covariances between the target and the sample entries
    const Eigen::MatrixXd x3 = x.array().cube().matrix();
    const Eigen::MatrixXd term1 = (x3.transpose() * x) / tt;
    double rho = phi_mat.diagonal().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double theta = term1(i, j) - var(i) * s(i, j);
            rho += r_bar * (sd(j) / sd(i)) * theta;
        }
    }

    const double gamma = (s - target).squaredNorm();
    if (!(gamma > 0.0)) return 0.0;
    const double kappa = (phi - rho) / gamma;
    return std::clamp(kappa / tt, 0.0, 1.0);
}

CovEstimate shrunk_cov(const ReturnPanel& panel, Window window, std::optional<double> intensity) {
    require_rows(panel, window);
    const Eigen::MatrixXd obs = panel.factor_returns(window);
    const Eigen::MatrixXd s = sample_covariance_of(obs);
    const Eigen::MatrixXd target = constant_correlation_target(s);

    double delta = 0.0;
    if (intensity) {
        if (!(*intensity >= 0.0 && *intensity <= 1.0)) {
            fail(ErrorKind::BadInput, "shrinkage intensity must lie in [0, 1]");
        }
        delta = *intensity;
    } else {
        delta = ledoit_wolf_intensity(obs);
    }

    CovEstimate est;
    est.sigma = delta * target + (1.0 - delta) * s;
    est.sigma.diagonal() = s.diagonal();
    est.estimator = EstimatorKind::Shrunk;
    est.intensity = delta;
    est.start = panel.dates()[window.begin];
    est.end = panel.dates()[window.end - 1];
    return est;
}

CovEstimate estimate_cov(const ReturnPanel& panel, Window window, EstimatorKind kind) {
    return kind == EstimatorKind::Sample ? sample_cov(panel, window) : shrunk_cov(panel, window);
}

MomentEstimate mean_excess(const ReturnPanel& panel, Window window) {
    panel.check_window(window);
    if (window.size() == 0) fail(ErrorKind::InsufficientData, "empty window");
    const Eigen::MatrixXd r = panel.factor_returns(window);
    const Eigen::VectorXd rf = panel.risk_free(window);
    MomentEstimate m;
    m.mu = (r.colwise() - rf).colwise().mean().transpose();
    m.rf_mean = rf.mean();
    return m;
}

std::string matrix_csv(const Eigen::MatrixXd& matrix, const std::vector<std::string>& names) {
    std::ostringstream out;
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        out << names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << ',' << format_double(matrix(i, j));
        out << '\n';
    }
    return out.str();
}

}  // namespace factorlab
