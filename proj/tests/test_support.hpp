#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "factorlab/error.hpp"
#include "factorlab/marketdata.hpp"
#include "factorlab/random.hpp"
#include "factorlab/viewgen.hpp"

namespace factorlab::testing {

/// Kind of the Error thrown by f; records a failure if nothing is thrown.
template <typename F>
ErrorKind error_kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorKind::IoError;
}

/// Benchmark at id 0, factors f0..f{n-1}, risk-free last.
inline FactorUniverse small_universe(std::size_t n) {
    std::vector<UniverseEntry> e;
    e.push_back({0, "BENCH", "benchmark", AssetClass::EquityUS, SeriesRole::Benchmark});
    for (std::size_t i = 0; i < n; ++i) {
        e.push_back({static_cast<int>(i + 1), "T" + std::to_string(i), "f" + std::to_string(i), AssetClass::EquityUS,
                     SeriesRole::Factor});
    }
    e.push_back({static_cast<int>(n + 1), "RF", "rf", AssetClass::Rate, SeriesRole::RiskFree});
    return FactorUniverse(std::move(e));
}

/// Consecutive weekdays from Monday 2021-01-04.
inline std::vector<Date> weekdays(std::size_t count, Date start = Date{std::chrono::year{2021}, std::chrono::month{1},
                                                                          std::chrono::day{4}}) {
    std::vector<Date> out;
    std::chrono::sys_days d{start};
    while (out.size() < count) {
        const std::chrono::weekday wd{d};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(d);
        d += std::chrono::days{1};
    }
    return out;
}

/// Panel on small_universe(N) from a T x N factor block plus benchmark and rf.
inline ReturnPanel make_panel(const Eigen::MatrixXd& factors, const Eigen::VectorXd& bench, const Eigen::VectorXd& rf) {
    const auto t = factors.rows();
    const auto n = factors.cols();
    Eigen::MatrixXd all(t, n + 2);
    all.col(0) = bench;
    all.middleCols(1, n) = factors;
    all.col(n + 1) = rf;
    return ReturnPanel(weekdays(static_cast<std::size_t>(t)), all, small_universe(static_cast<std::size_t>(n)));
}

inline ReturnPanel make_panel(const Eigen::MatrixXd& factors) {
    const auto t = factors.rows();
    return make_panel(factors, factors.rowwise().mean(), Eigen::VectorXd::Zero(t));
}

/// Gaussian one-factor returns with distinct drifts and volatilities.
inline ReturnPanel random_panel(std::size_t rows, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd f(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
    Eigen::VectorXd bench(static_cast<Eigen::Index>(rows));
    Eigen::VectorXd rf(static_cast<Eigen::Index>(rows));
    for (Eigen::Index t = 0; t < f.rows(); ++t) {
        const double market = 0.0004 + 0.01 * rng.normal();
        bench(t) = market;
        rf(t) = 0.00002;
        for (Eigen::Index j = 0; j < f.cols(); ++j) {
            const double beta = 0.3 + 0.1 * static_cast<double>(j % 7);
            const double vol = 0.004 + 0.001 * static_cast<double>(j % 5);
            f(t, j) = 0.0001 * static_cast<double>(j % 3) + beta * market + vol * rng.normal();
        }
    }
    return make_panel(f, bench, rf);
}

/// Random SPD matrix A A' + eps I with entries on a daily-return scale.
inline Eigen::MatrixXd random_spd(std::size_t n, Rng& rng, double scale = 1e-4, double ridge = 0.05) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
    Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(n) +
                        ridge * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    s = 0.5 * (s + s.transpose());
    return scale * s;
}

inline Eigen::VectorXd random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = scale * rng.normal();
    return v;
}

/// Uniform point on the probability simplex.
inline Eigen::VectorXd random_simplex_point(std::size_t n, Rng& rng) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = -std::log(1.0 - rng.uniform());
    return v / v.sum();
}

/// Labelled sequences whose label factor carries a positive drift throughout
/// the feature block, so the classes are separable.
inline std::vector<SequenceSample> separable_toy(std::size_t count, std::size_t n, std::size_t length,
                                                 std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SequenceSample> out;
    for (std::size_t s = 0; s < count; ++s) {
        SequenceSample sample;
        sample.label = static_cast<std::size_t>(rng.below(n));
        sample.features.resize(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(n));
        for (Eigen::Index t = 0; t < sample.features.rows(); ++t)
            for (Eigen::Index j = 0; j < sample.features.cols(); ++j)
                sample.features(t, j) = 0.01 * rng.normal() + (j == static_cast<Eigen::Index>(sample.label) ? 0.01 : 0.0);
        out.push_back(std::move(sample));
    }
    return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("factorlab_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string data_path(const std::string& name) { return std::string(FACTORLAB_DATA_DIR) + "/" + name; }

}  // namespace factorlab::testing
