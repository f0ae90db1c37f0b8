#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "factorlab/viewgen.hpp"
#include "test_support.hpp"

using namespace factorlab;
using namespace factorlab::testing;

namespace {

ViewModelConfig small_config() {
    ViewModelConfig c;
    c.sequence_length = 5;
    c.window = 2;
    c.train_span = 20;
    c.hidden_size = 4;
    c.epochs = 5;
    return c;
}

double max_relative_gradient_error(SequenceModel model, const std::vector<SequenceSample>& samples) {
    Eigen::VectorXd grad;
    loss_and_gradient(model, samples, &grad);
    const Eigen::VectorXd theta = model.flat_parameters();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = 1e-5;
        Eigen::VectorXd up = theta;
        Eigen::VectorXd down = theta;
        up(i) += h;
        down(i) -= h;
        model.set_flat_parameters(up);
        const double fu = loss_and_gradient(model, samples, nullptr);
        model.set_flat_parameters(down);
        const double fd = loss_and_gradient(model, samples, nullptr);
        const double numeric = (fu - fd) / (2.0 * h);
        const double err = std::abs(numeric - grad(i)) / std::max({1e-6, std::abs(numeric), std::abs(grad(i))});
        worst = std::max(worst, err);
    }
    model.set_flat_parameters(theta);
    return worst;
}

}  // namespace

TEST(ViewModelConfig, DefaultsAndValidation) {
    ViewModelConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.samples_per_round(), 50u);
    EXPECT_EQ(c.training_rows(), 49u * 10u + 126u + 10u);
    c.train_span = 500;
    EXPECT_EQ(error_kind_of([&] { c.validate(); }), ErrorKind::BadInput);
    c = {};
    c.window = 0;
    EXPECT_EQ(error_kind_of([&] { c.validate(); }), ErrorKind::BadInput);
    c = {};
    c.learning_rate = 0.0;
    EXPECT_EQ(error_kind_of([&] { c.validate(); }), ErrorKind::BadInput);
}

TEST(Helpers, ArgmaxPrefersLowestIndexOnTies) {
    EXPECT_EQ(argmax_lowest(Eigen::Vector3d(1.0, 3.0, 3.0)), 1u);
    EXPECT_EQ(argmax_lowest(Eigen::Vector3d(-1.0, -1.0, -2.0)), 0u);
}

TEST(Helpers, CumulativeReturnsCompound) {
    Eigen::MatrixXd b(2, 2);
    b << 0.1, -0.5, 0.1, 1.0;
    const auto c = cumulative_returns(b);
    EXPECT_NEAR(c(0), 0.21, 1e-15);
    EXPECT_NEAR(c(1), 0.0, 1e-15);
}

TEST(BuildDataset, LabelsAndWindowsOnHandPanel) {
    const std::size_t rows = 30;
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(rows, 3);
    // factor (row / 2) % 3 wins each two-day block
    for (std::size_t r = 0; r < rows; ++r) f(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>((r / 2) % 3)) = 0.01;
    const auto panel = make_panel(f);
    const auto cfg = small_config();
    const auto samples = build_dataset(panel, {3, 28}, cfg);
    ASSERT_EQ(samples.size(), (25u - 5u - 2u) / 2u + 1u);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        EXPECT_EQ(s.feature_begin, 3 + 2 * k);
        EXPECT_EQ(s.label_begin, s.feature_begin + 5);
        EXPECT_EQ(s.label_end, s.label_begin + 2);
        EXPECT_LE(s.label_end, 28u);
        EXPECT_EQ(s.features, f.middleRows(static_cast<Eigen::Index>(s.feature_begin), 5));
        const auto cum = cumulative_returns(f.middleRows(static_cast<Eigen::Index>(s.label_begin), 2));
        EXPECT_EQ(s.label, argmax_lowest(cum));
    }
    EXPECT_EQ(error_kind_of([&] { build_dataset(panel, {0, 6}, cfg); }), ErrorKind::InsufficientData);
}

TEST(BuildDataset, DefaultConfigShape) {
    const auto panel = random_panel(700, 20, 4);
    ViewModelConfig cfg;
    const auto samples = build_dataset(panel, {0, cfg.training_rows()}, cfg);
    ASSERT_EQ(samples.size(), 50u);
    EXPECT_EQ(samples.front().features.rows(), 126);
    EXPECT_EQ(samples.front().features.cols(), 20);
    EXPECT_EQ(samples.back().label_end, cfg.training_rows());
}

TEST(SequenceModel, InitializationIsSeededAndBounded) {
    const auto a = SequenceModel::initialize(3, 4, 3, 5);
    const auto b = SequenceModel::initialize(3, 4, 3, 5);
    const auto c = SequenceModel::initialize(3, 4, 3, 6);
    EXPECT_EQ(a.flat_parameters(), b.flat_parameters());
    EXPECT_NE(a.flat_parameters(), c.flat_parameters());
    EXPECT_EQ(a.parameter_count(), 16u * 3u + 16u * 4u + 16u + 3u * 4u + 3u);
    EXPECT_LE(a.w_in.cwiseAbs().maxCoeff(), 0.5);
    EXPECT_EQ(a.bias.segment(4, 4), Eigen::VectorXd::Ones(4));
    EXPECT_EQ(a.bias.head(4), Eigen::VectorXd::Zero(4));
    EXPECT_EQ(error_kind_of([] { SequenceModel::initialize(0, 4, 3, 1); }), ErrorKind::BadInput);
}

TEST(SequenceModel, FlatParametersRoundTrip) {
    auto m = SequenceModel::initialize(2, 3, 2, 1);
    Rng rng(3);
    const auto v = random_vector(m.parameter_count(), rng);
    m.set_flat_parameters(v);
    EXPECT_EQ(m.flat_parameters(), v);
    EXPECT_EQ(error_kind_of([&] { m.set_flat_parameters(Eigen::VectorXd::Zero(3)); }), ErrorKind::BadInput);
}

TEST(SequenceModel, ProbabilitiesFormADistribution) {
    const auto m = SequenceModel::initialize(3, 5, 3, 2);
    Rng rng(1);
    Eigen::MatrixXd x(7, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const auto p = m.probabilities(x);
    EXPECT_NEAR(p.sum(), 1.0, 1e-14);
    EXPECT_GT(p.minCoeff(), 0.0);
    EXPECT_EQ(error_kind_of([&] { m.probabilities(Eigen::MatrixXd::Zero(7, 2)); }), ErrorKind::BadInput);
}

TEST(SequenceModel, GradientMatchesCentralDifferences) {
    auto model = SequenceModel::initialize(2, 4, 2, 9);
    Rng rng(2);
    model.bias = random_vector(16, rng, 0.3);
    model.b_out = random_vector(2, rng, 0.3);
    const auto samples = separable_toy(5, 2, 3, 4);
    EXPECT_LT(max_relative_gradient_error(model, samples), 1e-4);
}

TEST(SequenceModel, GradientIncludesStandardization) {
    auto model = SequenceModel::initialize(3, 3, 3, 1);
    model.input_mean = Eigen::Vector3d(0.01, -0.02, 0.0);
    model.input_scale = Eigen::Vector3d(0.5, 2.0, 0.1);
    EXPECT_LT(max_relative_gradient_error(model, separable_toy(4, 3, 4, 8)), 1e-4);
}

TEST(Training, LearnsSeparableToy) {
    const auto samples = separable_toy(60, 3, 8, 11);
    ViewModelConfig cfg;
    cfg.hidden_size = 8;
    cfg.epochs = 200;
    cfg.learning_rate = 0.5;
    const auto model = train_sequence_model(samples, cfg);
    EXPECT_GE(training_accuracy(model, samples), 0.95);
    ASSERT_EQ(model.loss_history.size(), 200u);
    EXPECT_LT(model.loss_history.back(), model.loss_history.front());
}

TEST(Training, DeterministicForSeed) {
    const auto samples = separable_toy(20, 3, 6, 1);
    ViewModelConfig cfg;
    cfg.hidden_size = 5;
    cfg.epochs = 10;
    const auto a = train_sequence_model(samples, cfg);
    const auto b = train_sequence_model(samples, cfg);
    EXPECT_EQ(a.flat_parameters(), b.flat_parameters());
    EXPECT_EQ(error_kind_of([&] { train_sequence_model({}, cfg); }), ErrorKind::InsufficientData);
}

TEST(Training, ModelFileRoundTrip) {
    const auto samples = separable_toy(10, 2, 4, 3);
    ViewModelConfig cfg;
    cfg.hidden_size = 3;
    cfg.epochs = 3;
    const auto model = train_sequence_model(samples, cfg);
    const auto dir = scratch_dir("model");
    save_model(dir / "m.csv", model);
    const auto back = load_model(dir / "m.csv");
    EXPECT_EQ(back.flat_parameters(), model.flat_parameters());
    EXPECT_EQ(back.input_scale, model.input_scale);
    EXPECT_EQ(back.logits(samples[0].features), model.logits(samples[0].features));
}

TEST(Views, OneHotAndMomentumOracle) {
    const auto v = one_hot_view(2, 4);
    EXPECT_EQ(v.one_hot_row, Eigen::Vector4d(0, 0, 1, 0));
    EXPECT_EQ(v.q, 0.01);
    EXPECT_EQ(error_kind_of([] { one_hot_view(4, 4); }), ErrorKind::BadInput);

    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(12, 3);
    f.topRows(6).col(0).setConstant(0.05);     // early winner, outside the tail
    f.bottomRows(5).col(2).setConstant(0.01);  // recent winner
    const auto panel = make_panel(f);
    auto cfg = small_config();
    EXPECT_EQ(momentum_oracle_view(panel, panel.full(), cfg).factor, 2u);
    const auto gen = make_view_generator("momentum");
    EXPECT_EQ(gen->generate(panel, {0, 0}, {0, 12}, cfg, 1).factor, 2u);
    EXPECT_EQ(error_kind_of([] { make_view_generator("oracle"); }), ErrorKind::BadInput);
}

TEST(Views, JsonListing) {
    const std::vector<DatedView> v{{weekdays(1)[0], "us_tech", 0.01}};
    EXPECT_EQ(views_json(v), "[\n  {\n    \"date\": \"2021-01-04\",\n    \"factor\": \"us_tech\",\n    \"q\": 0.01\n  }\n]\n");
}
