#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "factorlab/marketdata.hpp"

namespace factorlab {

struct ViewModelConfig {
    std::size_t sequence_length = 126;
    std::size_t window = 10;
    std::size_t train_span = 504;
    std::size_t hidden_size = 32;
    std::size_t epochs = 150;
    double learning_rate = 0.05;
    std::uint64_t seed = 42;

    /// BadInput unless train_span = 4 * sequence_length and every size is positive.
    void validate() const;
    /// Samples per training set: floor(train_span / window).
    std::size_t samples_per_round() const { return train_span / window; }
    /// Rows a training set spans: the last sample's features plus its label days.
    std::size_t training_rows() const;
};

/// One training example: an L x N block of raw factor returns and the factor
/// with the best cumulative return over the following `window` days.
struct SequenceSample {
    Eigen::MatrixXd features;
    std::size_t label = 0;
    std::size_t feature_begin = 0;  // panel row of the first feature day
    std::size_t label_begin = 0;    // first label row (= feature_begin + L)
    std::size_t label_end = 0;      // one past the last label row
};

/// Lowest index wins ties.
std::size_t argmax_lowest(const Eigen::VectorXd& values);

/// Per-column prod(1 + r) - 1 over the rows of a block.
Eigen::VectorXd cumulative_returns(const Eigen::MatrixXd& block);

/// Samples start every `window` rows from rows.begin while their label days
/// fit inside rows: floor((len - L - H) / window) + 1 of them.
std::vector<SequenceSample> build_dataset(const ReturnPanel& panel, Window rows, const ViewModelConfig& config);

/// Single-layer LSTM (gate order i, f, g, o) whose last hidden state feeds an
/// affine softmax head over the N factors. Inputs are standardized with the
/// training-set per-factor mean and scale stored in the model.
struct SequenceModel {
    Eigen::MatrixXd w_in;   // 4H x N
    Eigen::MatrixXd w_rec;  // 4H x H
    Eigen::VectorXd bias;   // 4H
    Eigen::MatrixXd w_out;  // C x H
    Eigen::VectorXd b_out;  // C
    Eigen::VectorXd input_mean;
    Eigen::VectorXd input_scale;
    std::vector<double> loss_history;

    std::size_t inputs() const { return static_cast<std::size_t>(w_in.cols()); }
    std::size_t hidden() const { return static_cast<std::size_t>(w_rec.cols()); }
    std::size_t classes() const { return static_cast<std::size_t>(w_out.rows()); }

    /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases, forget bias 1,
    /// identity standardization.
    static SequenceModel initialize(std::size_t inputs, std::size_t hidden, std::size_t classes, std::uint64_t seed);

    std::size_t parameter_count() const;
    Eigen::VectorXd flat_parameters() const;
    void set_flat_parameters(const Eigen::VectorXd& flat);

    /// Softmax output for one L x N feature block.
    Eigen::VectorXd probabilities(const Eigen::MatrixXd& features) const;
    Eigen::VectorXd logits(const Eigen::MatrixXd& features) const;
};

/// Mean cross-entropy over the samples; fills the gradient with respect to
/// flat_parameters() when requested.
double loss_and_gradient(const SequenceModel& model, const std::vector<SequenceSample>& samples,
                         Eigen::VectorXd* gradient);

/// Full-batch gradient descent for config.epochs epochs from a seeded start.
SequenceModel train_sequence_model(const std::vector<SequenceSample>& samples, const ViewModelConfig& config);

double training_accuracy(const SequenceModel& model, const std::vector<SequenceSample>& samples);

void save_model(const std::filesystem::path& path, const SequenceModel& model);
SequenceModel load_model(const std::filesystem::path& path);

inline constexpr double kGeneratedViewQ = 0.01;

struct GeneratedView {
    std::size_t factor = 0;
    double q = kGeneratedViewQ;
    Eigen::VectorXd one_hot_row;
};

GeneratedView one_hot_view(std::size_t factor, std::size_t n);

GeneratedView predict_view(const SequenceModel& model, const Eigen::MatrixXd& features);

/// Factor with the best cumulative return over the last sequence_length rows.
GeneratedView momentum_oracle_view(const ReturnPanel& panel, Window span, const ViewModelConfig& config);

/// Produces one view per backtest round from the training and feature rows.
class ViewGenerator {
public:
    virtual ~ViewGenerator() = default;
    virtual std::string name() const = 0;
    virtual GeneratedView generate(const ReturnPanel& panel, Window training, Window features,
                                   const ViewModelConfig& config, std::uint64_t seed) const = 0;
};

class LstmViewGenerator final : public ViewGenerator {
public:
    std::string name() const override { return "lstm"; }
    GeneratedView generate(const ReturnPanel& panel, Window training, Window features,
                           const ViewModelConfig& config, std::uint64_t seed) const override;
};

class MomentumViewGenerator final : public ViewGenerator {
public:
    std::string name() const override { return "momentum"; }
    GeneratedView generate(const ReturnPanel& panel, Window training, Window features,
                           const ViewModelConfig& config, std::uint64_t seed) const override;
};

std::unique_ptr<ViewGenerator> make_view_generator(const std::string& name);

struct DatedView {
    Date date;
    std::string factor;
    double q = kGeneratedViewQ;
};

/// JSON array of {date, factor, q}.
std::string views_json(const std::vector<DatedView>& views);

}  // namespace factorlab
