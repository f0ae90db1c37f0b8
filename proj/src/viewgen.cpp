#include "factorlab/viewgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "factorlab/error.hpp"
#include "factorlab/random.hpp"

namespace factorlab {

void ViewModelConfig::validate() const {
    if (sequence_length == 0 || window == 0 || train_span == 0 || hidden_size == 0 || epochs == 0) {
        fail(ErrorKind::BadInput, "view model sizes must be positive");
    }
    if (train_span != 4 * sequence_length) fail(ErrorKind::BadInput, "train_span must equal 4 * sequence_length");
    if (!(learning_rate > 0.0)) fail(ErrorKind::BadInput, "learning rate must be positive");
}

std::size_t ViewModelConfig::training_rows() const {
    return (samples_per_round() - 1) * window + sequence_length + window;
}

std::size_t argmax_lowest(const Eigen::VectorXd& values) {
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i) {
        if (values(i) > values(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
    }
    return best;
}

Eigen::VectorXd cumulative_returns(const Eigen::MatrixXd& block) {
    return (1.0 + block.array()).colwise().prod().transpose() - 1.0;
}

std::vector<SequenceSample> build_dataset(const ReturnPanel& panel, Window rows, const ViewModelConfig& config) {
    panel.check_window(rows);
    const std::size_t L = config.sequence_length;
    const std::size_t H = config.window;
    if (L == 0 || H == 0) fail(ErrorKind::BadInput, "sequence length and window must be positive");
    if (rows.size() < L + H) {
        fail(ErrorKind::InsufficientData, "dataset span of " + std::to_string(rows.size()) + " rows is shorter than " +
                                              std::to_string(L + H));
    }
    const Eigen::MatrixXd block = panel.factor_returns(rows);
    const std::size_t count = (rows.size() - L - H) / H + 1;
    std::vector<SequenceSample> samples;
    samples.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t start = k * H;
        SequenceSample s;
        s.features = block.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(L));
        s.label = argmax_lowest(
            cumulative_returns(block.middleRows(static_cast<Eigen::Index>(start + L), static_cast<Eigen::Index>(H))));
        s.feature_begin = rows.begin + start;
        s.label_begin = s.feature_begin + L;
        s.label_end = s.label_begin + H;
        samples.push_back(std::move(s));
    }
    return samples;
}

SequenceModel SequenceModel::initialize(std::size_t inputs, std::size_t hidden, std::size_t classes,
                                        std::uint64_t seed) {
    if (inputs == 0 || hidden == 0 || classes == 0) fail(ErrorKind::BadInput, "model sizes must be positive");
    const auto n = static_cast<Eigen::Index>(inputs);
    const auto h = static_cast<Eigen::Index>(hidden);
    const auto c = static_cast<Eigen::Index>(classes);
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto fill = [&](Eigen::MatrixXd& m) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
    };
    SequenceModel m;
    m.w_in.resize(4 * h, n);
    m.w_rec.resize(4 * h, h);
    m.w_out.resize(c, h);
    fill(m.w_in);
    fill(m.w_rec);
    fill(m.w_out);
    m.bias = Eigen::VectorXd::Zero(4 * h);
    m.bias.segment(h, h).setOnes();
    m.b_out = Eigen::VectorXd::Zero(c);
    m.input_mean = Eigen::VectorXd::Zero(n);
    m.input_scale = Eigen::VectorXd::Ones(n);
    return m;
}

std::size_t SequenceModel::parameter_count() const {
    return static_cast<std::size_t>(w_in.size() + w_rec.size() + bias.size() + w_out.size() + b_out.size());
}

Eigen::VectorXd SequenceModel::flat_parameters() const {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index at = 0;
    auto put = [&](const auto& m) {
        flat.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
    };
    put(w_in);
    put(w_rec);
    put(bias);
    put(w_out);
    put(b_out);
    return flat;
}

void SequenceModel::set_flat_parameters(const Eigen::VectorXd& flat) {
    if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
        fail(ErrorKind::BadInput, "parameter vector has the wrong length");
    }
    Eigen::Index at = 0;
    auto take = [&](auto& m) {
        Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
        at += m.size();
    };
    take(w_in);
    take(w_rec);
    take(bias);
    take(w_out);
    take(b_out);
}

namespace {

/// Standardized inputs for a batch, time-major: columns [t*B, (t+1)*B) hold step t.
struct Batch {
    Eigen::MatrixXd x;  // N x (L*B)
    Eigen::Index steps = 0;
    Eigen::Index size = 0;
};

Batch to_batch(const SequenceModel& model, const std::vector<const Eigen::MatrixXd*>& blocks) {
    Batch out;
    out.steps = blocks.front()->rows();
    out.size = static_cast<Eigen::Index>(blocks.size());
    const auto n = static_cast<Eigen::Index>(model.inputs());
    out.x.resize(n, out.steps * out.size);
    const Eigen::ArrayXd inv_scale = model.input_scale.array().inverse();
    for (Eigen::Index s = 0; s < out.size; ++s) {
        const auto& f = *blocks[static_cast<std::size_t>(s)];
        if (f.rows() != out.steps || f.cols() != n) fail(ErrorKind::BadInput, "feature block shape does not match the model");
        for (Eigen::Index t = 0; t < out.steps; ++t) {
            out.x.col(t * out.size + s) = ((f.row(t).transpose() - model.input_mean).array() * inv_scale).matrix();
        }
    }
    return out;
}

// Blocks are views, so taking one by value still writes through. tanh goes
// through the vectorized exp; Eigen's double tanh is scalar.
template <typename BlockView>
void sigmoid_in_place(BlockView z) {
    z = (1.0 + (-z.array()).exp()).inverse().matrix();
}

template <typename Expr>
auto fast_tanh(const Expr& x) {
    return 2.0 * (1.0 + (-2.0 * x.array()).exp()).inverse() - 1.0;
}

struct ForwardTrace {
    Eigen::MatrixXd gates;    // activated i, f, g, o stacked: 4H x (L*B)
    Eigen::MatrixXd cells;    // c_t for t = 0..L, block 0 is the zero state: H x ((L+1)*B)
    Eigen::MatrixXd hiddens;  // same layout as cells
    Eigen::MatrixXd cell_tanh;  // tanh(c_t) for t = 1..L: H x (L*B)
    Eigen::MatrixXd logits;
};

ForwardTrace forward(const SequenceModel& m, const Batch& batch) {
    const auto h = static_cast<Eigen::Index>(m.hidden());
    const Eigen::Index b = batch.size;
    ForwardTrace tr;
    tr.gates.noalias() = m.w_in * batch.x;
    tr.gates.colwise() += m.bias;
    tr.cells = Eigen::MatrixXd::Zero(h, (batch.steps + 1) * b);
    tr.hiddens = Eigen::MatrixXd::Zero(h, (batch.steps + 1) * b);
    tr.cell_tanh.resize(h, batch.steps * b);
    for (Eigen::Index t = 0; t < batch.steps; ++t) {
        auto z = tr.gates.middleCols(t * b, b);
        z.noalias() += m.w_rec * tr.hiddens.middleCols(t * b, b);
        sigmoid_in_place(z.topRows(2 * h));
        z.middleRows(2 * h, h) = fast_tanh(z.middleRows(2 * h, h)).matrix();
        sigmoid_in_place(z.bottomRows(h));
        tr.cells.middleCols((t + 1) * b, b) =
            z.middleRows(h, h).cwiseProduct(tr.cells.middleCols(t * b, b)) + z.topRows(h).cwiseProduct(z.middleRows(2 * h, h));
        tr.cell_tanh.middleCols(t * b, b) = fast_tanh(tr.cells.middleCols((t + 1) * b, b)).matrix();
        tr.hiddens.middleCols((t + 1) * b, b) = z.bottomRows(h).cwiseProduct(tr.cell_tanh.middleCols(t * b, b));
    }
    tr.logits = m.w_out * tr.hiddens.rightCols(b);
    tr.logits.colwise() += m.b_out;
    return tr;
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        const Eigen::ArrayXd e = (logits.col(j).array() - logits.col(j).maxCoeff()).exp();
        p.col(j) = (e / e.sum()).matrix();
    }
    return p;
}

std::vector<const Eigen::MatrixXd*> feature_pointers(const std::vector<SequenceSample>& samples) {
    std::vector<const Eigen::MatrixXd*> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(&s.features);
    return out;
}

double batch_loss_and_gradient(const SequenceModel& m, const Batch& batch, const std::vector<std::size_t>& labels,
                               Eigen::VectorXd* gradient) {
    const auto h = static_cast<Eigen::Index>(m.hidden());
    const auto b = static_cast<Eigen::Index>(labels.size());
    const ForwardTrace tr = forward(m, batch);
    const Eigen::MatrixXd p = softmax_columns(tr.logits);
    double loss = 0.0;
    for (Eigen::Index s = 0; s < b; ++s) {
        const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(s)]);
        if (y >= p.rows()) fail(ErrorKind::BadInput, "label outside the model's classes");
        loss -= std::log(std::max(p(y, s), std::numeric_limits<double>::min()));
    }
    loss /= static_cast<double>(b);
    if (!gradient) return loss;

    Eigen::MatrixXd dlogits = p;
    for (Eigen::Index s = 0; s < b; ++s) dlogits(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(s)]), s) -= 1.0;
    dlogits /= static_cast<double>(b);

    const Eigen::MatrixXd d_w_out = dlogits * tr.hiddens.rightCols(b).transpose();
    const Eigen::VectorXd d_b_out = dlogits.rowwise().sum();

    // gate pre-activation gradients for every step; weight gradients follow as two products
    Eigen::MatrixXd dz_all(4 * h, batch.steps * b);
    Eigen::MatrixXd dh = m.w_out.transpose() * dlogits;
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(h, b);
    for (Eigen::Index t = batch.steps; t-- > 0;) {
        const auto z = tr.gates.middleCols(t * b, b);
        const auto i = z.topRows(h).array();
        const auto f = z.middleRows(h, h).array();
        const auto g = z.middleRows(2 * h, h).array();
        const auto o = z.bottomRows(h).array();
        const auto tc = tr.cell_tanh.middleCols(t * b, b).array();
        dc.array() += dh.array() * o * (1.0 - tc.square());
        auto dz = dz_all.middleCols(t * b, b);
        dz.topRows(h) = (dc.array() * g * i * (1.0 - i)).matrix();
        dz.middleRows(h, h) = (dc.array() * tr.cells.middleCols(t * b, b).array() * f * (1.0 - f)).matrix();
        dz.middleRows(2 * h, h) = (dc.array() * i * (1.0 - g.square())).matrix();
        dz.bottomRows(h) = (dh.array() * tc * o * (1.0 - o)).matrix();
        dh.noalias() = m.w_rec.transpose() * dz;
        dc = (dc.array() * f).matrix();
    }
    const Eigen::MatrixXd d_w_in = dz_all * batch.x.transpose();
    const Eigen::MatrixXd d_w_rec = dz_all * tr.hiddens.leftCols(batch.steps * b).transpose();
    const Eigen::VectorXd d_bias = dz_all.rowwise().sum();

    gradient->resize(static_cast<Eigen::Index>(m.parameter_count()));
    Eigen::Index at = 0;
    auto put = [&](const auto& g) {
        gradient->segment(at, g.size()) = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
        at += g.size();
    };
    put(d_w_in);
    put(d_w_rec);
    put(d_bias);
    put(d_w_out);
    put(d_b_out);
    return loss;
}

std::vector<std::size_t> labels_of(const std::vector<SequenceSample>& samples) {
    std::vector<std::size_t> labels;
    labels.reserve(samples.size());
    for (const auto& s : samples) labels.push_back(s.label);
    return labels;
}

}  // namespace

Eigen::VectorXd SequenceModel::logits(const Eigen::MatrixXd& features) const {
    return forward(*this, to_batch(*this, {&features})).logits.col(0);
}

Eigen::VectorXd SequenceModel::probabilities(const Eigen::MatrixXd& features) const {
    return softmax_columns(logits(features)).col(0);
}

double loss_and_gradient(const SequenceModel& model, const std::vector<SequenceSample>& samples,
                         Eigen::VectorXd* gradient) {
    if (samples.empty()) fail(ErrorKind::InsufficientData, "no samples");
    return batch_loss_and_gradient(model, to_batch(model, feature_pointers(samples)), labels_of(samples), gradient);
}

SequenceModel train_sequence_model(const std::vector<SequenceSample>& samples, const ViewModelConfig& config) {
    if (samples.empty()) fail(ErrorKind::InsufficientData, "cannot train on an empty dataset");
    if (config.hidden_size == 0 || config.epochs == 0 || !(config.learning_rate > 0.0)) {
        fail(ErrorKind::BadInput, "hidden size, epochs and learning rate must be positive");
    }
    const auto& first = samples.front().features;
    const auto n = static_cast<std::size_t>(first.cols());
    SequenceModel model = SequenceModel::initialize(n, config.hidden_size, n, config.seed);

    // per-factor standardization over every training feature day
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(first.cols());
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(first.cols());
    double count = 0.0;
    for (const auto& s : samples) {
        if (s.features.rows() != first.rows() || s.features.cols() != first.cols()) {
            fail(ErrorKind::BadInput, "samples have inconsistent shapes");
        }
        sum += s.features.colwise().sum().transpose();
        count += static_cast<double>(s.features.rows());
    }
    model.input_mean = sum / count;
    for (const auto& s : samples) {
        sq += (s.features.rowwise() - model.input_mean.transpose()).array().square().colwise().sum().matrix().transpose();
    }
    model.input_scale = (sq / count).cwiseSqrt();
    for (Eigen::Index j = 0; j < model.input_scale.size(); ++j) {
        if (!(model.input_scale(j) > 0.0)) model.input_scale(j) = 1.0;
    }

    const Batch xs = to_batch(model, feature_pointers(samples));
    const auto labels = labels_of(samples);
    Eigen::VectorXd params = model.flat_parameters();
    Eigen::VectorXd grad;
    model.loss_history.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        model.loss_history.push_back(batch_loss_and_gradient(model, xs, labels, &grad));
        params -= config.learning_rate * grad;
        model.set_flat_parameters(params);
    }
    return model;
}

double training_accuracy(const SequenceModel& model, const std::vector<SequenceSample>& samples) {
    if (samples.empty()) return 0.0;
    const ForwardTrace tr = forward(model, to_batch(model, feature_pointers(samples)));
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        if (argmax_lowest(tr.logits.col(static_cast<Eigen::Index>(s))) == samples[s].label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

void save_model(const std::filesystem::path& path, const SequenceModel& model) {
    std::ostringstream out;
    auto row = [&](const std::string& name, const auto& m) {
        out << name << ',' << m.rows() << ',' << m.cols();
        for (Eigen::Index i = 0; i < m.size(); ++i) out << ',' << format_double(m.data()[i]);
        out << '\n';
    };
    row("w_in", model.w_in);
    row("w_rec", model.w_rec);
    row("bias", model.bias);
    row("w_out", model.w_out);
    row("b_out", model.b_out);
    row("input_mean", model.input_mean);
    row("input_scale", model.input_scale);
    write_text_file(path, out.str());
}

SequenceModel load_model(const std::filesystem::path& path) {
    SequenceModel model;
    auto read_into = [](const std::vector<std::string>& cells, auto& m) {
        const auto rows = parse_double(cells.at(1));
        const auto cols = parse_double(cells.at(2));
        if (!rows || !cols) fail(ErrorKind::BadInput, "model file: bad shape");
        m.resize(static_cast<Eigen::Index>(*rows), static_cast<Eigen::Index>(*cols));
        if (cells.size() != static_cast<std::size_t>(m.size()) + 3) fail(ErrorKind::BadInput, "model file: bad length");
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            const auto v = parse_double(cells[static_cast<std::size_t>(i) + 3]);
            if (!v) fail(ErrorKind::BadInput, "model file: bad value");
            m.data()[i] = *v;
        }
    };
    for (const auto& line : read_lines(path)) {
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        const auto& name = cells.front();
        if (name == "w_in") read_into(cells, model.w_in);
        else if (name == "w_rec") read_into(cells, model.w_rec);
        else if (name == "bias") read_into(cells, model.bias);
        else if (name == "w_out") read_into(cells, model.w_out);
        else if (name == "b_out") read_into(cells, model.b_out);
        else if (name == "input_mean") read_into(cells, model.input_mean);
        else if (name == "input_scale") read_into(cells, model.input_scale);
        else fail(ErrorKind::BadInput, "model file: unknown block '" + name + "'");
    }
    const auto h = model.w_rec.cols();
    if (model.w_rec.rows() != 4 * h || model.w_in.rows() != 4 * h || model.bias.size() != 4 * h ||
        model.w_out.cols() != h || model.b_out.size() != model.w_out.rows() ||
        model.input_mean.size() != model.w_in.cols() || model.input_scale.size() != model.w_in.cols()) {
        fail(ErrorKind::BadInput, "model file: inconsistent shapes");
    }
    return model;
}

GeneratedView one_hot_view(std::size_t factor, std::size_t n) {
    if (factor >= n) fail(ErrorKind::BadInput, "view factor out of range");
    GeneratedView v;
    v.factor = factor;
    v.q = kGeneratedViewQ;
    v.one_hot_row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    v.one_hot_row(static_cast<Eigen::Index>(factor)) = 1.0;
    return v;
}

GeneratedView predict_view(const SequenceModel& model, const Eigen::MatrixXd& features) {
    return one_hot_view(argmax_lowest(model.logits(features)), model.classes());
}

GeneratedView momentum_oracle_view(const ReturnPanel& panel, Window span, const ViewModelConfig& config) {
    panel.check_window(span);
    if (span.size() < config.sequence_length || config.sequence_length == 0) {
        fail(ErrorKind::InsufficientData, "momentum view needs sequence_length rows");
    }
    const Window tail{span.end - config.sequence_length, span.end};
    return one_hot_view(argmax_lowest(cumulative_returns(panel.factor_returns(tail))), panel.factor_count());
}

GeneratedView LstmViewGenerator::generate(const ReturnPanel& panel, Window training, Window features,
                                          const ViewModelConfig& config, std::uint64_t seed) const {
    ViewModelConfig round_config = config;
    round_config.seed = seed;
    const auto model = train_sequence_model(build_dataset(panel, training, config), round_config);
    return predict_view(model, panel.factor_returns(features));
}

GeneratedView MomentumViewGenerator::generate(const ReturnPanel& panel, Window, Window features,
                                              const ViewModelConfig& config, std::uint64_t) const {
    return momentum_oracle_view(panel, features, config);
}

std::unique_ptr<ViewGenerator> make_view_generator(const std::string& name) {
    if (name == "lstm") return std::make_unique<LstmViewGenerator>();
    if (name == "momentum") return std::make_unique<MomentumViewGenerator>();
    fail(ErrorKind::BadInput, "unknown view generator '" + name + "' (expected lstm or momentum)");
}

std::string views_json(const std::vector<DatedView>& views) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& v : views) {
        nlohmann::ordered_json item;
        item["date"] = format_date(v.date);
        item["factor"] = v.factor;
        item["q"] = v.q;
        doc.push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

}  // namespace factorlab
