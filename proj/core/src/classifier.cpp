#include "czsl/classifier.hpp"

#include "czsl/adam.hpp"
#include "czsl/binio.hpp"
#include "czsl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace czsl {

LinearSoftmaxClassifier::LinearSoftmaxClassifier(std::size_t input_dim)
    : input_dim_(input_dim) {
    if (input_dim == 0) throw ConfigError("classifier input_dim must be positive");
    weight_ = Matrix(0, input_dim);
}

bool LinearSoftmaxClassifier::has_class(std::uint32_t cls) const {
    return std::find(class_ids_.begin(), class_ids_.end(), cls) !=
           class_ids_.end();
}

std::size_t LinearSoftmaxClassifier::row_of(std::uint32_t cls) const {
    const auto it = std::find(class_ids_.begin(), class_ids_.end(), cls);
    if (it == class_ids_.end()) {
        throw UsageError("class " + std::to_string(cls) +
                         " is not registered with the classifier");
    }
    return static_cast<std::size_t>(it - class_ids_.begin());
}

void LinearSoftmaxClassifier::extend_classes(
    const std::vector<std::uint32_t>& ids, Rng& rng) {
    if (input_dim_ == 0) throw UsageError("classifier not initialized");
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const bool repeated_in_batch =
            std::find(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(i),
                      ids[i]) != ids.begin() + static_cast<std::ptrdiff_t>(i);
        if (has_class(ids[i]) || repeated_in_batch) {
            throw UsageError("class " + std::to_string(ids[i]) +
                             " is already registered");
        }
    }
    const double s = std::sqrt(6.0 / (static_cast<double>(input_dim_) + 1.0));
    for (std::uint32_t cls : ids) {
        weight_.data.resize(weight_.data.size() + input_dim_);
        ++weight_.rows;
        auto row = weight_.row(weight_.rows - 1);
        for (double& w : row) w = rng.uniform_range(-s, s);
        bias_.push_back(0.0);
        class_ids_.push_back(cls);
    }
}

Matrix LinearSoftmaxClassifier::logits(const Matrix& inputs) const {
    require_shape(inputs, inputs.rows, input_dim_, "classifier input");
    Matrix out = matmul_a_bt(inputs, weight_);
    for (std::size_t r = 0; r < out.rows; ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < out.cols; ++c) row[c] += bias_[c];
    }
    return out;
}

void LinearSoftmaxClassifier::fit(const Matrix& inputs,
                                  const std::vector<std::uint32_t>& labels,
                                  const ClassifierConfig& config, Rng& rng) {
    if (class_ids_.empty()) throw UsageError("classifier has no classes");
    if (inputs.rows != labels.size()) {
        throw ShapeError("label count " + std::to_string(labels.size()) +
                         " does not match input rows " +
                         std::to_string(inputs.rows));
    }
    if (config.epochs == 0 || config.batch_size == 0) {
        throw ConfigError("classifier epochs and batch_size must be positive");
    }
    require_shape(inputs, inputs.rows, input_dim_, "classifier input");

    std::vector<std::size_t> samples_per_class(class_ids_.size(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++samples_per_class[row_of(labels[i])];
    }
    for (std::size_t r = 0; r < samples_per_class.size(); ++r) {
        if (samples_per_class[r] == 0) {
            throw UsageError("class " + std::to_string(class_ids_[r]) +
                             " has no training samples");
        }
    }

    if (config.from_scratch) {
        const double s =
            std::sqrt(6.0 / (static_cast<double>(input_dim_) + 1.0));
        for (double& w : weight_.data) w = rng.uniform_range(-s, s);
        std::fill(bias_.begin(), bias_.end(), 0.0);
    }

    std::vector<std::span<double>> params = param_spans();
    AdamState adam =
        AdamState::for_params(params, config.learning_rate, config.beta1,
                              config.beta2, config.epsilon);

    const std::size_t n = inputs.rows;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t b = std::min(config.batch_size, n - start);
            Matrix batch(b, input_dim_);
            std::vector<std::uint32_t> batch_labels(b);
            for (std::size_t r = 0; r < b; ++r) {
                auto src = inputs.row(order[start + r]);
                std::copy(src.begin(), src.end(), batch.row(r).begin());
                batch_labels[r] = labels[order[start + r]];
            }
            Matrix dweight(weight_.rows, weight_.cols);
            std::vector<double> dbias(bias_.size(), 0.0);
            const double loss =
                cross_entropy(batch, batch_labels, &dweight, &dbias);
            if (!std::isfinite(loss)) {
                throw NumericError("non-finite classifier loss");
            }
            std::vector<std::span<const double>> grads = {
                {dweight.data.data(), dweight.data.size()},
                {dbias.data(), dbias.size()}};
            adam_step(adam, params, grads);
        }
    }
}

double LinearSoftmaxClassifier::cross_entropy(
    const Matrix& inputs, const std::vector<std::uint32_t>& labels,
    Matrix* dweight, std::vector<double>* dbias) const {
    if (class_ids_.empty()) throw UsageError("classifier has no classes");
    if (inputs.rows != labels.size()) {
        throw ShapeError("label count " + std::to_string(labels.size()) +
                         " does not match input rows " +
                         std::to_string(inputs.rows));
    }
    const std::size_t b = inputs.rows;
    const std::size_t classes = class_ids_.size();
    const Matrix scores = logits(inputs);
    Matrix dlogits(b, classes);
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(b);
    for (std::size_t r = 0; r < b; ++r) {
        auto row = scores.row(r);
        const double peak = *std::max_element(row.begin(), row.end());
        double denom = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            denom += std::exp(row[c] - peak);
        }
        const std::size_t target = row_of(labels[r]);
        loss -= (row[target] - peak - std::log(denom)) * inv_b;
        for (std::size_t c = 0; c < classes; ++c) {
            const double p = std::exp(row[c] - peak) / denom;
            dlogits.at(r, c) = (p - (c == target ? 1.0 : 0.0)) * inv_b;
        }
    }
    if (dweight != nullptr) {
        *dweight = matmul_at_b(dlogits, inputs);
    }
    if (dbias != nullptr) {
        dbias->assign(classes, 0.0);
        for (std::size_t r = 0; r < b; ++r) {
            for (std::size_t c = 0; c < classes; ++c) {
                (*dbias)[c] += dlogits.at(r, c);
            }
        }
    }
    return loss;
}

std::vector<std::span<double>> LinearSoftmaxClassifier::param_spans() {
    return {{weight_.data.data(), weight_.data.size()},
            {bias_.data(), bias_.size()}};
}

LinearSoftmaxClassifier::Prediction
LinearSoftmaxClassifier::predict(const Matrix& inputs) const {
    if (class_ids_.empty()) throw UsageError("classifier has no classes");
    Prediction pred;
    pred.probabilities = logits(inputs);
    pred.labels.resize(inputs.rows);
    for (std::size_t r = 0; r < inputs.rows; ++r) {
        auto row = pred.probabilities.row(r);
        const double peak = *std::max_element(row.begin(), row.end());
        double denom = 0.0;
        for (double& v : row) {
            v = std::exp(v - peak);
            denom += v;
        }
        std::size_t best = 0;
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] /= denom;
            if (row[c] > row[best]) best = c;
        }
        pred.labels[r] = class_ids_[best];
    }
    return pred;
}

std::vector<std::uint32_t>
LinearSoftmaxClassifier::predict_labels(const Matrix& inputs) const {
    return predict(inputs).labels;
}

void LinearSoftmaxClassifier::serialize(std::ostream& out) const {
    write_le<std::uint64_t>(out, input_dim_);
    write_le<std::uint64_t>(out, class_ids_.size());
    for (std::uint32_t cls : class_ids_) write_le<std::uint32_t>(out, cls);
    write_f64_vec(out, weight_.data);
    write_f64_vec(out, bias_);
}

LinearSoftmaxClassifier
LinearSoftmaxClassifier::deserialize(std::istream& in) {
    LinearSoftmaxClassifier clf;
    clf.input_dim_ = read_le<std::uint64_t>(in);
    const auto classes = read_le<std::uint64_t>(in);
    clf.class_ids_.resize(classes);
    for (auto& cls : clf.class_ids_) cls = read_le<std::uint32_t>(in);
    clf.weight_ = Matrix(classes, clf.input_dim_, read_f64_vec(in));
    clf.bias_ = read_f64_vec(in);
    if (clf.bias_.size() != classes) {
        throw IoError("classifier bias length does not match class count");
    }
    return clf;
}

} // namespace czsl
