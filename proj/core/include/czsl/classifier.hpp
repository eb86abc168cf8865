#pragma once

#include "czsl/matrix.hpp"
#include "czsl/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace czsl {

struct ClassifierConfig {
    std::size_t epochs = 40;
    std::size_t batch_size = 64;
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    // Reinitialize all rows before fitting instead of fine-tuning in place.
    bool from_scratch = false;
};

// Single-head linear softmax over whatever embedding the generator
// provides. The head covers every class met so far; rows for new classes
// are appended without touching existing ones, so task identity is never
// needed at prediction time.
class LinearSoftmaxClassifier {
public:
    LinearSoftmaxClassifier() = default;
    explicit LinearSoftmaxClassifier(std::size_t input_dim);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t num_classes() const { return class_ids_.size(); }
    const std::vector<std::uint32_t>& class_ids() const { return class_ids_; }
    bool has_class(std::uint32_t cls) const;

    const Matrix& weight() const { return weight_; }
    const std::vector<double>& bias() const { return bias_; }

    // Appends one weight row and bias per id, U(-s, s) with
    // s = sqrt(6 / (input_dim + 1)), bias zero. Ids must be new.
    void extend_classes(const std::vector<std::uint32_t>& ids, Rng& rng);

    // Minibatch Adam on softmax cross-entropy. Every label must map to a
    // registered class and every registered class must appear at least once.
    void fit(const Matrix& inputs, const std::vector<std::uint32_t>& labels,
             const ClassifierConfig& config, Rng& rng);

    struct Prediction {
        std::vector<std::uint32_t> labels; // argmax class id per row
        Matrix probabilities; // per row over class_ids() order, sums to 1
    };
    Prediction predict(const Matrix& inputs) const;
    std::vector<std::uint32_t> predict_labels(const Matrix& inputs) const;

    // Mean cross-entropy at the current parameters; fills the parameter
    // gradients when requested. fit() runs on exactly this function, which
    // keeps it checkable by finite differences.
    double cross_entropy(const Matrix& inputs,
                         const std::vector<std::uint32_t>& labels,
                         Matrix* dweight = nullptr,
                         std::vector<double>* dbias = nullptr) const;

    // Mutable views (weight, bias) for optimizers and gradient checks.
    std::vector<std::span<double>> param_spans();

    void serialize(std::ostream& out) const;
    static LinearSoftmaxClassifier deserialize(std::istream& in);

private:
    std::size_t row_of(std::uint32_t cls) const; // throws on unknown class
    Matrix logits(const Matrix& inputs) const;

    std::size_t input_dim_ = 0;
    Matrix weight_; // num_classes x input_dim
    std::vector<double> bias_;
    std::vector<std::uint32_t> class_ids_; // row -> class, append order
};

} // namespace czsl
