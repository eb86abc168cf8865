#pragma once

#include "czsl/matrix.hpp"
#include "czsl/rng.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace czsl {

enum class Activation { relu, linear };

struct Layer {
    Matrix weight;            // in x out
    std::vector<double> bias; // out
    Activation act = Activation::linear;
};

// Plain fully connected net; batches are row vectors.
struct MlpNet {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.front().weight.rows; }
    std::size_t output_dim() const { return layers.back().weight.cols; }
    std::size_t param_count() const;

    // dims = {in, h1, ..., out}; one activation tag per layer.
    // Weights ~ U(-s, s) with s = sqrt(6 / (fan_in + fan_out)), biases zero.
    static MlpNet create(const std::vector<std::size_t>& dims,
                         const std::vector<Activation>& acts, Rng& rng);

    // ReLU hidden layers, linear output.
    static MlpNet dense(std::size_t in, const std::vector<std::size_t>& hidden,
                        std::size_t out, Rng& rng);
};

struct MlpCache {
    Matrix input;
    std::vector<Matrix> pre;  // pre-activation per layer
    std::vector<Matrix> post; // activated output per layer; post.back() = output
};

struct MlpGrad {
    std::vector<Matrix> dweight;
    std::vector<std::vector<double>> dbias;

    static MlpGrad zeros_like(const MlpNet& net);
    void add(const MlpGrad& other);
    void scale(double s);
};

Matrix mlp_forward(const MlpNet& net, const Matrix& input);
Matrix mlp_forward(const MlpNet& net, const Matrix& input, MlpCache& cache);

// Accumulates parameter gradients into `grad` and returns the input gradient.
// `upstream` is dLoss/dOutput for the forward pass recorded in `cache`.
Matrix mlp_backward(const MlpNet& net, const MlpCache& cache,
                    const Matrix& upstream, MlpGrad& grad);

// Flat views over parameters/gradients, one span per tensor, in a fixed
// order (layer 0 weight, layer 0 bias, layer 1 weight, ...). The same order
// is used by the optimizer, the gradient checker, and checkpoints.
std::vector<std::span<double>> param_spans(MlpNet& net);
std::vector<std::span<const double>> param_spans(const MlpNet& net);
std::vector<std::span<const double>> grad_spans(const MlpGrad& grad);

// Exact binary round trip (shapes, activations, weights), for checkpoints.
void serialize_net(std::ostream& out, const MlpNet& net);
MlpNet deserialize_net(std::istream& in);

} // namespace czsl
