#include "czsl/mlp.hpp"

#include "czsl/binio.hpp"
#include "czsl/errors.hpp"

#include <cmath>

namespace czsl {

std::size_t MlpNet::param_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

MlpNet MlpNet::create(const std::vector<std::size_t>& dims,
                      const std::vector<Activation>& acts, Rng& rng) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1) {
        throw ShapeError("mlp create: need dims >= 2 and one activation per layer");
    }
    MlpNet net;
    net.layers.reserve(acts.size());
    for (std::size_t l = 0; l < acts.size(); ++l) {
        Layer layer;
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        layer.weight = Matrix(fan_in, fan_out);
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& w : layer.weight.data) {
            w = rng.uniform_range(-s, s);
        }
        layer.bias.assign(fan_out, 0.0);
        layer.act = acts[l];
        net.layers.push_back(std::move(layer));
    }
    return net;
}

MlpNet MlpNet::dense(std::size_t in, const std::vector<std::size_t>& hidden,
                     std::size_t out, Rng& rng) {
    std::vector<std::size_t> dims;
    dims.push_back(in);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    std::vector<Activation> acts(hidden.size(), Activation::relu);
    acts.push_back(Activation::linear);
    return create(dims, acts, rng);
}

MlpGrad MlpGrad::zeros_like(const MlpNet& net) {
    MlpGrad g;
    g.dweight.reserve(net.layers.size());
    g.dbias.reserve(net.layers.size());
    for (const Layer& l : net.layers) {
        g.dweight.emplace_back(l.weight.rows, l.weight.cols);
        g.dbias.emplace_back(l.bias.size(), 0.0);
    }
    return g;
}

void MlpGrad::add(const MlpGrad& other) {
    if (other.dweight.size() != dweight.size()) {
        throw ShapeError("MlpGrad::add: layer count mismatch");
    }
    for (std::size_t l = 0; l < dweight.size(); ++l) {
        add_inplace(dweight[l], other.dweight[l]);
        for (std::size_t i = 0; i < dbias[l].size(); ++i) {
            dbias[l][i] += other.dbias[l][i];
        }
    }
}

void MlpGrad::scale(double s) {
    for (std::size_t l = 0; l < dweight.size(); ++l) {
        scale_inplace(dweight[l], s);
        for (double& b : dbias[l]) b *= s;
    }
}

namespace {

void apply_layer(const Layer& layer, const Matrix& input, Matrix& pre, Matrix& post) {
    pre = matmul(input, layer.weight);
    for (std::size_t r = 0; r < pre.rows; ++r) {
        double* row = pre.data.data() + r * pre.cols;
        for (std::size_t c = 0; c < pre.cols; ++c) {
            row[c] += layer.bias[c];
        }
    }
    post = pre;
    if (layer.act == Activation::relu) {
        for (double& v : post.data) {
            if (v < 0.0) v = 0.0;
        }
    }
}

} // namespace

Matrix mlp_forward(const MlpNet& net, const Matrix& input) {
    MlpCache cache;
    return mlp_forward(net, input, cache);
}

Matrix mlp_forward(const MlpNet& net, const Matrix& input, MlpCache& cache) {
    if (input.cols != net.input_dim()) {
        throw ShapeError("mlp forward: input cols " + std::to_string(input.cols) +
                         " vs net input dim " + std::to_string(net.input_dim()));
    }
    cache.input = input;
    cache.pre.assign(net.layers.size(), Matrix());
    cache.post.assign(net.layers.size(), Matrix());
    const Matrix* cur = &cache.input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        apply_layer(net.layers[l], *cur, cache.pre[l], cache.post[l]);
        cur = &cache.post[l];
    }
    return cache.post.back();
}

Matrix mlp_backward(const MlpNet& net, const MlpCache& cache,
                    const Matrix& upstream, MlpGrad& grad) {
    if (cache.post.empty() || cache.post.size() != net.layers.size()) {
        throw ShapeError("mlp backward: cache does not match net");
    }
    if (!upstream.same_shape(cache.post.back())) {
        throw ShapeError("mlp backward: upstream shape mismatch");
    }
    if (grad.dweight.size() != net.layers.size()) {
        throw ShapeError("mlp backward: grad does not match net");
    }
    Matrix d = upstream;
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const Layer& layer = net.layers[li];
        // Gate through the activation.
        if (layer.act == Activation::relu) {
            const Matrix& pre = cache.pre[li];
            for (std::size_t i = 0; i < d.data.size(); ++i) {
                if (pre.data[i] <= 0.0) d.data[i] = 0.0;
            }
        }
        const Matrix& layer_input = (li == 0) ? cache.input : cache.post[li - 1];
        add_inplace(grad.dweight[li], matmul_at_b(layer_input, d));
        for (std::size_t r = 0; r < d.rows; ++r) {
            const double* row = d.data.data() + r * d.cols;
            for (std::size_t c = 0; c < d.cols; ++c) {
                grad.dbias[li][c] += row[c];
            }
        }
        d = matmul_a_bt(d, layer.weight);
    }
    return d; // input gradient
}

std::vector<std::span<double>> param_spans(MlpNet& net) {
    std::vector<std::span<double>> spans;
    spans.reserve(net.layers.size() * 2);
    for (Layer& l : net.layers) {
        spans.emplace_back(l.weight.data);
        spans.emplace_back(l.bias);
    }
    return spans;
}

std::vector<std::span<const double>> param_spans(const MlpNet& net) {
    std::vector<std::span<const double>> spans;
    spans.reserve(net.layers.size() * 2);
    for (const Layer& l : net.layers) {
        spans.emplace_back(l.weight.data);
        spans.emplace_back(l.bias);
    }
    return spans;
}

std::vector<std::span<const double>> grad_spans(const MlpGrad& grad) {
    std::vector<std::span<const double>> spans;
    spans.reserve(grad.dweight.size() * 2);
    for (std::size_t l = 0; l < grad.dweight.size(); ++l) {
        spans.emplace_back(grad.dweight[l].data);
        spans.emplace_back(grad.dbias[l]);
    }
    return spans;
}

void serialize_net(std::ostream& out, const MlpNet& net) {
    write_le<std::uint64_t>(out, net.layers.size());
    for (const Layer& l : net.layers) {
        write_le<std::uint64_t>(out, l.weight.rows);
        write_le<std::uint64_t>(out, l.weight.cols);
        write_le<std::uint32_t>(out, l.act == Activation::relu ? 0u : 1u);
        write_f64_vec(out, l.weight.data);
        write_f64_vec(out, l.bias);
    }
}

MlpNet deserialize_net(std::istream& in) {
    MlpNet net;
    const auto layers = read_le<std::uint64_t>(in);
    net.layers.resize(layers);
    for (Layer& l : net.layers) {
        const auto rows = read_le<std::uint64_t>(in);
        const auto cols = read_le<std::uint64_t>(in);
        const auto act = read_le<std::uint32_t>(in);
        if (act > 1) throw IoError("unknown activation tag in stream");
        l.act = act == 0 ? Activation::relu : Activation::linear;
        l.weight = Matrix(rows, cols, read_f64_vec(in));
        l.bias = read_f64_vec(in);
        if (l.bias.size() != cols) {
            throw IoError("bias length does not match layer width");
        }
    }
    return net;
}

} // namespace czsl
