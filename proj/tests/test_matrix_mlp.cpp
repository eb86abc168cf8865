#include "czsl/errors.hpp"
#include "czsl/grad_check.hpp"
#include "czsl/matrix.hpp"
#include "czsl/mlp.hpp"

#include <doctest.h>

#include "support.hpp"

#include <sstream>

using namespace czsl;
using testsupport::mat;
using testsupport::random_matrix;

namespace {

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j)
            for (std::size_t k = 0; k < a.cols; ++k)
                c.at(i, j) += a.at(i, k) * b.at(k, j);
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
    return t;
}

} // namespace

TEST_CASE("matmul matches a hand example") {
    const Matrix a = mat(2, 3, {1, 2, 3, 4, 5, 6});
    const Matrix b = mat(3, 2, {7, 8, 9, 10, 11, 12});
    const Matrix c = matmul(a, b);
    CHECK(c.at(0, 0) == 58);
    CHECK(c.at(0, 1) == 64);
    CHECK(c.at(1, 0) == 139);
    CHECK(c.at(1, 1) == 154);
}

TEST_CASE("transposed products agree with the naive oracle on odd shapes") {
    Rng rng(3);
    // Deliberately non-square shapes on every side.
    const Matrix a = random_matrix(5, 3, rng);
    const Matrix b = random_matrix(5, 7, rng);
    const Matrix atb = matmul_at_b(a, b);
    const Matrix oracle_atb = naive_matmul(transpose(a), b);
    REQUIRE(atb.rows == 3);
    REQUIRE(atb.cols == 7);
    for (std::size_t i = 0; i < atb.data.size(); ++i) {
        CHECK(atb.data[i] == doctest::Approx(oracle_atb.data[i]).epsilon(1e-12));
    }

    const Matrix x = random_matrix(4, 6, rng);
    const Matrix y = random_matrix(2, 6, rng);
    const Matrix xyt = matmul_a_bt(x, y);
    const Matrix oracle_xyt = naive_matmul(x, transpose(y));
    REQUIRE(xyt.rows == 4);
    REQUIRE(xyt.cols == 2);
    for (std::size_t i = 0; i < xyt.data.size(); ++i) {
        CHECK(xyt.data[i] == doctest::Approx(oracle_xyt.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("shape mismatches are rejected") {
    const Matrix a(2, 3);
    const Matrix b(2, 3);
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
    CHECK_THROWS_AS(matmul_a_bt(a, Matrix(2, 4)), ShapeError);
    CHECK_THROWS_AS(matmul_at_b(a, Matrix(3, 3)), ShapeError);
    Matrix c(2, 3);
    CHECK_THROWS_AS(add_inplace(c, Matrix(3, 2)), ShapeError);
    CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("identity layer passes input through") {
    MlpNet net;
    net.layers.push_back(Layer{mat(2, 2, {1, 0, 0, 1}), {0, 0}, Activation::linear});
    const Matrix out = mlp_forward(net, mat(1, 2, {1, 2}));
    CHECK(out.at(0, 0) == 1);
    CHECK(out.at(0, 1) == 2);
}

TEST_CASE("relu clamps negatives") {
    MlpNet net;
    net.layers.push_back(
        Layer{mat(2, 2, {-1, 0, 0, -1}), {0, 0}, Activation::relu});
    const Matrix out = mlp_forward(net, mat(1, 2, {1, 2}));
    CHECK(out.at(0, 0) == 0);
    CHECK(out.at(0, 1) == 0);
}

TEST_CASE("two-layer forward matches straight-line arithmetic") {
    MlpNet net;
    net.layers.push_back(
        Layer{mat(2, 2, {1, 2, -1, 0.5}), {0.1, -0.2}, Activation::relu});
    net.layers.push_back(Layer{mat(2, 1, {0.3, -0.4}), {0.05}, Activation::linear});

    // x=[0.5,-0.5]: pre1 = 0.5*1 + (-0.5)*(-1) + 0.1 = 1.1
    //               pre2 = 0.5*2 + (-0.5)*0.5 - 0.2 = 0.55, both positive.
    // out = 1.1*0.3 + 0.55*(-0.4) + 0.05 = 0.16.
    const Matrix out = mlp_forward(net, mat(1, 2, {0.5, -0.5}));
    CHECK(out.at(0, 0) == doctest::Approx(0.16).epsilon(1e-12));
}

TEST_CASE("forward is deterministic bitwise") {
    Rng rng(17);
    const MlpNet net = MlpNet::dense(4, {8}, 3, rng);
    const Matrix input = random_matrix(5, 4, rng);
    const Matrix a = mlp_forward(net, input);
    const Matrix b = mlp_forward(net, input);
    CHECK(a.data == b.data);
}

TEST_CASE("scalar linear layer gradient is input times upstream") {
    MlpNet net;
    net.layers.push_back(Layer{mat(1, 1, {2.0}), {0.0}, Activation::linear});
    MlpCache cache;
    mlp_forward(net, mat(1, 1, {3.0}), cache);
    MlpGrad grad = MlpGrad::zeros_like(net);
    const Matrix dinput = mlp_backward(net, cache, mat(1, 1, {1.5}), grad);
    CHECK(grad.dweight[0].at(0, 0) == doctest::Approx(4.5));
    CHECK(grad.dbias[0][0] == doctest::Approx(1.5));
    CHECK(dinput.at(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("relu blocks gradient at negative pre-activations") {
    MlpNet net;
    net.layers.push_back(Layer{mat(1, 1, {1.0}), {0.0}, Activation::relu});
    MlpCache cache;
    mlp_forward(net, mat(1, 1, {-2.0}), cache);
    MlpGrad grad = MlpGrad::zeros_like(net);
    const Matrix dinput = mlp_backward(net, cache, mat(1, 1, {1.0}), grad);
    CHECK(grad.dweight[0].at(0, 0) == 0.0);
    CHECK(dinput.at(0, 0) == 0.0);
}

TEST_CASE("backward matches finite differences on a random net") {
    Rng rng(23);
    MlpNet net = MlpNet::dense(3, {5, 4}, 2, rng);
    const Matrix input = random_matrix(6, 3, rng);

    MlpCache cache;
    mlp_forward(net, input, cache);
    // Loss: sum of squared outputs; upstream = 2 * output.
    Matrix upstream = cache.post.back();
    scale_inplace(upstream, 2.0);
    MlpGrad grad = MlpGrad::zeros_like(net);
    mlp_backward(net, cache, upstream, grad);

    auto loss = [&]() {
        const Matrix out = mlp_forward(net, input);
        double acc = 0.0;
        for (double v : out.data) acc += v * v;
        return acc;
    };
    const FdReport report =
        finite_diff_check(loss, param_spans(net), grad_spans(grad));
    CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("net serialization round-trips bitwise") {
    Rng rng(31);
    const MlpNet net = MlpNet::dense(3, {4}, 2, rng);
    std::stringstream buf;
    serialize_net(buf, net);
    const MlpNet back = deserialize_net(buf);
    REQUIRE(back.layers.size() == net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        CHECK(back.layers[i].weight.data == net.layers[i].weight.data);
        CHECK(back.layers[i].bias == net.layers[i].bias);
        CHECK(back.layers[i].act == net.layers[i].act);
    }
}
