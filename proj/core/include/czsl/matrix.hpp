#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace czsl {

// Dense row-major matrix of 64-bit floats. The only linear algebra the
// models need: products, transposed products, and elementwise passes.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const {
        return rows == o.rows && cols == o.cols;
    }

    bool all_finite() const;
    void fill(double v) { data.assign(data.size(), v); }
};

// C = A (r x k) * B (k x c)
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T (k x r) * B (k x c): accumulates over rows, used for dW = X^T dY.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// C = A (r x k) * B^T (c x k): used for dX = dY W^T.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

void add_inplace(Matrix& a, const Matrix& b);
void scale_inplace(Matrix& a, double s);

// Throws ShapeError with `context` in the message when shapes differ.
void require_shape(const Matrix& m, std::size_t rows, std::size_t cols,
                   const std::string& context);

} // namespace czsl
