#pragma once

#include "czsl/matrix.hpp"
#include "czsl/memory.hpp"
#include "czsl/rng.hpp"

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace czsl::testsupport {

// Upper tail of the chi-square distribution with `dof` degrees of freedom,
// via the regularized incomplete gamma function.
double chi_square_p_value(double stat, double dof);

inline Matrix mat(std::size_t rows, std::size_t cols,
                  std::initializer_list<double> values) {
    return Matrix(rows, cols, std::vector<double>(values));
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                            double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = scale * rng.gaussian();
    return m;
}

inline MemoryEntry entry(double value, std::uint32_t label,
                         std::size_t task_id = 1) {
    return MemoryEntry{{value}, label, {0.0}, task_id};
}

// Reference replay of a ring-buffer stream: per class, the last
// min(k, queue_size) offered values in order.
std::vector<std::vector<double>> ring_oracle(
    const std::vector<std::pair<std::uint32_t, double>>& stream,
    std::uint32_t num_classes, std::size_t queue_size);

// Step-by-step re-simulation of the mean-of-features policy from scratch,
// recomputing every candidate distance against the evolving mean at each
// offer. Returns the retained feature vectors per class, insertion order.
std::vector<std::vector<std::vector<double>>> mof_oracle(
    const std::vector<std::pair<std::uint32_t, std::vector<double>>>& stream,
    std::uint32_t num_classes, std::size_t queue_size);

} // namespace czsl::testsupport
