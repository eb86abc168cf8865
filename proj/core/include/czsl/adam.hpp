#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace czsl {

// Adam over a fixed list of parameter tensors (one moment pair per tensor,
// flattened). The span order must match the one used at construction.
struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    static AdamState for_params(const std::vector<std::span<double>>& params,
                                double learning_rate = 1e-3,
                                double beta1 = 0.9, double beta2 = 0.999,
                                double epsilon = 1e-8);
};

// One bias-corrected Adam update, in place. Throws ShapeError when the
// span list does not mirror the state's accumulators.
void adam_step(AdamState& state, const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads);

} // namespace czsl
