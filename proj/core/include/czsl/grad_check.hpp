#pragma once

#include <functional>
#include <span>
#include <vector>

namespace czsl {

struct FdReport {
    std::vector<double> per_tensor_max; // worst relative error per tensor
    double max_rel_error = 0.0;
    std::size_t worst_tensor = 0;
    std::size_t worst_index = 0;

    bool within(double tolerance) const { return max_rel_error < tolerance; }
};

// Central-difference gradient verification. `loss_fn` must be deterministic
// (noise frozen by the caller) and is re-evaluated with each parameter
// perturbed by +/-step. `analytic` mirrors `params` span-for-span.
//
// Relative error is |a - n| / (|a| + |n|); pairs where both magnitudes fall
// below 1e-8 count as zero. Throws NumericError on a non-finite loss.
FdReport finite_diff_check(const std::function<double()>& loss_fn,
                           const std::vector<std::span<double>>& params,
                           const std::vector<std::span<const double>>& analytic,
                           double step = 1e-5);

} // namespace czsl
