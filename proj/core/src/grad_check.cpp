#include "czsl/grad_check.hpp"

#include "czsl/errors.hpp"

#include <cmath>

namespace czsl {

FdReport finite_diff_check(const std::function<double()>& loss_fn,
                           const std::vector<std::span<double>>& params,
                           const std::vector<std::span<const double>>& analytic,
                           double step) {
    if (params.size() != analytic.size()) {
        throw ShapeError("finite_diff_check: span count mismatch");
    }
    FdReport report;
    report.per_tensor_max.assign(params.size(), 0.0);
    for (std::size_t t = 0; t < params.size(); ++t) {
        auto p = params[t];
        auto a = analytic[t];
        if (p.size() != a.size()) {
            throw ShapeError("finite_diff_check: span size mismatch at slot " +
                             std::to_string(t));
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double saved = p[i];
            p[i] = saved + step;
            const double up = loss_fn();
            p[i] = saved - step;
            const double down = loss_fn();
            p[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw NumericError("finite_diff_check: non-finite loss at tensor " +
                                   std::to_string(t) + " index " +
                                   std::to_string(i));
            }
            const double numeric = (up - down) / (2.0 * step);
            const double aa = std::abs(a[i]);
            const double nn = std::abs(numeric);
            double err = 0.0;
            if (aa > 1e-8 || nn > 1e-8) {
                err = std::abs(a[i] - numeric) / (aa + nn);
            }
            if (err > report.max_rel_error) {
                report.max_rel_error = err;
                report.worst_tensor = t;
                report.worst_index = i;
            }
            if (err > report.per_tensor_max[t]) {
                report.per_tensor_max[t] = err;
            }
        }
    }
    return report;
}

} // namespace czsl
