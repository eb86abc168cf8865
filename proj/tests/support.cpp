#include "support.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>

namespace czsl::testsupport {

namespace {

// Regularized lower incomplete gamma P(a, x), series expansion for x < a+1
// and Lentz continued fraction otherwise.
double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 0.0;
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

} // namespace

double chi_square_p_value(double stat, double dof) {
    return 1.0 - gamma_p(dof / 2.0, stat / 2.0);
}

std::vector<std::vector<double>> ring_oracle(
    const std::vector<std::pair<std::uint32_t, double>>& stream,
    std::uint32_t num_classes, std::size_t queue_size) {
    std::vector<std::deque<double>> queues(num_classes);
    for (const auto& [cls, value] : stream) {
        queues[cls].push_back(value);
        if (queues[cls].size() > queue_size) queues[cls].pop_front();
    }
    std::vector<std::vector<double>> out(num_classes);
    for (std::uint32_t c = 0; c < num_classes; ++c) {
        out[c].assign(queues[c].begin(), queues[c].end());
    }
    return out;
}

std::vector<std::vector<std::vector<double>>> mof_oracle(
    const std::vector<std::pair<std::uint32_t, std::vector<double>>>& stream,
    std::uint32_t num_classes, std::size_t queue_size) {
    struct Candidate {
        std::vector<double> feature;
        std::size_t arrival = 0;
    };
    std::vector<std::vector<Candidate>> kept(num_classes);
    std::vector<std::vector<double>> sums(num_classes);
    std::vector<std::size_t> counts(num_classes, 0);

    std::size_t arrival = 0;
    for (const auto& [cls, feature] : stream) {
        if (sums[cls].empty()) sums[cls].assign(feature.size(), 0.0);
        for (std::size_t i = 0; i < feature.size(); ++i) {
            sums[cls][i] += feature[i];
        }
        counts[cls] += 1;
        kept[cls].push_back(Candidate{feature, arrival++});
        if (kept[cls].size() > queue_size) {
            std::vector<double> mean(sums[cls]);
            for (double& v : mean) v /= static_cast<double>(counts[cls]);
            std::size_t worst = 0;
            double worst_d = -1.0;
            for (std::size_t i = 0; i < kept[cls].size(); ++i) {
                double d = 0.0;
                for (std::size_t j = 0; j < mean.size(); ++j) {
                    const double diff = kept[cls][i].feature[j] - mean[j];
                    d += diff * diff;
                }
                // Equal distances evict the earlier arrival.
                if (d > worst_d ||
                    (d == worst_d &&
                     kept[cls][i].arrival < kept[cls][worst].arrival)) {
                    worst = i;
                    worst_d = d;
                }
            }
            kept[cls].erase(kept[cls].begin() +
                            static_cast<std::ptrdiff_t>(worst));
        }
    }

    std::vector<std::vector<std::vector<double>>> out(num_classes);
    for (std::uint32_t c = 0; c < num_classes; ++c) {
        for (const Candidate& cand : kept[c]) out[c].push_back(cand.feature);
    }
    return out;
}

} // namespace czsl::testsupport
