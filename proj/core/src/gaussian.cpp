#include "czsl/gaussian.hpp"

#include "czsl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace czsl {

GaussianLatent::GaussianLatent(std::vector<double> mu_in,
                               std::vector<double> log_var_in)
    : mu(std::move(mu_in)), log_var(std::move(log_var_in)) {
    if (mu.size() != log_var.size()) {
        throw ShapeError("GaussianLatent: mu and log_var lengths differ");
    }
    for (double& v : log_var) {
        v = std::clamp(v, kLogVarMin, kLogVarMax);
    }
}

std::vector<double> reparameterize(const GaussianLatent& latent,
                                   std::span<const double> noise) {
    if (noise.size() != latent.dim()) {
        throw ShapeError("reparameterize: noise length " +
                         std::to_string(noise.size()) + " vs latent dim " +
                         std::to_string(latent.dim()));
    }
    std::vector<double> z(latent.dim());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = latent.mu[i] + std::exp(0.5 * latent.log_var[i]) * noise[i];
    }
    return z;
}

double kl_standard_normal(const GaussianLatent& latent) {
    double acc = 0.0;
    for (std::size_t i = 0; i < latent.dim(); ++i) {
        const double lv = latent.log_var[i];
        acc += 1.0 + lv - latent.mu[i] * latent.mu[i] - std::exp(lv);
    }
    return -0.5 * acc;
}

GaussianLatent LatentBatch::latent_at(std::size_t row) const {
    auto m = mu.row(row);
    auto lv = log_var.row(row);
    return GaussianLatent(std::vector<double>(m.begin(), m.end()),
                          std::vector<double>(lv.begin(), lv.end()));
}

LatentBatch split_encoder_output(const Matrix& raw) {
    if (raw.cols % 2 != 0) {
        throw ShapeError("split_encoder_output: odd output width " +
                         std::to_string(raw.cols));
    }
    const std::size_t half = raw.cols / 2;
    LatentBatch out;
    out.mu = Matrix(raw.rows, half);
    out.log_var = Matrix(raw.rows, half);
    for (std::size_t r = 0; r < raw.rows; ++r) {
        for (std::size_t c = 0; c < half; ++c) {
            out.mu.at(r, c) = raw.at(r, c);
            out.log_var.at(r, c) =
                std::clamp(raw.at(r, half + c), kLogVarMin, kLogVarMax);
        }
    }
    return out;
}

Matrix reparameterize_batch(const LatentBatch& latent, const Matrix& noise) {
    if (!noise.same_shape(latent.mu)) {
        throw ShapeError("reparameterize_batch: noise shape mismatch");
    }
    Matrix z(latent.batch(), latent.dim());
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        z.data[i] = latent.mu.data[i] +
                    std::exp(0.5 * latent.log_var.data[i]) * noise.data[i];
    }
    return z;
}

double kl_batch_mean(const LatentBatch& latent) {
    if (latent.batch() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < latent.mu.data.size(); ++i) {
        const double lv = latent.log_var.data[i];
        const double m = latent.mu.data[i];
        acc += 1.0 + lv - m * m - std::exp(lv);
    }
    return -0.5 * acc / static_cast<double>(latent.batch());
}

void reparameterize_backward(const LatentBatch& latent, const Matrix& noise,
                             const Matrix& dz, Matrix& dmu, Matrix& dlog_var) {
    for (std::size_t i = 0; i < dz.data.size(); ++i) {
        dmu.data[i] += dz.data[i];
        dlog_var.data[i] += dz.data[i] * noise.data[i] * 0.5 *
                            std::exp(0.5 * latent.log_var.data[i]);
    }
}

void kl_batch_backward(const LatentBatch& latent, double weight, Matrix& dmu,
                       Matrix& dlog_var) {
    if (latent.batch() == 0) return;
    const double scale = weight / static_cast<double>(latent.batch());
    for (std::size_t i = 0; i < latent.mu.data.size(); ++i) {
        dmu.data[i] += scale * latent.mu.data[i];
        dlog_var.data[i] +=
            scale * 0.5 * (std::exp(latent.log_var.data[i]) - 1.0);
    }
}

Matrix latent_grad_to_raw(const Matrix& raw, const Matrix& dmu,
                          const Matrix& dlog_var) {
    const std::size_t half = raw.cols / 2;
    Matrix draw(raw.rows, raw.cols);
    for (std::size_t r = 0; r < raw.rows; ++r) {
        for (std::size_t c = 0; c < half; ++c) {
            draw.at(r, c) = dmu.at(r, c);
            const double v = raw.at(r, half + c);
            const bool clamped = v < kLogVarMin || v > kLogVarMax;
            draw.at(r, half + c) = clamped ? 0.0 : dlog_var.at(r, c);
        }
    }
    return draw;
}

} // namespace czsl
