#pragma once

#include "czsl/matrix.hpp"

#include <span>
#include <vector>

namespace czsl {

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

// Diagonal Gaussian over the latent space, stored as mean and log-variance.
// log_var is clamped to [kLogVarMin, kLogVarMax] on construction.
struct GaussianLatent {
    std::vector<double> mu;
    std::vector<double> log_var;

    GaussianLatent() = default;
    GaussianLatent(std::vector<double> mu_in, std::vector<double> log_var_in);

    std::size_t dim() const { return mu.size(); }
};

// mu + exp(0.5 * log_var) .* noise; noise is standard normal from the caller.
std::vector<double> reparameterize(const GaussianLatent& latent,
                                   std::span<const double> noise);

// KL(N(mu, diag(exp(log_var))) || N(0, I)):
// -0.5 * sum_i (1 + log_var_i - mu_i^2 - exp(log_var_i)). Nonnegative.
double kl_standard_normal(const GaussianLatent& latent);

// Batched form used in training: one latent per row.
struct LatentBatch {
    Matrix mu;      // B x L
    Matrix log_var; // B x L, clamped

    std::size_t batch() const { return mu.rows; }
    std::size_t dim() const { return mu.cols; }

    GaussianLatent latent_at(std::size_t row) const;
};

// Splits a B x 2L encoder output into (mu | log_var) and clamps log_var.
LatentBatch split_encoder_output(const Matrix& raw);

Matrix reparameterize_batch(const LatentBatch& latent, const Matrix& noise);

// Mean over the batch of per-sample KL terms.
double kl_batch_mean(const LatentBatch& latent);

// Gradient plumbing for the batched ops. All accumulate (+=) into the
// destination matrices so multiple loss terms can share one latent.
void reparameterize_backward(const LatentBatch& latent, const Matrix& noise,
                             const Matrix& dz, Matrix& dmu, Matrix& dlog_var);
void kl_batch_backward(const LatentBatch& latent, double weight, Matrix& dmu,
                       Matrix& dlog_var);

// Maps (dmu | dlog_var) back onto the raw B x 2L encoder output, zeroing
// log-var components that were clamped.
Matrix latent_grad_to_raw(const Matrix& raw, const Matrix& dmu,
                          const Matrix& dlog_var);

} // namespace czsl
