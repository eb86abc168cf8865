#pragma once

#include "czsl/dataset.hpp"
#include "czsl/gaussian.hpp"
#include "czsl/memory.hpp"
#include "czsl/mlp.hpp"
#include "czsl/task_stream.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace czsl {

enum class ReconLoss { l1, l2 };

// Two-branch VAE aligning feature and attribute modalities. Encoders emit
// (mu | log_var); classification happens on generated latent features.
struct CadaModel {
    MlpNet feature_encoder;   // d_x -> 2L
    MlpNet attribute_encoder; // d_a -> 2L
    MlpNet feature_decoder;   // L -> d_x
    MlpNet attribute_decoder; // L -> d_a
    std::size_t latent_dim = 0;
    double gamma = 1.0;     // cross-alignment weight
    double delta = 1.0;     // distribution-alignment weight
    double kd_weight = 1.0; // distillation weight

    std::size_t feature_dim() const { return feature_encoder.input_dim(); }
    std::size_t attribute_dim() const { return attribute_encoder.input_dim(); }

    static CadaModel create(std::size_t d_x, std::size_t d_a,
                            std::size_t latent_dim,
                            const std::vector<std::size_t>& encoder_hidden,
                            const std::vector<std::size_t>& decoder_hidden,
                            Rng& rng);

    std::vector<std::span<double>> params();
    std::vector<std::span<const double>> params() const;
};

struct CadaGrad {
    MlpGrad feature_encoder;
    MlpGrad attribute_encoder;
    MlpGrad feature_decoder;
    MlpGrad attribute_decoder;

    static CadaGrad zeros_like(const CadaModel& model);
    std::vector<std::span<const double>> spans() const;
};

// Read-only copy of the previous task's encoders; never updated at task t.
struct CadaTeacher {
    MlpNet feature_encoder;
    MlpNet attribute_encoder;

    static CadaTeacher from_model(const CadaModel& model);
};

// Standard-normal draws for the two reparameterizations, one row per sample.
struct NoiseBatch {
    Matrix feature;   // B x L
    Matrix attribute; // B x L

    static NoiseBatch draw(std::size_t batch, std::size_t latent_dim, Rng& rng);
};

struct CadaLossResult {
    double value = 0.0;
    CadaGrad grad;
};

// Sum of the two per-branch VAE objectives: reconstruction (mean per-sample
// per-dim error, L1 by default) plus KL to the standard normal, averaged
// over the batch.
CadaLossResult vae_loss(const CadaModel& model, const Matrix& features,
                        const Matrix& attributes, const NoiseBatch& noise,
                        ReconLoss recon = ReconLoss::l1);

// Cross-alignment: each decoder reconstructs the other modality from the
// reparameterized latent of the opposite encoder.
CadaLossResult ca_loss(const CadaModel& model, const Matrix& features,
                       const Matrix& attributes, const NoiseBatch& noise);

// Distribution alignment between the two latent batches:
// mean over the batch of sqrt(||mu_A - mu_F||^2 + sum_i (sigma_A,i -
// sigma_F,i)^2), sigma = exp(0.5 log_var). Gradients are with respect to the
// latent parameters; callers chain them through their encoders.
struct DaLossResult {
    double value = 0.0;
    Matrix dmu_f, dlog_var_f;
    Matrix dmu_a, dlog_var_a;
};
DaLossResult da_loss(const LatentBatch& latent_f, const LatentBatch& latent_a);

// Distillation against the frozen teacher on the full (mu | log_var)
// encoder outputs; mean absolute difference per output element. Only the
// student receives gradients.
CadaLossResult kd_loss(const CadaModel& model, const CadaTeacher& teacher,
                       const Matrix& features, const Matrix& attributes);

struct CadaComponents {
    double vae = 0.0;
    double ca = 0.0;
    double da = 0.0;
    double kd = 0.0;
};

// vae + gamma * ca + delta * da + kd_weight * kd, one shared forward pass.
// `teacher` may be null (first task); the kd term is then exactly zero.
CadaLossResult total_loss_cada(const CadaModel& model,
                               const CadaTeacher* teacher,
                               const Matrix& features, const Matrix& attributes,
                               const NoiseBatch& noise,
                               ReconLoss recon = ReconLoss::l1,
                               CadaComponents* components = nullptr);

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double gamma = 1.0;
    double delta = 1.0;
    double kd_weight = 1.0;
    bool replay_enabled = true;
    bool kd_enabled = true;
    ReconLoss recon = ReconLoss::l1;
};

struct EpochTraceEntry {
    std::size_t task_id = 0;
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    std::uint64_t param_hash = 0;
};
using TrainTrace = std::vector<EpochTraceEntry>;

struct TrainRngs {
    Rng* training = nullptr; // shuffling + noise
    Rng* memory = nullptr;   // reservoir slots
};

// Minibatch Adam over the task's training rows, stacked with the memory
// snapshot when replay is enabled. Attributes are joined by label at batch
// assembly. After the epochs, every current-task sample is offered to the
// memory. Returns the frozen encoder copy that becomes the next teacher.
CadaTeacher train_task_cada(CadaModel& model, const TaskSplit& task,
                            const FeatureDataset& dataset,
                            EpisodicMemory& memory,
                            const CadaTeacher* teacher,
                            const TrainConfig& config, TrainRngs rngs,
                            TrainTrace* trace = nullptr);

struct LabeledMatrix {
    Matrix rows;
    std::vector<std::uint32_t> labels;

    std::size_t size() const { return rows.rows; }
    void append(const LabeledMatrix& other);
};

struct GenerationCounts {
    std::size_t per_seen_class = 30;
    std::size_t per_unseen_class = 30;
};

// Latents for classifier training. Classes with available feature rows
// (current task plus replay) are sampled through the feature encoder;
// classes without rows fall back to the attribute encoder, which is what
// makes zero-shot and replay-free operation possible. With sample=false the
// encoder mean is returned instead of a reparameterized draw.
LabeledMatrix generate_latents_cada(const CadaModel& model,
                                    const LabeledMatrix& available_features,
                                    const std::vector<std::uint32_t>& active_classes,
                                    const Matrix& attributes,
                                    const GenerationCounts& counts, Rng& rng,
                                    bool sample = true);

// Deterministic test-time embedding: feature-encoder mean.
Matrix encode_mean_cada(const CadaModel& model, const Matrix& features);

} // namespace czsl
