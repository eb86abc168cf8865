#pragma once

#include "czsl/cada.hpp"

#include <cstdint>
#include <vector>

namespace czsl {

// Conditional VAE alternative to the two-branch model: one encoder over
// (feature | attribute), one decoder over (latent | attribute). Replay
// classification happens on decoded features rather than latents.
struct CvaeModel {
    MlpNet encoder; // (d_x + d_a) -> 2L
    MlpNet decoder; // (L + d_a) -> d_x
    std::size_t feature_dim = 0;
    std::size_t attribute_dim = 0;
    std::size_t latent_dim = 0;
    double kd_weight = 1.0;

    static CvaeModel create(std::size_t d_x, std::size_t d_a,
                            std::size_t latent_dim,
                            const std::vector<std::size_t>& encoder_hidden,
                            const std::vector<std::size_t>& decoder_hidden,
                            Rng& rng);

    std::vector<std::span<double>> params();
    std::vector<std::span<const double>> params() const;
};

struct CvaeGrad {
    MlpGrad encoder;
    MlpGrad decoder;

    static CvaeGrad zeros_like(const CvaeModel& model);
    std::vector<std::span<const double>> spans() const;
};

struct CvaeTeacher {
    MlpNet encoder;

    static CvaeTeacher from_model(const CvaeModel& model);
};

struct CvaeLossResult {
    double value = 0.0;
    CvaeGrad grad;
};

struct CvaeComponents {
    double recon = 0.0;
    double kl = 0.0;
    double kd = 0.0;
};

// Reconstruction (mean per-dim error) + KL + kd_weight * distillation on
// the raw encoder outputs. `noise` is B x L standard normal; `teacher` may
// be null.
CvaeLossResult cvae_loss(const CvaeModel& model, const CvaeTeacher* teacher,
                         const Matrix& features, const Matrix& attributes,
                         const Matrix& noise,
                         ReconLoss recon = ReconLoss::l1,
                         CvaeComponents* components = nullptr);

// Same loop shape as the two-branch trainer: minibatch Adam over task rows
// plus replay, distillation against the previous task's encoder, memory
// offers afterwards.
CvaeTeacher train_task_cvae(CvaeModel& model, const TaskSplit& task,
                            const FeatureDataset& dataset,
                            EpisodicMemory& memory, const CvaeTeacher* teacher,
                            const TrainConfig& config, TrainRngs rngs,
                            TrainTrace* trace = nullptr);

// Decodes count_per_class feature vectors for each listed class from prior
// noise conditioned on the class attribute. sample=false uses zero noise.
LabeledMatrix generate_features_cvae(const CvaeModel& model,
                                     const std::vector<std::uint32_t>& classes,
                                     const Matrix& attributes,
                                     std::size_t count_per_class, Rng& rng,
                                     bool sample = true);

} // namespace czsl
