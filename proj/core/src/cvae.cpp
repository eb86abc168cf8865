#include "czsl/cvae.hpp"

#include "czsl/adam.hpp"
#include "czsl/binio.hpp"
#include "czsl/errors.hpp"
#include "czsl/gaussian.hpp"
#include "train_common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace czsl {

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Matrix hconcat(const Matrix& left, const Matrix& right) {
    require_shape(right, left.rows, right.cols, "concatenated block");
    Matrix out(left.rows, left.cols + right.cols);
    for (std::size_t r = 0; r < left.rows; ++r) {
        auto dst = out.row(r);
        auto l = left.row(r);
        auto rr = right.row(r);
        std::copy(l.begin(), l.end(), dst.begin());
        std::copy(rr.begin(), rr.end(), dst.begin() + static_cast<std::ptrdiff_t>(left.cols));
    }
    return out;
}

Matrix left_columns(const Matrix& m, std::size_t cols) {
    Matrix out(m.rows, cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        auto src = m.row(r);
        std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(cols),
                  out.row(r).begin());
    }
    return out;
}

} // namespace

CvaeModel CvaeModel::create(std::size_t d_x, std::size_t d_a,
                            std::size_t latent_dim,
                            const std::vector<std::size_t>& encoder_hidden,
                            const std::vector<std::size_t>& decoder_hidden,
                            Rng& rng) {
    if (d_x == 0 || d_a == 0 || latent_dim == 0) {
        throw ConfigError("model dimensions must be positive");
    }
    CvaeModel model;
    model.feature_dim = d_x;
    model.attribute_dim = d_a;
    model.latent_dim = latent_dim;
    model.encoder = MlpNet::dense(d_x + d_a, encoder_hidden, 2 * latent_dim, rng);
    model.decoder = MlpNet::dense(latent_dim + d_a, decoder_hidden, d_x, rng);
    return model;
}

std::vector<std::span<double>> CvaeModel::params() {
    std::vector<std::span<double>> out;
    for (MlpNet* net : {&encoder, &decoder}) {
        auto spans = param_spans(*net);
        out.insert(out.end(), spans.begin(), spans.end());
    }
    return out;
}

std::vector<std::span<const double>> CvaeModel::params() const {
    std::vector<std::span<const double>> out;
    for (const MlpNet* net : {&encoder, &decoder}) {
        auto spans = param_spans(*net);
        out.insert(out.end(), spans.begin(), spans.end());
    }
    return out;
}

CvaeGrad CvaeGrad::zeros_like(const CvaeModel& model) {
    CvaeGrad grad;
    grad.encoder = MlpGrad::zeros_like(model.encoder);
    grad.decoder = MlpGrad::zeros_like(model.decoder);
    return grad;
}

std::vector<std::span<const double>> CvaeGrad::spans() const {
    std::vector<std::span<const double>> out;
    for (const MlpGrad* g : {&encoder, &decoder}) {
        auto spans = grad_spans(*g);
        out.insert(out.end(), spans.begin(), spans.end());
    }
    return out;
}

CvaeTeacher CvaeTeacher::from_model(const CvaeModel& model) {
    return CvaeTeacher{model.encoder};
}

CvaeLossResult cvae_loss(const CvaeModel& model, const CvaeTeacher* teacher,
                         const Matrix& features, const Matrix& attributes,
                         const Matrix& noise, ReconLoss recon,
                         CvaeComponents* components) {
    if (features.rows == 0) throw ShapeError("empty batch");
    require_shape(features, features.rows, model.feature_dim, "feature batch");
    require_shape(attributes, features.rows, model.attribute_dim,
                  "attribute batch");
    require_shape(noise, features.rows, model.latent_dim, "noise batch");

    CvaeLossResult result;
    result.grad = CvaeGrad::zeros_like(model);

    MlpCache cache_enc, cache_dec;
    const Matrix enc_in = hconcat(features, attributes);
    const Matrix raw = mlp_forward(model.encoder, enc_in, cache_enc);
    const LatentBatch lat = split_encoder_output(raw);
    const Matrix z = reparameterize_batch(lat, noise);
    const Matrix dec_in = hconcat(z, attributes);
    const Matrix recon_x = mlp_forward(model.decoder, dec_in, cache_dec);

    Matrix drecon(recon_x.rows, recon_x.cols);
    double recon_value = 0.0;
    {
        const double inv = 1.0 / static_cast<double>(recon_x.size());
        for (std::size_t i = 0; i < recon_x.size(); ++i) {
            const double diff = recon_x.data[i] - features.data[i];
            if (recon == ReconLoss::l1) {
                recon_value += std::abs(diff);
                drecon.data[i] = inv * sign_of(diff);
            } else {
                recon_value += diff * diff;
                drecon.data[i] = inv * 2.0 * diff;
            }
        }
        recon_value *= inv;
    }
    const double kl = kl_batch_mean(lat);

    const Matrix ddec_in =
        mlp_backward(model.decoder, cache_dec, drecon, result.grad.decoder);
    const Matrix dz = left_columns(ddec_in, model.latent_dim);

    Matrix dmu(lat.batch(), lat.dim()), dlv(lat.batch(), lat.dim());
    reparameterize_backward(lat, noise, dz, dmu, dlv);
    kl_batch_backward(lat, 1.0, dmu, dlv);
    Matrix draw = latent_grad_to_raw(raw, dmu, dlv);

    double kd = 0.0;
    if (teacher != nullptr) {
        const Matrix teach_raw = mlp_forward(teacher->encoder, enc_in);
        require_shape(teach_raw, raw.rows, raw.cols, "distillation target");
        const double inv = 1.0 / static_cast<double>(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const double diff = raw.data[i] - teach_raw.data[i];
            kd += std::abs(diff);
            draw.data[i] += model.kd_weight * inv * sign_of(diff);
        }
        kd *= inv;
    }

    mlp_backward(model.encoder, cache_enc, draw, result.grad.encoder);

    result.value = recon_value + kl + model.kd_weight * kd;
    if (components != nullptr) {
        *components = CvaeComponents{recon_value, kl, kd};
    }
    return result;
}

CvaeTeacher train_task_cvae(CvaeModel& model, const TaskSplit& task,
                            const FeatureDataset& dataset,
                            EpisodicMemory& memory, const CvaeTeacher* teacher,
                            const TrainConfig& config, TrainRngs rngs,
                            TrainTrace* trace) {
    if (rngs.training == nullptr || rngs.memory == nullptr) {
        throw ConfigError("training requires rng streams");
    }
    if (config.epochs == 0 || config.batch_size == 0) {
        throw ConfigError("epochs and batch_size must be positive");
    }
    model.kd_weight = config.kd_weight;

    const std::size_t d_x = model.feature_dim;
    const std::size_t d_a = model.attribute_dim;
    const detail::TrainingRows rows = detail::collect_training_rows(
        task, dataset, memory, config.replay_enabled, d_x);
    const std::size_t n = rows.size();

    const CvaeTeacher* kd_teacher = config.kd_enabled ? teacher : nullptr;
    auto params = model.params();
    AdamState adam =
        AdamState::for_params(params, config.learning_rate, config.beta1,
                              config.beta2, config.epsilon);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rngs.training->shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t b = std::min(config.batch_size, n - start);
            Matrix batch_x(b, d_x);
            Matrix batch_a(b, d_a);
            for (std::size_t r = 0; r < b; ++r) {
                const std::size_t src = order[start + r];
                auto feat = rows.features[src];
                std::copy(feat.begin(), feat.end(), batch_x.row(r).begin());
                auto attr = dataset.attributes.row(rows.labels[src]);
                std::copy(attr.begin(), attr.end(), batch_a.row(r).begin());
            }
            Matrix noise(b, model.latent_dim);
            for (double& v : noise.data) v = rngs.training->gaussian();
            const CvaeLossResult step = cvae_loss(model, kd_teacher, batch_x,
                                                  batch_a, noise, config.recon);
            if (!std::isfinite(step.value)) {
                throw NumericError(
                    "non-finite loss at task " + std::to_string(task.task_id) +
                    ", epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(batches));
            }
            adam_step(adam, params, step.grad.spans());
            loss_sum += step.value;
            ++batches;
        }
        if (trace != nullptr) {
            const CvaeModel& frozen = model;
            trace->push_back(EpochTraceEntry{task.task_id, epoch,
                                             loss_sum / static_cast<double>(batches),
                                             hash_spans(frozen.params())});
        }
    }

    detail::offer_task_to_memory(task, dataset, memory, *rngs.memory);
    return CvaeTeacher::from_model(model);
}

LabeledMatrix generate_features_cvae(const CvaeModel& model,
                                     const std::vector<std::uint32_t>& classes,
                                     const Matrix& attributes,
                                     std::size_t count_per_class, Rng& rng,
                                     bool sample) {
    LabeledMatrix out;
    out.rows = Matrix(classes.size() * count_per_class, model.feature_dim);
    out.labels.reserve(out.rows.rows);
    std::size_t row_out = 0;
    Matrix dec_in(1, model.latent_dim + model.attribute_dim);
    for (std::uint32_t cls : classes) {
        if (cls >= attributes.rows) {
            throw DataError("class " + std::to_string(cls) +
                            " has no attribute row");
        }
        auto attr = attributes.row(cls);
        for (std::size_t j = 0; j < count_per_class; ++j) {
            for (std::size_t l = 0; l < model.latent_dim; ++l) {
                dec_in.data[l] = sample ? rng.gaussian() : 0.0;
            }
            std::copy(attr.begin(), attr.end(),
                      dec_in.data.begin() +
                          static_cast<std::ptrdiff_t>(model.latent_dim));
            const Matrix decoded = mlp_forward(model.decoder, dec_in);
            auto dst = out.rows.row(row_out);
            std::copy(decoded.data.begin(), decoded.data.end(), dst.begin());
            out.labels.push_back(cls);
            ++row_out;
        }
    }
    return out;
}

} // namespace czsl
