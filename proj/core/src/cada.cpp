#include "czsl/cada.hpp"

#include "czsl/adam.hpp"
#include "czsl/binio.hpp"
#include "czsl/errors.hpp"
#include "train_common.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace czsl {

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Mean elementwise reconstruction error; adds weight * d/dpred into dpred.
double recon_value_grad(const Matrix& pred, const Matrix& target,
                        ReconLoss kind, double weight, Matrix& dpred) {
    require_shape(pred, target.rows, target.cols, "reconstruction target");
    require_shape(dpred, pred.rows, pred.cols, "reconstruction gradient");
    const double inv = 1.0 / static_cast<double>(pred.size());
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred.data[i] - target.data[i];
        if (kind == ReconLoss::l1) {
            total += std::abs(diff);
            dpred.data[i] += weight * inv * sign_of(diff);
        } else {
            total += diff * diff;
            dpred.data[i] += weight * inv * 2.0 * diff;
        }
    }
    return total * inv;
}

// Distribution alignment value; adds weight-scaled gradients into the four
// destinations when they are non-null.
double da_value_grad(const LatentBatch& f, const LatentBatch& a, double weight,
                     Matrix* dmu_f, Matrix* dlv_f, Matrix* dmu_a,
                     Matrix* dlv_a) {
    require_shape(a.mu, f.batch(), f.dim(), "distribution alignment");
    const std::size_t batch = f.batch();
    const std::size_t dim = f.dim();
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double dmu = a.mu.at(b, i) - f.mu.at(b, i);
            const double ds = std::exp(0.5 * a.log_var.at(b, i)) -
                              std::exp(0.5 * f.log_var.at(b, i));
            sum += dmu * dmu + ds * ds;
        }
        const double dist = std::sqrt(sum);
        total += dist;
        if (dmu_f == nullptr || dist <= 0.0) continue;
        const double coeff = weight / (static_cast<double>(batch) * dist);
        for (std::size_t i = 0; i < dim; ++i) {
            const double sigma_f = std::exp(0.5 * f.log_var.at(b, i));
            const double sigma_a = std::exp(0.5 * a.log_var.at(b, i));
            const double dmu = a.mu.at(b, i) - f.mu.at(b, i);
            const double ds = sigma_a - sigma_f;
            dmu_f->at(b, i) += coeff * -dmu;
            dmu_a->at(b, i) += coeff * dmu;
            dlv_f->at(b, i) += coeff * -ds * 0.5 * sigma_f;
            dlv_a->at(b, i) += coeff * ds * 0.5 * sigma_a;
        }
    }
    return total / static_cast<double>(batch);
}

// Mean absolute gap between student and teacher raw encoder outputs; adds
// weight * d/dstudent into draw_student.
double kd_value_grad(const Matrix& student_raw, const Matrix& teacher_raw,
                     double weight, Matrix& draw_student) {
    require_shape(teacher_raw, student_raw.rows, student_raw.cols,
                  "distillation target");
    const double inv = 1.0 / static_cast<double>(student_raw.size());
    double total = 0.0;
    for (std::size_t i = 0; i < student_raw.size(); ++i) {
        const double diff = student_raw.data[i] - teacher_raw.data[i];
        total += std::abs(diff);
        draw_student.data[i] += weight * inv * sign_of(diff);
    }
    return total * inv;
}

void require_batch_inputs(const CadaModel& model, const Matrix& features,
                          const Matrix& attributes, const NoiseBatch* noise) {
    if (features.rows == 0) throw ShapeError("empty batch");
    require_shape(features, features.rows, model.feature_dim(), "feature batch");
    require_shape(attributes, features.rows, model.attribute_dim(),
                  "attribute batch");
    if (noise != nullptr) {
        require_shape(noise->feature, features.rows, model.latent_dim,
                      "feature noise");
        require_shape(noise->attribute, features.rows, model.latent_dim,
                      "attribute noise");
    }
}

Matrix single_row(std::span<const double> values) {
    Matrix m(1, values.size());
    std::copy(values.begin(), values.end(), m.data.begin());
    return m;
}

} // namespace

CadaModel CadaModel::create(std::size_t d_x, std::size_t d_a,
                            std::size_t latent_dim,
                            const std::vector<std::size_t>& encoder_hidden,
                            const std::vector<std::size_t>& decoder_hidden,
                            Rng& rng) {
    if (d_x == 0 || d_a == 0 || latent_dim == 0) {
        throw ConfigError("model dimensions must be positive");
    }
    CadaModel model;
    model.latent_dim = latent_dim;
    model.feature_encoder = MlpNet::dense(d_x, encoder_hidden, 2 * latent_dim, rng);
    model.attribute_encoder =
        MlpNet::dense(d_a, encoder_hidden, 2 * latent_dim, rng);
    model.feature_decoder = MlpNet::dense(latent_dim, decoder_hidden, d_x, rng);
    model.attribute_decoder = MlpNet::dense(latent_dim, decoder_hidden, d_a, rng);
    return model;
}

std::vector<std::span<double>> CadaModel::params() {
    std::vector<std::span<double>> out;
    for (MlpNet* net : {&feature_encoder, &attribute_encoder, &feature_decoder,
                        &attribute_decoder}) {
        auto spans = param_spans(*net);
        out.insert(out.end(), spans.begin(), spans.end());
    }
    return out;
}

std::vector<std::span<const double>> CadaModel::params() const {
    std::vector<std::span<const double>> out;
    for (const MlpNet* net : {&feature_encoder, &attribute_encoder,
                              &feature_decoder, &attribute_decoder}) {
        auto spans = param_spans(*net);
        out.insert(out.end(), spans.begin(), spans.end());
    }
    return out;
}

CadaGrad CadaGrad::zeros_like(const CadaModel& model) {
    CadaGrad grad;
    grad.feature_encoder = MlpGrad::zeros_like(model.feature_encoder);
    grad.attribute_encoder = MlpGrad::zeros_like(model.attribute_encoder);
    grad.feature_decoder = MlpGrad::zeros_like(model.feature_decoder);
    grad.attribute_decoder = MlpGrad::zeros_like(model.attribute_decoder);
    return grad;
}

std::vector<std::span<const double>> CadaGrad::spans() const {
    std::vector<std::span<const double>> out;
    for (const MlpGrad* g : {&feature_encoder, &attribute_encoder,
                             &feature_decoder, &attribute_decoder}) {
        auto spans = grad_spans(*g);
        out.insert(out.end(), spans.begin(), spans.end());
    }
    return out;
}

CadaTeacher CadaTeacher::from_model(const CadaModel& model) {
    return CadaTeacher{model.feature_encoder, model.attribute_encoder};
}

NoiseBatch NoiseBatch::draw(std::size_t batch, std::size_t latent_dim,
                            Rng& rng) {
    NoiseBatch noise;
    noise.feature = Matrix(batch, latent_dim);
    noise.attribute = Matrix(batch, latent_dim);
    for (double& v : noise.feature.data) v = rng.gaussian();
    for (double& v : noise.attribute.data) v = rng.gaussian();
    return noise;
}

CadaLossResult vae_loss(const CadaModel& model, const Matrix& features,
                        const Matrix& attributes, const NoiseBatch& noise,
                        ReconLoss recon) {
    require_batch_inputs(model, features, attributes, &noise);
    CadaLossResult result;
    result.grad = CadaGrad::zeros_like(model);

    MlpCache cache_ef, cache_ea, cache_df, cache_da;
    const Matrix raw_f = mlp_forward(model.feature_encoder, features, cache_ef);
    const Matrix raw_a = mlp_forward(model.attribute_encoder, attributes, cache_ea);
    const LatentBatch lat_f = split_encoder_output(raw_f);
    const LatentBatch lat_a = split_encoder_output(raw_a);
    const Matrix z_f = reparameterize_batch(lat_f, noise.feature);
    const Matrix z_a = reparameterize_batch(lat_a, noise.attribute);
    const Matrix recon_f = mlp_forward(model.feature_decoder, z_f, cache_df);
    const Matrix recon_a = mlp_forward(model.attribute_decoder, z_a, cache_da);

    Matrix drecon_f(recon_f.rows, recon_f.cols);
    Matrix drecon_a(recon_a.rows, recon_a.cols);
    result.value += recon_value_grad(recon_f, features, recon, 1.0, drecon_f);
    result.value += recon_value_grad(recon_a, attributes, recon, 1.0, drecon_a);
    result.value += kl_batch_mean(lat_f);
    result.value += kl_batch_mean(lat_a);

    const Matrix dz_f =
        mlp_backward(model.feature_decoder, cache_df, drecon_f,
                     result.grad.feature_decoder);
    const Matrix dz_a =
        mlp_backward(model.attribute_decoder, cache_da, drecon_a,
                     result.grad.attribute_decoder);

    Matrix dmu_f(lat_f.batch(), lat_f.dim()), dlv_f(lat_f.batch(), lat_f.dim());
    Matrix dmu_a(lat_a.batch(), lat_a.dim()), dlv_a(lat_a.batch(), lat_a.dim());
    reparameterize_backward(lat_f, noise.feature, dz_f, dmu_f, dlv_f);
    reparameterize_backward(lat_a, noise.attribute, dz_a, dmu_a, dlv_a);
    kl_batch_backward(lat_f, 1.0, dmu_f, dlv_f);
    kl_batch_backward(lat_a, 1.0, dmu_a, dlv_a);

    mlp_backward(model.feature_encoder, cache_ef,
                 latent_grad_to_raw(raw_f, dmu_f, dlv_f),
                 result.grad.feature_encoder);
    mlp_backward(model.attribute_encoder, cache_ea,
                 latent_grad_to_raw(raw_a, dmu_a, dlv_a),
                 result.grad.attribute_encoder);
    return result;
}

CadaLossResult ca_loss(const CadaModel& model, const Matrix& features,
                       const Matrix& attributes, const NoiseBatch& noise) {
    require_batch_inputs(model, features, attributes, &noise);
    CadaLossResult result;
    result.grad = CadaGrad::zeros_like(model);

    MlpCache cache_ef, cache_ea, cache_df, cache_da;
    const Matrix raw_f = mlp_forward(model.feature_encoder, features, cache_ef);
    const Matrix raw_a = mlp_forward(model.attribute_encoder, attributes, cache_ea);
    const LatentBatch lat_f = split_encoder_output(raw_f);
    const LatentBatch lat_a = split_encoder_output(raw_a);
    const Matrix z_f = reparameterize_batch(lat_f, noise.feature);
    const Matrix z_a = reparameterize_batch(lat_a, noise.attribute);
    // Swapped pairing: feature latent reconstructs the attribute and
    // vice versa.
    const Matrix cross_a = mlp_forward(model.attribute_decoder, z_f, cache_da);
    const Matrix cross_f = mlp_forward(model.feature_decoder, z_a, cache_df);

    Matrix dcross_a(cross_a.rows, cross_a.cols);
    Matrix dcross_f(cross_f.rows, cross_f.cols);
    result.value +=
        recon_value_grad(cross_a, attributes, ReconLoss::l1, 1.0, dcross_a);
    result.value +=
        recon_value_grad(cross_f, features, ReconLoss::l1, 1.0, dcross_f);

    const Matrix dz_f =
        mlp_backward(model.attribute_decoder, cache_da, dcross_a,
                     result.grad.attribute_decoder);
    const Matrix dz_a =
        mlp_backward(model.feature_decoder, cache_df, dcross_f,
                     result.grad.feature_decoder);

    Matrix dmu_f(lat_f.batch(), lat_f.dim()), dlv_f(lat_f.batch(), lat_f.dim());
    Matrix dmu_a(lat_a.batch(), lat_a.dim()), dlv_a(lat_a.batch(), lat_a.dim());
    reparameterize_backward(lat_f, noise.feature, dz_f, dmu_f, dlv_f);
    reparameterize_backward(lat_a, noise.attribute, dz_a, dmu_a, dlv_a);

    mlp_backward(model.feature_encoder, cache_ef,
                 latent_grad_to_raw(raw_f, dmu_f, dlv_f),
                 result.grad.feature_encoder);
    mlp_backward(model.attribute_encoder, cache_ea,
                 latent_grad_to_raw(raw_a, dmu_a, dlv_a),
                 result.grad.attribute_encoder);
    return result;
}

DaLossResult da_loss(const LatentBatch& latent_f, const LatentBatch& latent_a) {
    DaLossResult result;
    result.dmu_f = Matrix(latent_f.batch(), latent_f.dim());
    result.dlog_var_f = Matrix(latent_f.batch(), latent_f.dim());
    result.dmu_a = Matrix(latent_a.batch(), latent_a.dim());
    result.dlog_var_a = Matrix(latent_a.batch(), latent_a.dim());
    result.value =
        da_value_grad(latent_f, latent_a, 1.0, &result.dmu_f,
                      &result.dlog_var_f, &result.dmu_a, &result.dlog_var_a);
    return result;
}

CadaLossResult kd_loss(const CadaModel& model, const CadaTeacher& teacher,
                       const Matrix& features, const Matrix& attributes) {
    require_batch_inputs(model, features, attributes, nullptr);
    CadaLossResult result;
    result.grad = CadaGrad::zeros_like(model);

    MlpCache cache_ef, cache_ea;
    const Matrix raw_f = mlp_forward(model.feature_encoder, features, cache_ef);
    const Matrix raw_a = mlp_forward(model.attribute_encoder, attributes, cache_ea);
    const Matrix teach_f = mlp_forward(teacher.feature_encoder, features);
    const Matrix teach_a = mlp_forward(teacher.attribute_encoder, attributes);

    Matrix draw_f(raw_f.rows, raw_f.cols);
    Matrix draw_a(raw_a.rows, raw_a.cols);
    result.value += kd_value_grad(raw_f, teach_f, 1.0, draw_f);
    result.value += kd_value_grad(raw_a, teach_a, 1.0, draw_a);

    mlp_backward(model.feature_encoder, cache_ef, draw_f,
                 result.grad.feature_encoder);
    mlp_backward(model.attribute_encoder, cache_ea, draw_a,
                 result.grad.attribute_encoder);
    return result;
}

CadaLossResult total_loss_cada(const CadaModel& model,
                               const CadaTeacher* teacher,
                               const Matrix& features, const Matrix& attributes,
                               const NoiseBatch& noise, ReconLoss recon,
                               CadaComponents* components) {
    require_batch_inputs(model, features, attributes, &noise);
    CadaLossResult result;
    result.grad = CadaGrad::zeros_like(model);

    MlpCache cache_ef, cache_ea;
    MlpCache cache_df_self, cache_df_cross, cache_da_self, cache_da_cross;
    const Matrix raw_f = mlp_forward(model.feature_encoder, features, cache_ef);
    const Matrix raw_a = mlp_forward(model.attribute_encoder, attributes, cache_ea);
    const LatentBatch lat_f = split_encoder_output(raw_f);
    const LatentBatch lat_a = split_encoder_output(raw_a);
    const Matrix z_f = reparameterize_batch(lat_f, noise.feature);
    const Matrix z_a = reparameterize_batch(lat_a, noise.attribute);

    const Matrix self_f = mlp_forward(model.feature_decoder, z_f, cache_df_self);
    const Matrix self_a =
        mlp_forward(model.attribute_decoder, z_a, cache_da_self);
    const Matrix cross_a =
        mlp_forward(model.attribute_decoder, z_f, cache_da_cross);
    const Matrix cross_f =
        mlp_forward(model.feature_decoder, z_a, cache_df_cross);

    Matrix dself_f(self_f.rows, self_f.cols);
    Matrix dself_a(self_a.rows, self_a.cols);
    Matrix dcross_a(cross_a.rows, cross_a.cols);
    Matrix dcross_f(cross_f.rows, cross_f.cols);

    double vae = recon_value_grad(self_f, features, recon, 1.0, dself_f);
    vae += recon_value_grad(self_a, attributes, recon, 1.0, dself_a);
    vae += kl_batch_mean(lat_f);
    vae += kl_batch_mean(lat_a);

    double ca = recon_value_grad(cross_a, attributes, ReconLoss::l1,
                                 model.gamma, dcross_a);
    ca += recon_value_grad(cross_f, features, ReconLoss::l1, model.gamma,
                           dcross_f);

    Matrix dz_f = mlp_backward(model.feature_decoder, cache_df_self, dself_f,
                               result.grad.feature_decoder);
    add_inplace(dz_f, mlp_backward(model.attribute_decoder, cache_da_cross,
                                   dcross_a, result.grad.attribute_decoder));
    Matrix dz_a = mlp_backward(model.attribute_decoder, cache_da_self, dself_a,
                               result.grad.attribute_decoder);
    add_inplace(dz_a, mlp_backward(model.feature_decoder, cache_df_cross,
                                   dcross_f, result.grad.feature_decoder));

    Matrix dmu_f(lat_f.batch(), lat_f.dim()), dlv_f(lat_f.batch(), lat_f.dim());
    Matrix dmu_a(lat_a.batch(), lat_a.dim()), dlv_a(lat_a.batch(), lat_a.dim());
    reparameterize_backward(lat_f, noise.feature, dz_f, dmu_f, dlv_f);
    reparameterize_backward(lat_a, noise.attribute, dz_a, dmu_a, dlv_a);
    kl_batch_backward(lat_f, 1.0, dmu_f, dlv_f);
    kl_batch_backward(lat_a, 1.0, dmu_a, dlv_a);

    const double da =
        da_value_grad(lat_f, lat_a, model.delta, &dmu_f, &dlv_f, &dmu_a, &dlv_a);

    Matrix draw_f = latent_grad_to_raw(raw_f, dmu_f, dlv_f);
    Matrix draw_a = latent_grad_to_raw(raw_a, dmu_a, dlv_a);

    double kd = 0.0;
    if (teacher != nullptr) {
        const Matrix teach_f = mlp_forward(teacher->feature_encoder, features);
        const Matrix teach_a =
            mlp_forward(teacher->attribute_encoder, attributes);
        kd += kd_value_grad(raw_f, teach_f, model.kd_weight, draw_f);
        kd += kd_value_grad(raw_a, teach_a, model.kd_weight, draw_a);
    }

    mlp_backward(model.feature_encoder, cache_ef, draw_f,
                 result.grad.feature_encoder);
    mlp_backward(model.attribute_encoder, cache_ea, draw_a,
                 result.grad.attribute_encoder);

    result.value = vae + model.gamma * ca + model.delta * da +
                   model.kd_weight * kd;
    if (components != nullptr) {
        *components = CadaComponents{vae, ca, da, kd};
    }
    return result;
}

void LabeledMatrix::append(const LabeledMatrix& other) {
    if (other.rows.rows == 0) return;
    if (rows.rows == 0) {
        *this = other;
        return;
    }
    if (rows.cols != other.rows.cols) {
        throw ShapeError("appending rows of width " +
                         std::to_string(other.rows.cols) + " to width " +
                         std::to_string(rows.cols));
    }
    rows.data.insert(rows.data.end(), other.rows.data.begin(),
                     other.rows.data.end());
    rows.rows += other.rows.rows;
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

CadaTeacher train_task_cada(CadaModel& model, const TaskSplit& task,
                            const FeatureDataset& dataset,
                            EpisodicMemory& memory, const CadaTeacher* teacher,
                            const TrainConfig& config, TrainRngs rngs,
                            TrainTrace* trace) {
    if (rngs.training == nullptr || rngs.memory == nullptr) {
        throw ConfigError("training requires rng streams");
    }
    if (config.epochs == 0 || config.batch_size == 0) {
        throw ConfigError("epochs and batch_size must be positive");
    }
    model.gamma = config.gamma;
    model.delta = config.delta;
    model.kd_weight = config.kd_weight;

    const std::size_t d_x = model.feature_dim();
    const std::size_t d_a = model.attribute_dim();
    const detail::TrainingRows rows = detail::collect_training_rows(
        task, dataset, memory, config.replay_enabled, d_x);
    const std::size_t n = rows.size();

    const CadaTeacher* kd_teacher = config.kd_enabled ? teacher : nullptr;
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
            const NoiseBatch noise =
                NoiseBatch::draw(b, model.latent_dim, *rngs.training);
            const CadaLossResult step = total_loss_cada(
                model, kd_teacher, batch_x, batch_a, noise, config.recon);
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
            const CadaModel& frozen = model;
            trace->push_back(EpochTraceEntry{task.task_id, epoch,
                                             loss_sum / static_cast<double>(batches),
                                             hash_spans(frozen.params())});
        }
    }

    // Only the task's own samples enter the memory; replayed entries are
    // already resident.
    detail::offer_task_to_memory(task, dataset, memory, *rngs.memory);

    return CadaTeacher::from_model(model);
}

LabeledMatrix generate_latents_cada(const CadaModel& model,
                                    const LabeledMatrix& available_features,
                                    const std::vector<std::uint32_t>& active_classes,
                                    const Matrix& attributes,
                                    const GenerationCounts& counts, Rng& rng,
                                    bool sample) {
    const std::size_t latent = model.latent_dim;
    if (available_features.size() > 0 &&
        available_features.rows.cols != model.feature_dim()) {
        throw ShapeError("available feature width " +
                         std::to_string(available_features.rows.cols) +
                         " does not match model input " +
                         std::to_string(model.feature_dim()));
    }
    std::map<std::uint32_t, std::vector<std::size_t>> rows_by_class;
    for (std::size_t i = 0; i < available_features.size(); ++i) {
        rows_by_class[available_features.labels[i]].push_back(i);
    }

    std::size_t total = 0;
    for (std::uint32_t cls : active_classes) {
        if (cls >= attributes.rows) {
            throw DataError("class " + std::to_string(cls) +
                            " has no attribute row");
        }
        total += rows_by_class.count(cls) != 0 ? counts.per_seen_class
                                               : counts.per_unseen_class;
    }

    LabeledMatrix out;
    out.rows = Matrix(total, latent);
    out.labels.reserve(total);
    std::size_t row_out = 0;

    // Classes are processed in the given order; draws happen in that order
    // too, so the output is a pure function of (model, inputs, rng state).
    for (std::uint32_t cls : active_classes) {
        const auto it = rows_by_class.find(cls);
        if (it != rows_by_class.end()) {
            for (std::size_t j = 0; j < counts.per_seen_class; ++j) {
                const std::size_t pick =
                    it->second[rng.uniform_index(it->second.size())];
                const Matrix raw = mlp_forward(
                    model.feature_encoder,
                    single_row(available_features.rows.row(pick)));
                const LatentBatch lat = split_encoder_output(raw);
                auto dst = out.rows.row(row_out);
                for (std::size_t l = 0; l < latent; ++l) {
                    const double eps = sample ? rng.gaussian() : 0.0;
                    dst[l] = lat.mu.at(0, l) +
                             std::exp(0.5 * lat.log_var.at(0, l)) * eps;
                }
                out.labels.push_back(cls);
                ++row_out;
            }
        } else {
            if (counts.per_unseen_class == 0) continue;
            const Matrix raw = mlp_forward(model.attribute_encoder,
                                           single_row(attributes.row(cls)));
            const LatentBatch lat = split_encoder_output(raw);
            for (std::size_t j = 0; j < counts.per_unseen_class; ++j) {
                auto dst = out.rows.row(row_out);
                for (std::size_t l = 0; l < latent; ++l) {
                    const double eps = sample ? rng.gaussian() : 0.0;
                    dst[l] = lat.mu.at(0, l) +
                             std::exp(0.5 * lat.log_var.at(0, l)) * eps;
                }
                out.labels.push_back(cls);
                ++row_out;
            }
        }
    }
    return out;
}

Matrix encode_mean_cada(const CadaModel& model, const Matrix& features) {
    const Matrix raw = mlp_forward(model.feature_encoder, features);
    return split_encoder_output(raw).mu;
}

} // namespace czsl
