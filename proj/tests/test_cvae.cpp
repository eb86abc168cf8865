#include "czsl/cvae.hpp"
#include "czsl/errors.hpp"
#include "czsl/grad_check.hpp"

#include <doctest.h>

#include "support.hpp"

#include <cmath>
#include <vector>

using namespace czsl;
using testsupport::random_matrix;

namespace {

constexpr std::size_t kDx = 5;
constexpr std::size_t kDa = 3;
constexpr std::size_t kLatent = 2;

CvaeModel small_model(std::uint64_t seed) {
    Rng rng(seed);
    return CvaeModel::create(kDx, kDa, kLatent, {4}, {4}, rng);
}

struct Batch {
    Matrix features;
    Matrix attributes;
    Matrix noise;
};

Batch random_batch(std::size_t rows, std::uint64_t seed) {
    Rng rng(seed);
    Batch b;
    b.features = random_matrix(rows, kDx, rng);
    b.attributes = random_matrix(rows, kDa, rng);
    b.noise = random_matrix(rows, kLatent, rng);
    return b;
}

} // namespace

TEST_CASE("the cvae loss is zero for a perfect standard-normal autoencoder") {
    CvaeModel model = small_model(1);
    for (auto span : model.params())
        for (double& v : span) v = 0.0;
    Batch b = random_batch(3, 2);
    b.features.fill(0.0);
    b.attributes.fill(0.0);
    CHECK(cvae_loss(model, nullptr, b.features, b.attributes, b.noise).value ==
          0.0);
}

TEST_CASE("the loss decomposes into reconstruction, kl, and distillation") {
    CvaeModel model = small_model(3);
    model.kd_weight = 0.8;
    CvaeModel teacher_model = small_model(4);
    const CvaeTeacher teacher = CvaeTeacher::from_model(teacher_model);
    const Batch b = random_batch(4, 5);

    CvaeComponents parts;
    const CvaeLossResult result = cvae_loss(model, &teacher, b.features,
                                            b.attributes, b.noise,
                                            ReconLoss::l1, &parts);
    CHECK(result.value == doctest::Approx(parts.recon + parts.kl +
                                          0.8 * parts.kd)
                              .epsilon(1e-12));
    CHECK(parts.recon > 0.0);
    CHECK(parts.kl >= 0.0);
    CHECK(parts.kd > 0.0);

    // Without a teacher the distillation term vanishes exactly.
    CvaeComponents no_teacher;
    cvae_loss(model, nullptr, b.features, b.attributes, b.noise, ReconLoss::l1,
              &no_teacher);
    CHECK(no_teacher.kd == 0.0);
    CHECK(no_teacher.recon == doctest::Approx(parts.recon).epsilon(1e-12));
    CHECK(no_teacher.kl == doctest::Approx(parts.kl).epsilon(1e-12));
}

TEST_CASE("an identical teacher contributes nothing") {
    CvaeModel model = small_model(7);
    const CvaeTeacher teacher = CvaeTeacher::from_model(model);
    const Batch b = random_batch(4, 8);
    CvaeComponents parts;
    cvae_loss(model, &teacher, b.features, b.attributes, b.noise, ReconLoss::l1,
              &parts);
    CHECK(parts.kd == 0.0);
}

TEST_CASE("cvae gradients match finite differences") {
    CvaeModel model = small_model(9);
    model.kd_weight = 0.8;
    CvaeModel teacher_model = small_model(10);
    const CvaeTeacher teacher = CvaeTeacher::from_model(teacher_model);
    const Batch b = random_batch(4, 11);

    for (const ReconLoss recon : {ReconLoss::l1, ReconLoss::l2}) {
        const CvaeLossResult result =
            cvae_loss(model, &teacher, b.features, b.attributes, b.noise, recon);
        auto loss = [&]() {
            return cvae_loss(model, &teacher, b.features, b.attributes, b.noise,
                             recon)
                .value;
        };
        const FdReport report =
            finite_diff_check(loss, model.params(), result.grad.spans());
        CHECK(report.max_rel_error < 1e-3);
    }
}

TEST_CASE("cvae training is deterministic and feeds the memory") {
    SyntheticSpec spec;
    spec.num_classes = 6;
    spec.samples_per_class = 12;
    spec.feature_dim = kDx;
    spec.attribute_dim = kDa;
    spec.seed = 20;
    const FeatureDataset dataset = generate_synthetic(spec);
    const TaskStream stream = split_setting1(dataset, 2, 21, 0.25);

    TrainConfig config;
    config.epochs = 3;
    config.batch_size = 8;

    auto run = [&](TrainTrace& trace, CvaeModel& model) {
        RngSet rngs = RngSet::from_seed(22);
        model = CvaeModel::create(kDx, kDa, kLatent, {4}, {4}, rngs.model_init);
        EpisodicMemory memory(MemoryStrategy::ring_buffer, 4);
        TrainRngs tr{&rngs.training, &rngs.memory};
        const CvaeTeacher teacher = train_task_cvae(
            model, stream.task(1), dataset, memory, nullptr, config, tr, &trace);
        train_task_cvae(model, stream.task(2), dataset, memory, &teacher,
                        config, tr, &trace);
        return memory.stream_count();
    };

    TrainTrace trace_a, trace_b;
    CvaeModel model_a, model_b;
    const std::size_t offers = run(trace_a, model_a);
    run(trace_b, model_b);

    CHECK(offers == stream.task(1).train_indices.size() +
                        stream.task(2).train_indices.size());
    REQUIRE(trace_a.size() == 6);
    for (std::size_t i = 0; i < trace_a.size(); ++i) {
        CHECK(trace_a[i].mean_loss == trace_b[i].mean_loss);
        CHECK(trace_a[i].param_hash == trace_b[i].param_hash);
    }
}

TEST_CASE("decoded features are conditioned on the class attribute") {
    CvaeModel model = small_model(30);
    Rng data_rng(31);
    const Matrix attributes = random_matrix(3, kDa, data_rng);

    Rng gen_rng(32);
    const LabeledMatrix out =
        generate_features_cvae(model, {0, 2}, attributes, 4, gen_rng, false);
    REQUIRE(out.size() == 8);
    CHECK(out.rows.cols == kDx);
    CHECK(out.labels == std::vector<std::uint32_t>{0, 0, 0, 0, 2, 2, 2, 2});

    // Zero noise repeats one decoded row per class, and different
    // attributes decode to different rows.
    for (std::size_t r = 1; r < 4; ++r)
        for (std::size_t c = 0; c < kDx; ++c)
            CHECK(out.rows.at(r, c) == out.rows.at(0, c));
    bool differs = false;
    for (std::size_t c = 0; c < kDx; ++c)
        if (out.rows.at(4, c) != out.rows.at(0, c)) differs = true;
    CHECK(differs);
}

TEST_CASE("sampled generation is deterministic in the rng seed") {
    CvaeModel model = small_model(33);
    Rng data_rng(34);
    const Matrix attributes = random_matrix(2, kDa, data_rng);

    Rng rng_a(35), rng_b(35), rng_c(36);
    const LabeledMatrix a =
        generate_features_cvae(model, {0, 1}, attributes, 5, rng_a);
    const LabeledMatrix b =
        generate_features_cvae(model, {0, 1}, attributes, 5, rng_b);
    const LabeledMatrix c =
        generate_features_cvae(model, {0, 1}, attributes, 5, rng_c);
    CHECK(a.rows.data == b.rows.data);
    CHECK(a.rows.data != c.rows.data);
}

TEST_CASE("cvae rejects mismatched widths") {
    CvaeModel model = small_model(37);
    const Batch b = random_batch(4, 38);
    Rng rng(39);
    const Matrix bad_noise = random_matrix(4, kLatent + 1, rng);
    CHECK_THROWS_AS(
        cvae_loss(model, nullptr, b.features, b.attributes, bad_noise),
        ShapeError);
}
