#include "czsl/cada.hpp"
#include "czsl/classifier.hpp"
#include "czsl/memory.hpp"
#include "czsl/metrics.hpp"
#include "czsl/mlp.hpp"

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

namespace {

using namespace czsl;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.gaussian();
    return m;
}

void bm_mlp_forward(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const MlpNet net = MlpNet::dense(2048, {512}, 64, rng);
    const Matrix input = random_matrix(batch, 2048, rng);
    for (auto _ : state) {
        Matrix out = mlp_forward(net, input);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(batch));
}
BENCHMARK(bm_mlp_forward)->Arg(1)->Arg(32)->Arg(128);

void bm_mlp_backward(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    const MlpNet net = MlpNet::dense(2048, {512}, 64, rng);
    const Matrix input = random_matrix(batch, 2048, rng);
    const Matrix upstream = random_matrix(batch, 64, rng);
    for (auto _ : state) {
        MlpCache cache;
        mlp_forward(net, input, cache);
        MlpGrad grad = MlpGrad::zeros_like(net);
        Matrix dinput = mlp_backward(net, cache, upstream, grad);
        benchmark::DoNotOptimize(dinput.data.data());
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(batch));
}
BENCHMARK(bm_mlp_backward)->Arg(32)->Arg(128);

void bm_total_loss_cada(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    CadaModel model = CadaModel::create(2048, 312, 64, {560}, {560}, rng);
    CadaModel teacher_model = CadaModel::create(2048, 312, 64, {560}, {560}, rng);
    const CadaTeacher teacher = CadaTeacher::from_model(teacher_model);
    const Matrix features = random_matrix(batch, 2048, rng);
    const Matrix attributes = random_matrix(batch, 312, rng);
    const NoiseBatch noise = NoiseBatch::draw(batch, 64, rng);
    for (auto _ : state) {
        CadaLossResult result = total_loss_cada(model, &teacher, features,
                                                attributes, noise);
        benchmark::DoNotOptimize(result.value);
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(batch));
}
BENCHMARK(bm_total_loss_cada)->Arg(32)->Arg(64);

void bm_reservoir_offer(benchmark::State& state) {
    const auto capacity = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    MemoryEntry entry;
    entry.feature.assign(2048, 0.5);
    entry.attribute.assign(312, 0.25);
    entry.task_id = 1;
    for (auto _ : state) {
        state.PauseTiming();
        EpisodicMemory memory(MemoryStrategy::reservoir, capacity);
        state.ResumeTiming();
        for (std::size_t i = 0; i < 10000; ++i) {
            entry.label = static_cast<std::uint32_t>(i % 200);
            memory.offer(entry, rng);
        }
        benchmark::DoNotOptimize(memory.size());
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(bm_reservoir_offer)->Arg(100)->Arg(1000);

void bm_classifier_fit(benchmark::State& state) {
    Rng rng(5);
    const std::size_t classes = 50;
    const std::size_t per_class = 20;
    Matrix inputs(classes * per_class, 64);
    std::vector<std::uint32_t> labels(classes * per_class);
    std::vector<std::uint32_t> ids;
    for (std::size_t c = 0; c < classes; ++c) {
        ids.push_back(static_cast<std::uint32_t>(c));
        for (std::size_t s = 0; s < per_class; ++s) {
            const std::size_t row = c * per_class + s;
            labels[row] = static_cast<std::uint32_t>(c);
            for (std::size_t d = 0; d < 64; ++d) {
                inputs.at(row, d) = rng.gaussian() + (d == c % 64 ? 3.0 : 0.0);
            }
        }
    }
    ClassifierConfig config;
    config.epochs = 5;
    for (auto _ : state) {
        state.PauseTiming();
        LinearSoftmaxClassifier clf(64);
        Rng fit_rng(6);
        clf.extend_classes(ids, fit_rng);
        state.ResumeTiming();
        clf.fit(inputs, labels, config, fit_rng);
        benchmark::DoNotOptimize(clf.weight().data.data());
    }
}
BENCHMARK(bm_classifier_fit);

void bm_classifier_predict(benchmark::State& state) {
    Rng rng(7);
    LinearSoftmaxClassifier clf(64);
    std::vector<std::uint32_t> ids;
    for (std::uint32_t c = 0; c < 200; ++c) ids.push_back(c);
    clf.extend_classes(ids, rng);
    const Matrix inputs = random_matrix(512, 64, rng);
    for (auto _ : state) {
        auto labels = clf.predict_labels(inputs);
        benchmark::DoNotOptimize(labels.data());
    }
    state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(bm_classifier_predict);

void bm_per_class_accuracy(benchmark::State& state) {
    Rng rng(8);
    const std::size_t samples = 20000;
    std::vector<std::uint32_t> predicted(samples), actual(samples);
    std::vector<std::uint32_t> class_set;
    for (std::uint32_t c = 0; c < 200; ++c) class_set.push_back(c);
    for (std::size_t i = 0; i < samples; ++i) {
        actual[i] = static_cast<std::uint32_t>(i % 200);
        predicted[i] = static_cast<std::uint32_t>(rng.uniform_index(200));
    }
    for (auto _ : state) {
        double acc = per_class_accuracy(predicted, actual, class_set);
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(bm_per_class_accuracy);

} // namespace

BENCHMARK_MAIN();
