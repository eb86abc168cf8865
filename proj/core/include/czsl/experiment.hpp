#pragma once

#include "czsl/cada.hpp"
#include "czsl/classifier.hpp"
#include "czsl/cvae.hpp"
#include "czsl/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace czsl {

enum class ModelKind { cada, cvae };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

struct MemoryConfig {
    MemoryStrategy strategy = MemoryStrategy::reservoir;
    // Slots per class. Per-class strategies use it directly as queue_size;
    // the reservoir gets per_class * num_classes slots in total.
    std::size_t per_class = 5;
};

// Full experiment description; serializes to one JSON document. Unknown or
// ill-typed keys are rejected rather than ignored.
struct ExperimentConfig {
    std::optional<std::string> dataset_path; // binary dataset directory
    SyntheticSpec synthetic;                 // used when no path is given
    Setting setting = Setting::setting2;
    ModelKind model = ModelKind::cada;
    MemoryConfig memory;
    std::size_t num_tasks = 5;
    double test_fraction = 0.2; // setting-1 per-class holdout
    // Setting-2 standard split; defaults to the last quarter of the class
    // ids as unseen when absent.
    std::optional<std::vector<std::uint32_t>> seen_classes;
    std::optional<std::vector<std::uint32_t>> unseen_classes;
    std::size_t latent_dim = 16;
    std::vector<std::size_t> encoder_hidden = {64};
    std::vector<std::size_t> decoder_hidden = {64};
    TrainConfig train;
    ClassifierConfig classifier;
    GenerationCounts generation;
    std::uint64_t seed = 1;
    std::string output_dir; // empty: no files written
};

void validate_config(const ExperimentConfig& config);
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);
std::string config_to_json_text(const ExperimentConfig& config);
// Digest of the canonical JSON form, minus output_dir (it cannot change
// results). Checkpoints embed it to refuse resumption under a different
// configuration.
std::uint64_t config_hash(const ExperimentConfig& config);

// Everything that crosses a task boundary. Checkpoints serialize exactly
// this plus the config hash.
struct RunState {
    std::size_t completed_tasks = 0;
    ModelKind kind = ModelKind::cada;
    std::string strategy;
    Setting setting = Setting::setting2;
    std::uint64_t seed = 0;
    std::optional<CadaModel> cada;
    std::optional<CvaeModel> cvae;
    LinearSoftmaxClassifier classifier;
    EpisodicMemory memory;
    RngSet rngs;
    std::vector<TaskEval> evals;
    std::vector<std::vector<double>> accuracy_matrix;
    TrainTrace trace;
};

struct RunOptions {
    std::optional<std::string> resume_from; // checkpoint file
    std::optional<std::size_t> stop_after_task;
    bool keep_trace = true;
};

struct ExperimentResult {
    MetricsReport report;
    TrainTrace trace;
    RunState state;
};

// Train -> generate -> extend classifier -> fit -> evaluate, once per task.
// With output_dir set, a checkpoint is written after every task and the
// report files after the last one.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const RunOptions& options = {});

void save_checkpoint(const std::string& path, const ExperimentConfig& config,
                     const RunState& state);
// Verifies the integrity checksum and the config hash.
RunState load_checkpoint(const std::string& path,
                         const ExperimentConfig& config);
// Rebuilds the (possibly partial) report from a checkpoint alone.
MetricsReport report_from_checkpoint(const std::string& path);

std::string report_to_json_text(const MetricsReport& report);
std::string report_to_csv_text(const MetricsReport& report);
// (x, series, value) rows; x is the task id.
std::string report_to_plotdata_text(const MetricsReport& report);

enum class SweepAxis { memory_per_class, latent_dim };
SweepAxis sweep_axis_from_string(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepPoint {
    std::size_t value = 0;
    MetricsReport report;
};
struct SweepResult {
    SweepAxis axis = SweepAxis::memory_per_class;
    std::vector<SweepPoint> points;
};

// One full run per axis value, identical otherwise. Values need not be
// sorted; they are run in the given order.
SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis,
                      const std::vector<std::size_t>& values);
// (x, series, value) rows; x is the swept value.
std::string sweep_to_plotdata_text(const SweepResult& sweep);

void write_text_file(const std::string& path, const std::string& content);

} // namespace czsl
