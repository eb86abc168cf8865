#include "czsl/binio.hpp"
#include "czsl/errors.hpp"
#include "czsl/experiment.hpp"

#include <fstream>
#include <sstream>

namespace czsl {

namespace {

constexpr char kMagic[8] = {'C', 'Z', 'S', 'L', 'C', 'K', 'P', '1'};

void write_optional(std::ostream& out, const std::optional<double>& v) {
    write_le<std::uint8_t>(out, v.has_value() ? 1 : 0);
    write_le<double>(out, v.value_or(0.0));
}

std::optional<double> read_optional(std::istream& in) {
    const auto has = read_le<std::uint8_t>(in);
    const auto value = read_le<double>(in);
    if (has > 1) throw IoError("corrupted optional flag in checkpoint");
    return has == 1 ? std::optional<double>(value) : std::nullopt;
}

void write_payload(std::ostream& out, const ExperimentConfig& config,
                   const RunState& state) {
    write_string(out, kRngAlgorithm);
    write_le<std::uint64_t>(out, config_hash(config));
    write_string(out, to_string(state.kind));
    write_string(out, state.strategy);
    write_le<std::uint32_t>(out,
                            state.setting == Setting::setting1 ? 1u : 2u);
    write_le<std::uint64_t>(out, state.seed);
    write_le<std::uint64_t>(out, state.completed_tasks);

    if (state.kind == ModelKind::cada) {
        if (!state.cada.has_value()) {
            throw UsageError("checkpoint state is missing the model");
        }
        const CadaModel& m = *state.cada;
        write_le<std::uint64_t>(out, m.latent_dim);
        write_le<double>(out, m.gamma);
        write_le<double>(out, m.delta);
        write_le<double>(out, m.kd_weight);
        serialize_net(out, m.feature_encoder);
        serialize_net(out, m.attribute_encoder);
        serialize_net(out, m.feature_decoder);
        serialize_net(out, m.attribute_decoder);
    } else {
        if (!state.cvae.has_value()) {
            throw UsageError("checkpoint state is missing the model");
        }
        const CvaeModel& m = *state.cvae;
        write_le<std::uint64_t>(out, m.feature_dim);
        write_le<std::uint64_t>(out, m.attribute_dim);
        write_le<std::uint64_t>(out, m.latent_dim);
        write_le<double>(out, m.kd_weight);
        serialize_net(out, m.encoder);
        serialize_net(out, m.decoder);
    }

    state.classifier.serialize(out);
    state.memory.serialize(out);

    write_string(out, state.rngs.dataset.serialize_state());
    write_string(out, state.rngs.split.serialize_state());
    write_string(out, state.rngs.model_init.serialize_state());
    write_string(out, state.rngs.training.serialize_state());
    write_string(out, state.rngs.memory.serialize_state());
    write_string(out, state.rngs.generation.serialize_state());
    write_string(out, state.rngs.classifier.serialize_state());

    write_le<std::uint64_t>(out, state.evals.size());
    for (const TaskEval& e : state.evals) {
        write_le<std::uint64_t>(out, e.task_id);
        write_le<double>(out, e.seen_accuracy);
        write_optional(out, e.unseen_accuracy);
        write_optional(out, e.harmonic);
    }

    write_le<std::uint64_t>(out, state.accuracy_matrix.size());
    for (const auto& row : state.accuracy_matrix) {
        write_f64_vec(out, row);
    }

    write_le<std::uint64_t>(out, state.trace.size());
    for (const EpochTraceEntry& entry : state.trace) {
        write_le<std::uint64_t>(out, entry.task_id);
        write_le<std::uint64_t>(out, entry.epoch);
        write_le<double>(out, entry.mean_loss);
        write_le<std::uint64_t>(out, entry.param_hash);
    }
}

struct ParsedCheckpoint {
    std::string algorithm;
    std::uint64_t config_hash = 0;
    RunState state;
};

ParsedCheckpoint parse_payload(std::istream& in) {
    ParsedCheckpoint parsed;
    RunState& state = parsed.state;
    parsed.algorithm = read_string(in);
    parsed.config_hash = read_le<std::uint64_t>(in);
    state.kind = model_kind_from_string(read_string(in));
    state.strategy = read_string(in);
    const auto setting = read_le<std::uint32_t>(in);
    if (setting != 1 && setting != 2) {
        throw IoError("corrupted setting tag in checkpoint");
    }
    state.setting = setting == 1 ? Setting::setting1 : Setting::setting2;
    state.seed = read_le<std::uint64_t>(in);
    state.completed_tasks = read_le<std::uint64_t>(in);

    if (state.kind == ModelKind::cada) {
        CadaModel m;
        m.latent_dim = read_le<std::uint64_t>(in);
        m.gamma = read_le<double>(in);
        m.delta = read_le<double>(in);
        m.kd_weight = read_le<double>(in);
        m.feature_encoder = deserialize_net(in);
        m.attribute_encoder = deserialize_net(in);
        m.feature_decoder = deserialize_net(in);
        m.attribute_decoder = deserialize_net(in);
        state.cada = std::move(m);
    } else {
        CvaeModel m;
        m.feature_dim = read_le<std::uint64_t>(in);
        m.attribute_dim = read_le<std::uint64_t>(in);
        m.latent_dim = read_le<std::uint64_t>(in);
        m.kd_weight = read_le<double>(in);
        m.encoder = deserialize_net(in);
        m.decoder = deserialize_net(in);
        state.cvae = std::move(m);
    }

    state.classifier = LinearSoftmaxClassifier::deserialize(in);
    state.memory = EpisodicMemory::deserialize(in);

    state.rngs.dataset.restore_state(read_string(in));
    state.rngs.split.restore_state(read_string(in));
    state.rngs.model_init.restore_state(read_string(in));
    state.rngs.training.restore_state(read_string(in));
    state.rngs.memory.restore_state(read_string(in));
    state.rngs.generation.restore_state(read_string(in));
    state.rngs.classifier.restore_state(read_string(in));

    const auto evals = read_le<std::uint64_t>(in);
    state.evals.resize(evals);
    for (TaskEval& e : state.evals) {
        e.task_id = read_le<std::uint64_t>(in);
        e.seen_accuracy = read_le<double>(in);
        e.unseen_accuracy = read_optional(in);
        e.harmonic = read_optional(in);
    }

    const auto rows = read_le<std::uint64_t>(in);
    state.accuracy_matrix.resize(rows);
    for (auto& row : state.accuracy_matrix) {
        row = read_f64_vec(in);
    }

    const auto traced = read_le<std::uint64_t>(in);
    state.trace.resize(traced);
    for (EpochTraceEntry& entry : state.trace) {
        entry.task_id = read_le<std::uint64_t>(in);
        entry.epoch = read_le<std::uint64_t>(in);
        entry.mean_loss = read_le<double>(in);
        entry.param_hash = read_le<std::uint64_t>(in);
    }
    return parsed;
}

ParsedCheckpoint parse_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || !std::equal(magic, magic + 8, kMagic)) {
        throw IoError(path + " is not a checkpoint file");
    }
    const auto payload_len = read_le<std::uint64_t>(in);
    std::string payload(payload_len, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(payload_len));
    if (!in) throw IoError("checkpoint " + path + " is truncated");
    const auto stored = read_le<std::uint64_t>(in);
    if (fnv1a(payload) != stored) {
        throw IoError("checkpoint " + path + " failed its checksum");
    }
    std::istringstream stream(payload);
    return parse_payload(stream);
}

} // namespace

void save_checkpoint(const std::string& path, const ExperimentConfig& config,
                     const RunState& state) {
    std::ostringstream payload_stream;
    write_payload(payload_stream, config, state);
    const std::string payload = payload_stream.str();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_le<std::uint64_t>(out, payload.size());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    write_le<std::uint64_t>(out, fnv1a(payload));
    if (!out) throw IoError("failed writing checkpoint " + path);
}

RunState load_checkpoint(const std::string& path,
                         const ExperimentConfig& config) {
    ParsedCheckpoint parsed = parse_checkpoint(path);
    if (parsed.algorithm != kRngAlgorithm) {
        throw IoError("checkpoint " + path + " was written with rng '" +
                      parsed.algorithm + "', this build provides '" +
                      kRngAlgorithm + "'");
    }
    if (parsed.config_hash != config_hash(config)) {
        throw ConfigError(
            "checkpoint " + path +
            " was created under a different configuration; refusing to resume");
    }
    if (parsed.state.kind != config.model) {
        throw ConfigError("checkpoint model kind does not match the config");
    }
    return std::move(parsed.state);
}

MetricsReport report_from_checkpoint(const std::string& path) {
    const ParsedCheckpoint parsed = parse_checkpoint(path);
    const RunState& state = parsed.state;
    MetricsReport report;
    report.model = to_string(state.kind);
    report.strategy = state.strategy;
    report.setting = state.setting;
    report.seed = state.seed;
    report.config_hash = to_hex(parsed.config_hash);
    report.tasks = state.evals;
    report.aggregates = state.setting == Setting::setting2
                            ? aggregate_setting2(state.evals)
                            : aggregate_setting1(state.evals);
    report.forgetting = forgetting_measure(state.accuracy_matrix);
    report.accuracy_matrix = state.accuracy_matrix;
    return report;
}

} // namespace czsl
