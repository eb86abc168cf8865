#include "czsl/experiment.hpp"

#include "czsl/binio.hpp"
#include "czsl/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace czsl {

using nlohmann::json;

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "cada") return ModelKind::cada;
    if (name == "cvae") return ModelKind::cvae;
    throw ConfigError("unknown model '" + name + "' (expected cada or cvae)");
}

std::string to_string(ModelKind kind) {
    return kind == ModelKind::cada ? "cada" : "cvae";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "memory_per_class") return SweepAxis::memory_per_class;
    if (name == "latent_dim") return SweepAxis::latent_dim;
    throw ConfigError("unknown sweep axis '" + name +
                      "' (expected memory_per_class or latent_dim)");
}

std::string to_string(SweepAxis axis) {
    return axis == SweepAxis::memory_per_class ? "memory_per_class"
                                               : "latent_dim";
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (allowed.count(it.key()) == 0) {
            throw ConfigError("unknown config key '" + context + it.key() +
                              "'");
        }
    }
}

std::uint64_t get_uint(const json& obj, const char* key,
                       std::uint64_t fallback, const std::string& context) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ConfigError("config key '" + context + key +
                      "' must be a nonnegative integer");
}

double get_double(const json& obj, const char* key, double fallback,
                  const std::string& context) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError("config key '" + context + key +
                          "' must be a number");
    }
    return v.get<double>();
}

bool get_bool(const json& obj, const char* key, bool fallback,
              const std::string& context) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
        throw ConfigError("config key '" + context + key +
                          "' must be a boolean");
    }
    return v.get<bool>();
}

std::string get_string(const json& obj, const char* key,
                       const std::string& fallback,
                       const std::string& context) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) {
        throw ConfigError("config key '" + context + key +
                          "' must be a string");
    }
    return v.get<std::string>();
}

template <typename T>
std::vector<T> get_uint_list(const json& obj, const char* key,
                             const std::vector<T>& fallback,
                             const std::string& context) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array()) {
        throw ConfigError("config key '" + context + key +
                          "' must be an array of nonnegative integers");
    }
    std::vector<T> out;
    for (const json& e : v) {
        if (!(e.is_number_unsigned() ||
              (e.is_number_integer() && e.get<std::int64_t>() >= 0))) {
            throw ConfigError("config key '" + context + key +
                              "' must contain nonnegative integers");
        }
        out.push_back(static_cast<T>(e.get<std::uint64_t>()));
    }
    return out;
}

TrainConfig train_from_json(const json& obj) {
    static const std::set<std::string> keys = {
        "epochs",    "batch_size", "learning_rate", "beta1",
        "beta2",     "epsilon",    "gamma",         "delta",
        "kd_weight", "replay",     "distillation",  "recon_loss"};
    check_keys(obj, keys, "train.");
    TrainConfig cfg;
    cfg.epochs = get_uint(obj, "epochs", cfg.epochs, "train.");
    cfg.batch_size = get_uint(obj, "batch_size", cfg.batch_size, "train.");
    cfg.learning_rate =
        get_double(obj, "learning_rate", cfg.learning_rate, "train.");
    cfg.beta1 = get_double(obj, "beta1", cfg.beta1, "train.");
    cfg.beta2 = get_double(obj, "beta2", cfg.beta2, "train.");
    cfg.epsilon = get_double(obj, "epsilon", cfg.epsilon, "train.");
    cfg.gamma = get_double(obj, "gamma", cfg.gamma, "train.");
    cfg.delta = get_double(obj, "delta", cfg.delta, "train.");
    cfg.kd_weight = get_double(obj, "kd_weight", cfg.kd_weight, "train.");
    cfg.replay_enabled = get_bool(obj, "replay", cfg.replay_enabled, "train.");
    cfg.kd_enabled = get_bool(obj, "distillation", cfg.kd_enabled, "train.");
    const std::string recon = get_string(
        obj, "recon_loss", cfg.recon == ReconLoss::l1 ? "l1" : "l2", "train.");
    if (recon == "l1") {
        cfg.recon = ReconLoss::l1;
    } else if (recon == "l2") {
        cfg.recon = ReconLoss::l2;
    } else {
        throw ConfigError("config key 'train.recon_loss' must be l1 or l2");
    }
    return cfg;
}

json train_to_json(const TrainConfig& cfg) {
    json obj;
    obj["epochs"] = cfg.epochs;
    obj["batch_size"] = cfg.batch_size;
    obj["learning_rate"] = cfg.learning_rate;
    obj["beta1"] = cfg.beta1;
    obj["beta2"] = cfg.beta2;
    obj["epsilon"] = cfg.epsilon;
    obj["gamma"] = cfg.gamma;
    obj["delta"] = cfg.delta;
    obj["kd_weight"] = cfg.kd_weight;
    obj["replay"] = cfg.replay_enabled;
    obj["distillation"] = cfg.kd_enabled;
    obj["recon_loss"] = cfg.recon == ReconLoss::l1 ? "l1" : "l2";
    return obj;
}

ClassifierConfig classifier_from_json(const json& obj) {
    static const std::set<std::string> keys = {
        "epochs", "batch_size", "learning_rate", "beta1",
        "beta2",  "epsilon",    "from_scratch"};
    check_keys(obj, keys, "classifier.");
    ClassifierConfig cfg;
    cfg.epochs = get_uint(obj, "epochs", cfg.epochs, "classifier.");
    cfg.batch_size =
        get_uint(obj, "batch_size", cfg.batch_size, "classifier.");
    cfg.learning_rate =
        get_double(obj, "learning_rate", cfg.learning_rate, "classifier.");
    cfg.beta1 = get_double(obj, "beta1", cfg.beta1, "classifier.");
    cfg.beta2 = get_double(obj, "beta2", cfg.beta2, "classifier.");
    cfg.epsilon = get_double(obj, "epsilon", cfg.epsilon, "classifier.");
    cfg.from_scratch =
        get_bool(obj, "from_scratch", cfg.from_scratch, "classifier.");
    return cfg;
}

json classifier_to_json(const ClassifierConfig& cfg) {
    json obj;
    obj["epochs"] = cfg.epochs;
    obj["batch_size"] = cfg.batch_size;
    obj["learning_rate"] = cfg.learning_rate;
    obj["beta1"] = cfg.beta1;
    obj["beta2"] = cfg.beta2;
    obj["epsilon"] = cfg.epsilon;
    obj["from_scratch"] = cfg.from_scratch;
    return obj;
}

SyntheticSpec synthetic_from_json(const json& obj) {
    static const std::set<std::string> keys = {
        "num_classes", "samples_per_class", "feature_dim",
        "attribute_dim", "cluster_spread", "seed"};
    check_keys(obj, keys, "synthetic.");
    SyntheticSpec spec;
    spec.num_classes =
        get_uint(obj, "num_classes", spec.num_classes, "synthetic.");
    spec.samples_per_class = get_uint(obj, "samples_per_class",
                                      spec.samples_per_class, "synthetic.");
    spec.feature_dim =
        get_uint(obj, "feature_dim", spec.feature_dim, "synthetic.");
    spec.attribute_dim =
        get_uint(obj, "attribute_dim", spec.attribute_dim, "synthetic.");
    spec.cluster_spread =
        get_double(obj, "cluster_spread", spec.cluster_spread, "synthetic.");
    spec.seed = get_uint(obj, "seed", spec.seed, "synthetic.");
    return spec;
}

json synthetic_to_json(const SyntheticSpec& spec) {
    json obj;
    obj["num_classes"] = spec.num_classes;
    obj["samples_per_class"] = spec.samples_per_class;
    obj["feature_dim"] = spec.feature_dim;
    obj["attribute_dim"] = spec.attribute_dim;
    obj["cluster_spread"] = spec.cluster_spread;
    obj["seed"] = spec.seed;
    return obj;
}

} // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") +
                          e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> keys = {
        "dataset_path",   "synthetic",      "setting",
        "model",          "memory",         "num_tasks",
        "test_fraction",  "seen_classes",   "unseen_classes",
        "latent_dim",     "encoder_hidden", "decoder_hidden",
        "train",          "classifier",     "generation",
        "seed",           "output_dir"};
    check_keys(root, keys, "");

    ExperimentConfig cfg;
    if (root.contains("dataset_path")) {
        cfg.dataset_path = get_string(root, "dataset_path", "", "");
    }
    if (root.contains("synthetic")) {
        if (!root.at("synthetic").is_object()) {
            throw ConfigError("config key 'synthetic' must be an object");
        }
        cfg.synthetic = synthetic_from_json(root.at("synthetic"));
    }
    const auto setting = get_uint(root, "setting", 2, "");
    if (setting != 1 && setting != 2) {
        throw ConfigError("config key 'setting' must be 1 or 2");
    }
    cfg.setting = setting == 1 ? Setting::setting1 : Setting::setting2;
    cfg.model = model_kind_from_string(get_string(root, "model", "cada", ""));
    if (root.contains("memory")) {
        const json& mem = root.at("memory");
        if (!mem.is_object()) {
            throw ConfigError("config key 'memory' must be an object");
        }
        check_keys(mem, {"strategy", "per_class"}, "memory.");
        cfg.memory.strategy = memory_strategy_from_string(
            get_string(mem, "strategy", to_string(cfg.memory.strategy),
                       "memory."));
        cfg.memory.per_class =
            get_uint(mem, "per_class", cfg.memory.per_class, "memory.");
    }
    cfg.num_tasks = get_uint(root, "num_tasks", cfg.num_tasks, "");
    cfg.test_fraction =
        get_double(root, "test_fraction", cfg.test_fraction, "");
    if (root.contains("seen_classes")) {
        cfg.seen_classes = get_uint_list<std::uint32_t>(
            root, "seen_classes", {}, "");
    }
    if (root.contains("unseen_classes")) {
        cfg.unseen_classes = get_uint_list<std::uint32_t>(
            root, "unseen_classes", {}, "");
    }
    cfg.latent_dim = get_uint(root, "latent_dim", cfg.latent_dim, "");
    cfg.encoder_hidden = get_uint_list<std::size_t>(
        root, "encoder_hidden", cfg.encoder_hidden, "");
    cfg.decoder_hidden = get_uint_list<std::size_t>(
        root, "decoder_hidden", cfg.decoder_hidden, "");
    if (root.contains("train")) {
        if (!root.at("train").is_object()) {
            throw ConfigError("config key 'train' must be an object");
        }
        cfg.train = train_from_json(root.at("train"));
    }
    if (root.contains("classifier")) {
        if (!root.at("classifier").is_object()) {
            throw ConfigError("config key 'classifier' must be an object");
        }
        cfg.classifier = classifier_from_json(root.at("classifier"));
    }
    if (root.contains("generation")) {
        const json& gen = root.at("generation");
        if (!gen.is_object()) {
            throw ConfigError("config key 'generation' must be an object");
        }
        check_keys(gen, {"per_seen_class", "per_unseen_class"}, "generation.");
        cfg.generation.per_seen_class =
            get_uint(gen, "per_seen_class", cfg.generation.per_seen_class,
                     "generation.");
        cfg.generation.per_unseen_class =
            get_uint(gen, "per_unseen_class", cfg.generation.per_unseen_class,
                     "generation.");
    }
    cfg.seed = get_uint(root, "seed", cfg.seed, "");
    cfg.output_dir = get_string(root, "output_dir", cfg.output_dir, "");
    validate_config(cfg);
    return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return config_from_json_text(buffer.str());
}

std::string config_to_json_text(const ExperimentConfig& config) {
    json root;
    if (config.dataset_path.has_value()) {
        root["dataset_path"] = *config.dataset_path;
    }
    root["synthetic"] = synthetic_to_json(config.synthetic);
    root["setting"] = config.setting == Setting::setting1 ? 1 : 2;
    root["model"] = to_string(config.model);
    root["memory"] = {{"strategy", to_string(config.memory.strategy)},
                      {"per_class", config.memory.per_class}};
    root["num_tasks"] = config.num_tasks;
    root["test_fraction"] = config.test_fraction;
    if (config.seen_classes.has_value()) {
        root["seen_classes"] = *config.seen_classes;
    }
    if (config.unseen_classes.has_value()) {
        root["unseen_classes"] = *config.unseen_classes;
    }
    root["latent_dim"] = config.latent_dim;
    root["encoder_hidden"] = config.encoder_hidden;
    root["decoder_hidden"] = config.decoder_hidden;
    root["train"] = train_to_json(config.train);
    root["classifier"] = classifier_to_json(config.classifier);
    root["generation"] = {
        {"per_seen_class", config.generation.per_seen_class},
        {"per_unseen_class", config.generation.per_unseen_class}};
    root["seed"] = config.seed;
    if (!config.output_dir.empty()) root["output_dir"] = config.output_dir;
    return root.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    json root = json::parse(config_to_json_text(config));
    root.erase("output_dir");
    return fnv1a(root.dump());
}

void validate_config(const ExperimentConfig& config) {
    if (config.num_tasks == 0) {
        throw ConfigError("num_tasks must be at least 1");
    }
    if (config.latent_dim == 0) {
        throw ConfigError("latent_dim must be at least 1");
    }
    for (std::size_t h : config.encoder_hidden) {
        if (h == 0) throw ConfigError("encoder_hidden widths must be positive");
    }
    for (std::size_t h : config.decoder_hidden) {
        if (h == 0) throw ConfigError("decoder_hidden widths must be positive");
    }
    if (config.setting == Setting::setting1 &&
        (config.test_fraction <= 0.0 || config.test_fraction >= 1.0)) {
        throw ConfigError("test_fraction must lie strictly between 0 and 1");
    }
    if (config.seen_classes.has_value() != config.unseen_classes.has_value()) {
        throw ConfigError(
            "seen_classes and unseen_classes must be given together");
    }
    if (config.seen_classes.has_value() &&
        (config.seen_classes->empty() || config.unseen_classes->empty())) {
        throw ConfigError("explicit class splits must be non-empty");
    }
    const TrainConfig& t = config.train;
    if (t.epochs == 0 || t.batch_size == 0) {
        throw ConfigError("train.epochs and train.batch_size must be positive");
    }
    if (t.learning_rate <= 0.0 || t.epsilon <= 0.0) {
        throw ConfigError("train.learning_rate and train.epsilon must be positive");
    }
    if (t.beta1 < 0.0 || t.beta1 >= 1.0 || t.beta2 < 0.0 || t.beta2 >= 1.0) {
        throw ConfigError("train.beta1 and train.beta2 must lie in [0, 1)");
    }
    if (t.gamma < 0.0 || t.delta < 0.0 || t.kd_weight < 0.0) {
        throw ConfigError("loss weights must be nonnegative");
    }
    const ClassifierConfig& c = config.classifier;
    if (c.epochs == 0 || c.batch_size == 0) {
        throw ConfigError(
            "classifier.epochs and classifier.batch_size must be positive");
    }
    if (c.learning_rate <= 0.0 || c.epsilon <= 0.0) {
        throw ConfigError(
            "classifier.learning_rate and classifier.epsilon must be positive");
    }
    if (config.generation.per_seen_class == 0 ||
        config.generation.per_unseen_class == 0) {
        throw ConfigError(
            "generation counts must be positive; every active class needs "
            "classifier training samples");
    }
    if (!config.dataset_path.has_value()) {
        const SyntheticSpec& s = config.synthetic;
        if (s.num_classes == 0 || s.samples_per_class == 0 ||
            s.feature_dim == 0 || s.attribute_dim == 0) {
            throw ConfigError("synthetic dataset dimensions must be positive");
        }
    }
}

namespace {

TaskStream build_stream(const FeatureDataset& dataset,
                        const ExperimentConfig& config, Rng& split_rng) {
    if (config.setting == Setting::setting1) {
        return split_setting1(dataset, config.num_tasks, split_rng.next_u64(),
                              config.test_fraction);
    }
    std::vector<std::uint32_t> seen, unseen;
    if (config.seen_classes.has_value()) {
        seen = *config.seen_classes;
        unseen = *config.unseen_classes;
    } else {
        const std::size_t total = dataset.num_classes();
        const std::size_t holdout = (total + 3) / 4;
        for (std::size_t cls = 0; cls < total; ++cls) {
            if (cls + holdout < total) {
                seen.push_back(static_cast<std::uint32_t>(cls));
            } else {
                unseen.push_back(static_cast<std::uint32_t>(cls));
            }
        }
    }
    return split_setting2(dataset, config.num_tasks, seen, unseen,
                          split_rng.next_u64());
}

std::vector<std::uint32_t> sorted_union(const std::vector<std::uint32_t>& a,
                                        const std::vector<std::uint32_t>& b) {
    std::set<std::uint32_t> merged(a.begin(), a.end());
    merged.insert(b.begin(), b.end());
    return {merged.begin(), merged.end()};
}

// With replay disabled the memory must not influence results at all, so
// stored entries are withheld from generation too.
LabeledMatrix collect_available_features(const FeatureDataset& dataset,
                                         const TaskSplit& task,
                                         const EpisodicMemory& memory,
                                         bool replay_enabled) {
    const std::vector<MemoryEntry> stored =
        replay_enabled ? memory.snapshot() : std::vector<MemoryEntry>{};
    LabeledMatrix out;
    out.rows = Matrix(task.train_indices.size() + stored.size(),
                      dataset.feature_dim());
    out.labels.reserve(out.rows.rows);
    std::size_t r = 0;
    for (std::size_t idx : task.train_indices) {
        auto src = dataset.features.row(idx);
        std::copy(src.begin(), src.end(), out.rows.row(r).begin());
        out.labels.push_back(dataset.labels[idx]);
        ++r;
    }
    for (const MemoryEntry& entry : stored) {
        std::copy(entry.feature.begin(), entry.feature.end(),
                  out.rows.row(r).begin());
        out.labels.push_back(entry.label);
        ++r;
    }
    return out;
}

// The conditional model classifies in feature space: real rows are sampled
// for the classes that have them, the decoder synthesizes the rest.
LabeledMatrix build_cvae_classifier_set(
    const CvaeModel& model, const LabeledMatrix& available,
    const std::vector<std::uint32_t>& active_classes, const Matrix& attributes,
    const GenerationCounts& counts, Rng& rng) {
    std::map<std::uint32_t, std::vector<std::size_t>> rows_by_class;
    for (std::size_t i = 0; i < available.size(); ++i) {
        rows_by_class[available.labels[i]].push_back(i);
    }
    LabeledMatrix out;
    std::size_t total = 0;
    for (std::uint32_t cls : active_classes) {
        total += rows_by_class.count(cls) != 0 ? counts.per_seen_class
                                               : counts.per_unseen_class;
    }
    out.rows = Matrix(total, model.feature_dim);
    out.labels.reserve(total);
    std::size_t r = 0;
    for (std::uint32_t cls : active_classes) {
        const auto it = rows_by_class.find(cls);
        if (it != rows_by_class.end()) {
            for (std::size_t j = 0; j < counts.per_seen_class; ++j) {
                const std::size_t pick =
                    it->second[rng.uniform_index(it->second.size())];
                auto src = available.rows.row(pick);
                std::copy(src.begin(), src.end(), out.rows.row(r).begin());
                out.labels.push_back(cls);
                ++r;
            }
        } else {
            const LabeledMatrix gen = generate_features_cvae(
                model, {cls}, attributes, counts.per_unseen_class, rng, true);
            for (std::size_t j = 0; j < gen.size(); ++j) {
                auto src = gen.rows.row(j);
                std::copy(src.begin(), src.end(), out.rows.row(r).begin());
                out.labels.push_back(cls);
                ++r;
            }
        }
    }
    return out;
}

MetricsReport build_report(const ExperimentConfig& config,
                           const RunState& state) {
    MetricsReport report;
    report.model = to_string(state.kind);
    report.strategy = state.strategy;
    report.setting = state.setting;
    report.seed = state.seed;
    report.config_hash = to_hex(config_hash(config));
    report.tasks = state.evals;
    report.aggregates = state.setting == Setting::setting2
                            ? aggregate_setting2(state.evals)
                            : aggregate_setting1(state.evals);
    report.forgetting = forgetting_measure(state.accuracy_matrix);
    report.accuracy_matrix = state.accuracy_matrix;
    return report;
}

} // namespace

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + path);
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const RunOptions& options) {
    validate_config(config);
    FeatureDataset dataset = config.dataset_path.has_value()
                                 ? load_dataset(*config.dataset_path)
                                 : generate_synthetic(config.synthetic);
    dataset.validate();

    // The stream is rebuilt from a fresh split stream on every run, resumed
    // or not, so checkpoints never need to carry it.
    RngSet boot = RngSet::from_seed(config.seed);
    const TaskStream stream = build_stream(dataset, config, boot.split);

    RunState state;
    if (options.resume_from.has_value()) {
        state = load_checkpoint(*options.resume_from, config);
    } else {
        state.kind = config.model;
        state.strategy = to_string(config.memory.strategy);
        state.setting = config.setting;
        state.seed = config.seed;
        state.rngs = std::move(boot);
        const std::size_t d_x = dataset.feature_dim();
        const std::size_t d_a = dataset.attribute_dim();
        if (config.model == ModelKind::cada) {
            state.cada = CadaModel::create(d_x, d_a, config.latent_dim,
                                           config.encoder_hidden,
                                           config.decoder_hidden,
                                           state.rngs.model_init);
            state.classifier = LinearSoftmaxClassifier(config.latent_dim);
        } else {
            state.cvae = CvaeModel::create(d_x, d_a, config.latent_dim,
                                           config.encoder_hidden,
                                           config.decoder_hidden,
                                           state.rngs.model_init);
            state.classifier = LinearSoftmaxClassifier(d_x);
        }
        const std::size_t capacity =
            config.memory.strategy == MemoryStrategy::reservoir
                ? config.memory.per_class * dataset.num_classes()
                : config.memory.per_class;
        state.memory = EpisodicMemory(config.memory.strategy, capacity);
    }

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
    }

    const std::size_t total = stream.total_tasks();
    for (std::size_t t = state.completed_tasks + 1; t <= total; ++t) {
        const TaskSplit& task = stream.task(t);
        TrainRngs train_rngs{&state.rngs.training, &state.rngs.memory};
        TrainTrace* trace = options.keep_trace ? &state.trace : nullptr;

        if (state.kind == ModelKind::cada) {
            std::optional<CadaTeacher> teacher;
            if (t > 1) teacher = CadaTeacher::from_model(*state.cada);
            train_task_cada(*state.cada, task, dataset, state.memory,
                            teacher.has_value() ? &*teacher : nullptr,
                            config.train, train_rngs, trace);
        } else {
            std::optional<CvaeTeacher> teacher;
            if (t > 1) teacher = CvaeTeacher::from_model(*state.cvae);
            train_task_cvae(*state.cvae, task, dataset, state.memory,
                            teacher.has_value() ? &*teacher : nullptr,
                            config.train, train_rngs, trace);
        }

        const std::vector<std::uint32_t> active =
            sorted_union(task.seen_classes, task.unseen_classes_visible);
        std::vector<std::uint32_t> fresh;
        for (std::uint32_t cls : active) {
            if (!state.classifier.has_class(cls)) fresh.push_back(cls);
        }
        state.classifier.extend_classes(fresh, state.rngs.classifier);

        const LabeledMatrix available = collect_available_features(
            dataset, task, state.memory, config.train.replay_enabled);
        if (state.kind == ModelKind::cada) {
            const LabeledMatrix latents = generate_latents_cada(
                *state.cada, available, active, dataset.attributes,
                config.generation, state.rngs.generation, true);
            state.classifier.fit(latents.rows, latents.labels,
                                 config.classifier, state.rngs.classifier);
        } else {
            const LabeledMatrix features = build_cvae_classifier_set(
                *state.cvae, available, active, dataset.attributes,
                config.generation, state.rngs.generation);
            state.classifier.fit(features.rows, features.labels,
                                 config.classifier, state.rngs.classifier);
        }

        PredictFn predict;
        if (state.kind == ModelKind::cada) {
            const CadaModel& model = *state.cada;
            const LinearSoftmaxClassifier& clf = state.classifier;
            predict = [&model, &clf](const Matrix& features) {
                return clf.predict_labels(encode_mean_cada(model, features));
            };
        } else {
            const LinearSoftmaxClassifier& clf = state.classifier;
            predict = [&clf](const Matrix& features) {
                return clf.predict_labels(features);
            };
        }

        state.evals.push_back(evaluate_task(predict, dataset, stream, t));
        std::vector<double> row(t);
        for (std::size_t j = 1; j <= t; ++j) {
            row[j - 1] = seen_pool_accuracy(predict, dataset, stream, j);
        }
        state.accuracy_matrix.push_back(std::move(row));
        state.completed_tasks = t;

        if (!config.output_dir.empty()) {
            save_checkpoint(config.output_dir + "/checkpoint_task_" +
                                std::to_string(t) + ".ckpt",
                            config, state);
        }
        if (options.stop_after_task.has_value() &&
            *options.stop_after_task == t) {
            break;
        }
    }

    ExperimentResult result;
    result.report = build_report(config, state);
    result.trace = state.trace;
    if (!config.output_dir.empty() && state.completed_tasks == total) {
        write_text_file(config.output_dir + "/report.json",
                        report_to_json_text(result.report));
        write_text_file(config.output_dir + "/report.csv",
                        report_to_csv_text(result.report));
        write_text_file(config.output_dir + "/plot.tsv",
                        report_to_plotdata_text(result.report));
    }
    result.state = std::move(state);
    return result;
}

std::string report_to_json_text(const MetricsReport& report) {
    json root;
    root["model"] = report.model;
    root["strategy"] = report.strategy;
    root["setting"] = report.setting == Setting::setting1 ? 1 : 2;
    root["seed"] = report.seed;
    root["config_hash"] = report.config_hash;
    json tasks = json::array();
    for (const TaskEval& e : report.tasks) {
        json entry;
        entry["task"] = e.task_id;
        entry["seen_accuracy"] = e.seen_accuracy;
        entry["unseen_accuracy"] =
            e.unseen_accuracy.has_value() ? json(*e.unseen_accuracy)
                                          : json(nullptr);
        entry["harmonic"] =
            e.harmonic.has_value() ? json(*e.harmonic) : json(nullptr);
        tasks.push_back(entry);
    }
    root["tasks"] = tasks;
    json agg;
    agg["mean_seen_accuracy"] = report.aggregates.mean_seen_accuracy;
    agg["mean_unseen_accuracy"] =
        report.aggregates.mean_unseen_accuracy.has_value()
            ? json(*report.aggregates.mean_unseen_accuracy)
            : json(nullptr);
    agg["mean_harmonic"] = report.aggregates.mean_harmonic.has_value()
                               ? json(*report.aggregates.mean_harmonic)
                               : json(nullptr);
    root["aggregates"] = agg;
    root["forgetting"] = report.forgetting.has_value()
                             ? json(*report.forgetting)
                             : json(nullptr);
    root["accuracy_matrix"] = report.accuracy_matrix;
    return root.dump(2) + "\n";
}

std::string report_to_csv_text(const MetricsReport& report) {
    std::string out = "task,seen_accuracy,unseen_accuracy,harmonic\n";
    for (const TaskEval& e : report.tasks) {
        out += std::to_string(e.task_id);
        out += ',';
        out += format_double(e.seen_accuracy);
        out += ',';
        if (e.unseen_accuracy.has_value()) {
            out += format_double(*e.unseen_accuracy);
        }
        out += ',';
        if (e.harmonic.has_value()) out += format_double(*e.harmonic);
        out += '\n';
    }
    out += "aggregate,";
    out += format_double(report.aggregates.mean_seen_accuracy);
    out += ',';
    if (report.aggregates.mean_unseen_accuracy.has_value()) {
        out += format_double(*report.aggregates.mean_unseen_accuracy);
    }
    out += ',';
    if (report.aggregates.mean_harmonic.has_value()) {
        out += format_double(*report.aggregates.mean_harmonic);
    }
    out += '\n';
    return out;
}

std::string report_to_plotdata_text(const MetricsReport& report) {
    std::string out = "x\tseries\tvalue\n";
    for (const TaskEval& e : report.tasks) {
        const std::string task = std::to_string(e.task_id);
        out += task + "\tseen\t" + format_double(e.seen_accuracy) + "\n";
        if (e.unseen_accuracy.has_value()) {
            out += task + "\tunseen\t" + format_double(*e.unseen_accuracy) +
                   "\n";
        }
        if (e.harmonic.has_value()) {
            out += task + "\tharmonic\t" + format_double(*e.harmonic) + "\n";
        }
    }
    return out;
}

SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis,
                      const std::vector<std::size_t>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    SweepResult result;
    result.axis = axis;
    for (std::size_t value : values) {
        ExperimentConfig config = base;
        config.output_dir.clear();
        if (axis == SweepAxis::memory_per_class) {
            config.memory.per_class = value;
        } else {
            config.latent_dim = value;
        }
        RunOptions options;
        options.keep_trace = false;
        ExperimentResult run = run_experiment(config, options);
        result.points.push_back(SweepPoint{value, std::move(run.report)});
    }
    return result;
}

std::string sweep_to_plotdata_text(const SweepResult& sweep) {
    std::string out = "x\tseries\tvalue\n";
    for (const SweepPoint& point : sweep.points) {
        const std::string x = std::to_string(point.value);
        out += x + "\tseen\t" +
               format_double(point.report.aggregates.mean_seen_accuracy) +
               "\n";
        if (point.report.aggregates.mean_unseen_accuracy.has_value()) {
            out += x + "\tunseen\t" +
                   format_double(
                       *point.report.aggregates.mean_unseen_accuracy) +
                   "\n";
        }
        if (point.report.aggregates.mean_harmonic.has_value()) {
            out += x + "\tharmonic\t" +
                   format_double(*point.report.aggregates.mean_harmonic) +
                   "\n";
        }
    }
    return out;
}

} // namespace czsl
