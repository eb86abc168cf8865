#include "czsl/errors.hpp"
#include "czsl/experiment.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace czsl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("czsl_runner_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

ExperimentConfig tiny_config() {
    ExperimentConfig config;
    config.synthetic.num_classes = 8;
    config.synthetic.samples_per_class = 10;
    config.synthetic.feature_dim = 6;
    config.synthetic.attribute_dim = 4;
    config.synthetic.seed = 9;
    config.setting = Setting::setting2;
    config.num_tasks = 2;
    config.latent_dim = 4;
    config.encoder_hidden = {8};
    config.decoder_hidden = {8};
    config.train.epochs = 2;
    config.train.batch_size = 16;
    config.classifier.epochs = 5;
    config.classifier.batch_size = 32;
    config.generation.per_seen_class = 5;
    config.generation.per_unseen_class = 5;
    config.memory.strategy = MemoryStrategy::reservoir;
    config.memory.per_class = 2;
    config.seed = 3;
    return config;
}

MetricsReport sample_report() {
    MetricsReport report;
    report.model = "cada";
    report.strategy = "reservoir";
    report.setting = Setting::setting1;
    report.seed = 11;
    report.config_hash = "00000000deadbeef";
    report.tasks = {
        TaskEval{1, 0.75, 0.25, harmonic_mean(0.75, 0.25)},
        TaskEval{2, 0.5, std::nullopt, std::nullopt},
    };
    report.aggregates = aggregate_setting1(report.tasks);
    report.accuracy_matrix = {{0.75}, {0.7, 0.5}};
    report.forgetting = forgetting_measure(report.accuracy_matrix);
    return report;
}

} // namespace

TEST_CASE("config serialization round-trips") {
    ExperimentConfig config = tiny_config();
    config.train.gamma = 2.5;
    config.train.recon = ReconLoss::l2;
    config.memory.strategy = MemoryStrategy::mean_of_features;
    config.seen_classes = std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5};
    config.unseen_classes = std::vector<std::uint32_t>{6, 7};

    const std::string text = config_to_json_text(config);
    const ExperimentConfig back = config_from_json_text(text);
    CHECK(config_to_json_text(back) == text);
    CHECK(back.train.gamma == 2.5);
    CHECK(back.train.recon == ReconLoss::l2);
    CHECK(back.memory.strategy == MemoryStrategy::mean_of_features);
    REQUIRE(back.seen_classes.has_value());
    CHECK(*back.seen_classes == *config.seen_classes);
}

TEST_CASE("defaults survive an empty config document") {
    const ExperimentConfig config = config_from_json_text("{}");
    CHECK(config.model == ModelKind::cada);
    CHECK(config.setting == Setting::setting2);
    CHECK(config.num_tasks == 5);
    CHECK(config.latent_dim == 16);
    CHECK(config.train.epochs == 50);
    CHECK(config.train.gamma == 1.0);
    CHECK(config.memory.strategy == MemoryStrategy::reservoir);
    CHECK(config.memory.per_class == 5);
}

TEST_CASE("unknown keys are rejected with their full path") {
    CHECK_THROWS_WITH_AS(config_from_json_text(R"({"bogus": 1})"),
                         "unknown config key 'bogus'", ConfigError);
    CHECK_THROWS_WITH_AS(
        config_from_json_text(R"({"memory": {"queue": 3}})"),
        "unknown config key 'memory.queue'", ConfigError);
    CHECK_THROWS_WITH_AS(
        config_from_json_text(R"({"train": {"momentum": 0.9}})"),
        "unknown config key 'train.momentum'", ConfigError);
}

TEST_CASE("ill-typed values are rejected") {
    CHECK_THROWS_AS(config_from_json_text(R"({"num_tasks": -2})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"model": "vgg"})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"setting": 3})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"train": {"replay": "yes"}})"),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json_text("[]"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text("{"), ConfigError);
}

TEST_CASE("validation catches impossible experiments") {
    ExperimentConfig config = tiny_config();
    config.num_tasks = 0;
    CHECK_THROWS_AS(validate_config(config), ConfigError);

    config = tiny_config();
    config.setting = Setting::setting1;
    config.test_fraction = 1.0;
    CHECK_THROWS_AS(validate_config(config), ConfigError);

    config = tiny_config();
    config.seen_classes = std::vector<std::uint32_t>{0, 1};
    CHECK_THROWS_AS(validate_config(config), ConfigError);

    config = tiny_config();
    config.generation.per_unseen_class = 0;
    CHECK_THROWS_AS(validate_config(config), ConfigError);

    config = tiny_config();
    config.train.beta1 = 1.0;
    CHECK_THROWS_AS(validate_config(config), ConfigError);
}

TEST_CASE("the config hash ignores the output directory only") {
    ExperimentConfig a = tiny_config();
    ExperimentConfig b = tiny_config();
    b.output_dir = "/somewhere/else";
    CHECK(config_hash(a) == config_hash(b));

    b = tiny_config();
    b.seed = 4;
    CHECK(config_hash(a) != config_hash(b));

    b = tiny_config();
    b.train.gamma = 7.0;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("report emitters agree on the numbers") {
    const MetricsReport report = sample_report();

    const json parsed = json::parse(report_to_json_text(report));
    CHECK(parsed.at("model") == "cada");
    CHECK(parsed.at("strategy") == "reservoir");
    CHECK(parsed.at("setting") == 1);
    CHECK(parsed.at("seed") == 11);
    CHECK(parsed.at("config_hash") == "00000000deadbeef");
    REQUIRE(parsed.at("tasks").size() == 2);
    CHECK(parsed.at("tasks")[0].at("seen_accuracy").get<double>() == 0.75);
    CHECK(parsed.at("tasks")[0].at("unseen_accuracy").get<double>() == 0.25);
    CHECK(parsed.at("tasks")[1].at("unseen_accuracy").is_null());
    CHECK(parsed.at("tasks")[1].at("harmonic").is_null());
    CHECK(parsed.at("aggregates").at("mean_seen_accuracy").get<double>() ==
          0.625);
    CHECK(parsed.at("aggregates").at("mean_unseen_accuracy").get<double>() ==
          0.25);
    REQUIRE(report.forgetting.has_value());
    CHECK(*report.forgetting == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(parsed.at("forgetting").get<double>() == *report.forgetting);
    CHECK(parsed.at("accuracy_matrix")[1][0].get<double>() == 0.7);

    const std::string csv = report_to_csv_text(report);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "task,seen_accuracy,unseen_accuracy,harmonic");
    std::getline(lines, line);
    CHECK(line == "1,0.75,0.25,0.375");
    std::getline(lines, line);
    CHECK(line == "2,0.5,,");
    std::getline(lines, line);
    CHECK(line == "aggregate,0.625,0.25,0.375");
    CHECK_FALSE(std::getline(lines, line));

    const std::string tsv = report_to_plotdata_text(report);
    CHECK(tsv.rfind("x\tseries\tvalue\n", 0) == 0);
    CHECK(tsv.find("1\tseen\t0.75\n") != std::string::npos);
    CHECK(tsv.find("1\tunseen\t0.25\n") != std::string::npos);
    CHECK(tsv.find("1\tharmonic\t0.375\n") != std::string::npos);
    CHECK(tsv.find("2\tseen\t0.5\n") != std::string::npos);
    CHECK(tsv.find("2\tunseen") == std::string::npos);
}

TEST_CASE("a small experiment produces a full report") {
    const ExperimentConfig config = tiny_config();
    const ExperimentResult result = run_experiment(config);

    CHECK(result.report.model == "cada");
    CHECK(result.report.strategy == "reservoir");
    CHECK(result.report.seed == 3);
    REQUIRE(result.report.tasks.size() == 2);
    for (const TaskEval& e : result.report.tasks) {
        CHECK(e.seen_accuracy >= 0.0);
        CHECK(e.seen_accuracy <= 1.0);
        REQUIRE(e.unseen_accuracy.has_value());
        CHECK(*e.unseen_accuracy >= 0.0);
        CHECK(*e.unseen_accuracy <= 1.0);
        REQUIRE(e.harmonic.has_value());
    }
    REQUIRE(result.report.accuracy_matrix.size() == 2);
    CHECK(result.report.accuracy_matrix[0].size() == 1);
    CHECK(result.report.accuracy_matrix[1].size() == 2);
    REQUIRE(result.report.forgetting.has_value());
    CHECK(result.trace.size() == 2 * config.train.epochs);
    CHECK(result.state.completed_tasks == 2);
}

TEST_CASE("identical configs reproduce identical reports") {
    const ExperimentConfig config = tiny_config();
    const ExperimentResult a = run_experiment(config);
    const ExperimentResult b = run_experiment(config);
    CHECK(report_to_json_text(a.report) == report_to_json_text(b.report));

    ExperimentConfig other = tiny_config();
    other.seed = 4;
    const ExperimentResult c = run_experiment(other);
    CHECK(report_to_json_text(a.report) != report_to_json_text(c.report));
}

TEST_CASE("the cvae path runs the same pipeline") {
    ExperimentConfig config = tiny_config();
    config.model = ModelKind::cvae;
    const ExperimentResult result = run_experiment(config);
    CHECK(result.report.model == "cvae");
    REQUIRE(result.report.tasks.size() == 2);
    for (const TaskEval& e : result.report.tasks)
        REQUIRE(e.unseen_accuracy.has_value());
}

TEST_CASE("a run writes checkpoints and reports to the output directory") {
    TempDir dir("outputs");
    ExperimentConfig config = tiny_config();
    config.output_dir = dir.str();
    const ExperimentResult result = run_experiment(config);

    CHECK(fs::exists(dir.path / "checkpoint_task_1.ckpt"));
    CHECK(fs::exists(dir.path / "checkpoint_task_2.ckpt"));
    CHECK(fs::exists(dir.path / "report.csv"));
    CHECK(fs::exists(dir.path / "plot.tsv"));

    std::ifstream in(dir.path / "report.json", std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == report_to_json_text(result.report));
}

TEST_CASE("resuming from a checkpoint finishes with identical results") {
    TempDir dir("resume");
    ExperimentConfig config = tiny_config();
    config.output_dir = dir.str();

    const ExperimentResult full = run_experiment(config);

    TempDir dir2("resume_partial");
    ExperimentConfig partial = tiny_config();
    partial.output_dir = dir2.str();
    RunOptions stop;
    stop.stop_after_task = 1;
    const ExperimentResult half = run_experiment(partial, stop);
    CHECK(half.state.completed_tasks == 1);

    RunOptions resume;
    resume.resume_from = dir2.str() + "/checkpoint_task_1.ckpt";
    const ExperimentResult resumed = run_experiment(partial, resume);
    CHECK(report_to_json_text(resumed.report) ==
          report_to_json_text(full.report));
}

TEST_CASE("checkpoints refuse mismatched configurations and corruption") {
    TempDir dir("ckpt_guard");
    ExperimentConfig config = tiny_config();
    config.output_dir = dir.str();
    RunOptions stop;
    stop.stop_after_task = 1;
    run_experiment(config, stop);
    const std::string ckpt = dir.str() + "/checkpoint_task_1.ckpt";

    ExperimentConfig other = tiny_config();
    other.seed = 99;
    CHECK_THROWS_WITH_AS(load_checkpoint(ckpt, other),
                         doctest::Contains("refusing to resume"), ConfigError);

    // Flipping one payload byte must trip the integrity checksum.
    {
        std::fstream f(ckpt, std::ios::in | std::ios::out | std::ios::binary);
        f.seekg(40);
        char byte = 0;
        f.read(&byte, 1);
        byte = static_cast<char>(byte ^ 0x11);
        f.seekp(40);
        f.write(&byte, 1);
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(ckpt, config),
                         doctest::Contains("failed its checksum"), IoError);

    const std::string not_ckpt = dir.str() + "/not_a_checkpoint.bin";
    write_text_file(not_ckpt, "definitely not binary checkpoint data");
    CHECK_THROWS_WITH_AS(load_checkpoint(not_ckpt, config),
                         doctest::Contains("is not a checkpoint file"), IoError);
}

TEST_CASE("a report can be rebuilt from a checkpoint alone") {
    TempDir dir("ckpt_report");
    ExperimentConfig config = tiny_config();
    config.output_dir = dir.str();
    const ExperimentResult result = run_experiment(config);

    const MetricsReport rebuilt =
        report_from_checkpoint(dir.str() + "/checkpoint_task_2.ckpt");
    CHECK(report_to_json_text(rebuilt) == report_to_json_text(result.report));
}

TEST_CASE("a memory sweep runs one experiment per value") {
    ExperimentConfig config = tiny_config();
    config.train.epochs = 1;
    config.classifier.epochs = 2;
    const SweepResult sweep =
        run_sweep(config, SweepAxis::memory_per_class, {1, 3});
    REQUIRE(sweep.points.size() == 2);
    CHECK(sweep.points[0].value == 1);
    CHECK(sweep.points[1].value == 3);
    // Axis values land in different configurations, hence different hashes.
    CHECK(sweep.points[0].report.config_hash !=
          sweep.points[1].report.config_hash);

    const std::string tsv = sweep_to_plotdata_text(sweep);
    CHECK(tsv.rfind("x\tseries\tvalue\n", 0) == 0);
    CHECK(tsv.find("1\tseen\t") != std::string::npos);
    CHECK(tsv.find("3\tseen\t") != std::string::npos);
    CHECK(tsv.find("1\tharmonic\t") != std::string::npos);
    CHECK(tsv.find("3\tharmonic\t") != std::string::npos);

    CHECK_THROWS_AS(run_sweep(config, SweepAxis::memory_per_class, {}),
                    ConfigError);
}
