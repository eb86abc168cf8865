// Command line front end: run experiments, sweep a hyperparameter axis,
// convert CSV datasets, and re-emit reports from checkpoints.
//
// Exit codes: 0 success, 2 configuration or usage problems, 3 data or IO
// problems, 4 numeric failures, 1 anything else.

#include "czsl/errors.hpp"
#include "czsl/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::string format_metric(const std::optional<double>& v) {
    if (!v.has_value()) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return buf;
}

std::string format_metric(double v) {
    return format_metric(std::optional<double>(v));
}

void print_report(const czsl::MetricsReport& report) {
    std::cout << "model " << report.model << "  strategy " << report.strategy
              << "  setting "
              << (report.setting == czsl::Setting::setting1 ? 1 : 2)
              << "  seed " << report.seed << "\n";
    for (const czsl::TaskEval& e : report.tasks) {
        std::cout << "task " << e.task_id << "  seen "
                  << format_metric(e.seen_accuracy) << "  unseen "
                  << format_metric(e.unseen_accuracy) << "  H "
                  << format_metric(e.harmonic) << "\n";
    }
    std::cout << "mSA " << format_metric(report.aggregates.mean_seen_accuracy)
              << "  mUA "
              << format_metric(report.aggregates.mean_unseen_accuracy)
              << "  mH " << format_metric(report.aggregates.mean_harmonic)
              << "  forgetting " << format_metric(report.forgetting) << "\n";
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Continual zero-shot learning experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string resume_path;
    std::string output_dir;
    auto* run = app.add_subcommand("run", "Run one experiment end to end");
    run->add_option("--config", config_path, "Experiment config JSON")
        ->required();
    run->add_option("--resume", resume_path, "Checkpoint file to resume from");
    run->add_option("--output-dir", output_dir,
                    "Overrides output_dir from the config");

    std::string sweep_config;
    std::string sweep_axis;
    std::vector<std::size_t> sweep_values;
    std::string sweep_out = "sweep.tsv";
    auto* sweep = app.add_subcommand(
        "sweep", "Run the experiment once per value of one axis");
    sweep->add_option("--config", sweep_config, "Experiment config JSON")
        ->required();
    sweep->add_option("--axis", sweep_axis,
                      "memory_per_class or latent_dim")
        ->required();
    sweep->add_option("--values", sweep_values, "Axis values")
        ->required()
        ->expected(-1);
    sweep->add_option("--out", sweep_out, "Plot data TSV path");

    std::string csv_dir;
    std::string convert_out;
    auto* convert = app.add_subcommand(
        "convert", "Convert a CSV dataset directory to the binary format");
    convert->add_option("--csv-dir", csv_dir, "Directory with features.csv, "
                                              "labels.csv, attributes.csv")
        ->required();
    convert->add_option("--out", convert_out, "Output dataset directory")
        ->required();

    std::string ckpt_path;
    std::string report_format = "json";
    std::string report_out;
    auto* report = app.add_subcommand(
        "report", "Re-emit metrics from a checkpoint file");
    report->add_option("--checkpoint", ckpt_path, "Checkpoint file")
        ->required();
    report->add_option("--format", report_format, "json, csv, or plotdata");
    report->add_option("--out", report_out,
                       "Output file; stdout when omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (run->parsed()) {
        czsl::ExperimentConfig config =
            czsl::config_from_json_file(config_path);
        if (!output_dir.empty()) config.output_dir = output_dir;
        czsl::RunOptions options;
        if (!resume_path.empty()) options.resume_from = resume_path;
        const czsl::ExperimentResult result =
            czsl::run_experiment(config, options);
        print_report(result.report);
        if (!config.output_dir.empty()) {
            std::cout << "artifacts written to " << config.output_dir << "\n";
        }
        return 0;
    }
    if (sweep->parsed()) {
        const czsl::ExperimentConfig base =
            czsl::config_from_json_file(sweep_config);
        const czsl::SweepResult result = czsl::run_sweep(
            base, czsl::sweep_axis_from_string(sweep_axis), sweep_values);
        czsl::write_text_file(sweep_out,
                              czsl::sweep_to_plotdata_text(result));
        for (const czsl::SweepPoint& point : result.points) {
            std::cout << czsl::to_string(result.axis) << " " << point.value
                      << "  mSA "
                      << format_metric(
                             point.report.aggregates.mean_seen_accuracy)
                      << "  mUA "
                      << format_metric(
                             point.report.aggregates.mean_unseen_accuracy)
                      << "  mH "
                      << format_metric(point.report.aggregates.mean_harmonic)
                      << "\n";
        }
        std::cout << "plot data written to " << sweep_out << "\n";
        return 0;
    }
    if (convert->parsed()) {
        const czsl::FeatureDataset dataset =
            czsl::convert_csv_dataset(csv_dir, convert_out);
        std::cout << "converted " << dataset.num_samples() << " samples, "
                  << dataset.num_classes() << " classes, feature dim "
                  << dataset.feature_dim() << ", attribute dim "
                  << dataset.attribute_dim() << " -> " << convert_out << "\n";
        return 0;
    }
    if (report->parsed()) {
        const czsl::MetricsReport metrics =
            czsl::report_from_checkpoint(ckpt_path);
        std::string text;
        if (report_format == "json") {
            text = czsl::report_to_json_text(metrics);
        } else if (report_format == "csv") {
            text = czsl::report_to_csv_text(metrics);
        } else if (report_format == "plotdata") {
            text = czsl::report_to_plotdata_text(metrics);
        } else {
            throw czsl::ConfigError("unknown report format '" +
                                    report_format + "'");
        }
        if (report_out.empty()) {
            std::cout << text;
        } else {
            czsl::write_text_file(report_out, text);
            std::cout << "report written to " << report_out << "\n";
        }
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const czsl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const czsl::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const czsl::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const czsl::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const czsl::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
