#include "cli_main.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "paws/checkpoint.hpp"
#include "paws/config.hpp"
#include "paws/errors.hpp"
#include "paws/eval.hpp"
#include "paws/trainer.hpp"
#include "paws/verification.hpp"

namespace paws {

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::string checkpoint_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
};

void attach_common(CLI::App* cmd, CommonOptions& opts, bool with_checkpoint) {
    cmd->add_option("--config", opts.config_path, "Config file (key = value lines)");
    cmd->add_option("--out-dir", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.seed, "Override train.seed");
    cmd->add_option("--set", opts.overrides, "Config override key=value (repeatable)");
    if (with_checkpoint) {
        cmd->add_option("--checkpoint", opts.checkpoint_path, "Checkpoint file (.paws)");
    }
}

TrainConfig resolve_config(const CommonOptions& opts) {
    TrainConfig config;
    if (!opts.config_path.empty()) config = load_config_file(opts.config_path);
    for (const std::string& assignment : opts.overrides) apply_override(config, assignment);
    if (opts.seed.has_value()) config.train_seed = *opts.seed;
    config.validate();
    return config;
}

void write_dataset_csv(const std::filesystem::path& path, const Matrix& inputs,
                       const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("gen-data: cannot open " + path.string() + " for writing");
    out << "label";
    for (std::size_t j = 0; j < inputs.cols(); ++j) out << ",x" << j;
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        out << labels[i];
        for (std::size_t j = 0; j < inputs.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", inputs(i, j));
            out << "," << buf;
        }
        out << "\n";
    }
}

int run_train(const CommonOptions& opts) {
    const TrainConfig config = resolve_config(opts);
    std::optional<std::filesystem::path> resume;
    if (!opts.checkpoint_path.empty()) resume = opts.checkpoint_path;
    const TrainSummary summary = train(config, opts.out_dir, resume);
    std::cout << "checkpoint: " << summary.checkpoint_path.string() << "\n"
              << "metrics:    " << summary.metrics_path.string() << "\n"
              << "config:     " << summary.config_path.string() << "\n"
              << "final PAWS-NN accuracy: " << summary.final_nn_accuracy << "\n";
    return 0;
}

int run_eval_nn(const CommonOptions& opts) {
    if (opts.checkpoint_path.empty()) {
        throw ValidationError("eval-nn: --checkpoint is required");
    }
    const TrainConfig config = resolve_config(opts);
    const Experiment exp = build_experiment(config);
    const Checkpoint ck = load_checkpoint(opts.checkpoint_path);
    const double acc = eval_nn(ck.params, exp.pool.inputs, exp.pool.labels, exp.data.num_classes,
                               exp.data.test_inputs, exp.data.test_labels, config.tau);
    std::cout << "PAWS-NN accuracy: " << acc << "\n";
    return 0;
}

int run_fine_tune(const CommonOptions& opts) {
    if (opts.checkpoint_path.empty()) {
        throw ValidationError("fine-tune: --checkpoint is required");
    }
    const TrainConfig config = resolve_config(opts);
    const Experiment exp = build_experiment(config);
    const Checkpoint ck = load_checkpoint(opts.checkpoint_path);
    const FineTuneResult result = fine_tune_linear(config, ck.params, exp.data, exp.pool);
    std::cout << "selected lr: " << result.selected_lr << "\n"
              << "selected epochs: " << result.selected_epochs << "\n"
              << "validation accuracy: " << result.validation_accuracy << "\n"
              << "test accuracy: " << result.test_accuracy << "\n";
    return 0;
}

int run_verify(const CommonOptions& opts) {
    const std::uint64_t seed = opts.seed.value_or(0);
    const VerificationReport report = run_verification_suite(seed);
    for (const VerificationLine& line : report.lines) {
        const char* status = line.info_only ? "INFO" : (line.passed ? "PASS" : "FAIL");
        std::printf("[%-4s] %-46s %s\n", status, line.name.c_str(), line.detail.c_str());
    }

    std::filesystem::create_directories(opts.out_dir);
    const std::filesystem::path csv =
        std::filesystem::path(opts.out_dir) / "collapse_escape.csv";
    std::ofstream out(csv, std::ios::trunc);
    out << "step,distance_sharpened,entropy_sharpened,distance_unsharpened,entropy_unsharpened,"
           "distance_entropy_min,entropy_entropy_min\n";
    const auto& a = report.escape_sharpened;
    const auto& b = report.escape_unsharpened;
    const auto& c = report.escape_entropy_min;
    for (std::size_t i = 0; i < a.mean_pairwise_distance.size(); ++i) {
        out << i << "," << a.mean_pairwise_distance[i] << "," << a.prediction_entropy[i] << ","
            << b.mean_pairwise_distance[i] << "," << b.prediction_entropy[i] << ","
            << c.mean_pairwise_distance[i] << "," << c.prediction_entropy[i] << "\n";
    }
    std::cout << "collapse-escape trajectory: " << csv.string() << "\n";
    if (!report.all_pass) {
        std::cerr << "verification failed\n";
        return 2;
    }
    return 0;
}

int run_gen_data(const CommonOptions& opts) {
    const TrainConfig config = resolve_config(opts);
    const Experiment exp = build_experiment(config);
    std::filesystem::create_directories(opts.out_dir);
    const std::filesystem::path dir(opts.out_dir);
    write_dataset_csv(dir / "train.csv", exp.data.train_inputs, exp.data.train_labels);
    write_dataset_csv(dir / "test.csv", exp.data.test_inputs, exp.data.test_labels);
    std::cout << "wrote " << (dir / "train.csv").string() << " and "
              << (dir / "test.csv").string() << "\n";
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"PAWS: semi-supervised training with non-parametric pseudo-labels"};
    app.require_subcommand(1);

    CommonOptions train_opts, eval_opts, ft_opts, verify_opts, gen_opts;
    CLI::App* train_cmd = app.add_subcommand("train", "Run the training loop");
    attach_common(train_cmd, train_opts, /*with_checkpoint=*/true);
    CLI::App* eval_cmd =
        app.add_subcommand("eval-nn", "Non-parametric evaluation of a checkpoint");
    attach_common(eval_cmd, eval_opts, true);
    CLI::App* ft_cmd = app.add_subcommand("fine-tune", "Linear fine-tune of a checkpoint");
    attach_common(ft_cmd, ft_opts, true);
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "Run the non-collapse verification suite");
    attach_common(verify_cmd, verify_opts, false);
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "Write the configured dataset as CSV");
    attach_common(gen_cmd, gen_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (train_cmd->parsed()) return run_train(train_opts);
        if (eval_cmd->parsed()) return run_eval_nn(eval_opts);
        if (ft_cmd->parsed()) return run_fine_tune(ft_opts);
        if (verify_cmd->parsed()) return run_verify(verify_opts);
        if (gen_cmd->parsed()) return run_gen_data(gen_opts);
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace paws
