#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "paws/checkpoint.hpp"
#include "paws/errors.hpp"
#include "paws/eval.hpp"
#include "paws/metrics.hpp"
#include "paws/trainer.hpp"

using namespace paws;

namespace {

std::filesystem::path temp_dir(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / "paws_test_trainer" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

TrainConfig tiny_config() {
    TrainConfig config;
    config.dataset_classes = 4;
    config.dataset_per_class = 50;  // 160 train / 40 test
    config.dataset_dim = 8;
    config.dataset_separation = 6.0;
    config.label_budget = 16;
    config.support_classes = 4;
    config.support_per_class = 2;
    config.batch_size = 16;  // 10 steps per epoch
    config.epochs = 2;
    config.local_views = 2;
    config.encoder_hidden_dim = 12;
    config.encoder_proj_hidden_dim = 12;
    config.encoder_embed_dim = 6;
    config.nn_eval_every_epochs = 1;
    return config;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("build_experiment resolves dataset, pool and augmentation") {
    const TrainConfig config = tiny_config();
    const Experiment exp = build_experiment(config);
    CHECK(exp.data.train_inputs.rows() == 160);
    CHECK(exp.pool.size() == 16);
    CHECK(exp.augment.noise_sigma > 0.0);
    CHECK(exp.encoder.input_dim == 8);
}

TEST_CASE("a short training run produces gapless metrics and a loadable checkpoint") {
    const TrainConfig config = tiny_config();
    const auto dir = temp_dir("short_run");
    const TrainSummary summary = train(config, dir);

    CHECK(summary.steps_per_epoch == 10);
    CHECK(summary.total_steps == 20);
    CHECK(std::filesystem::exists(summary.checkpoint_path));
    CHECK(std::filesystem::exists(summary.metrics_path));
    CHECK(std::filesystem::exists(summary.config_path));

    const auto rows = read_metrics_csv(summary.metrics_path);
    REQUIRE(rows.size() == 20);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].step == i + 1);
        CHECK(rows[i].epoch == i / 10 + 1);
        CHECK(std::isfinite(rows[i].paws_consistency));
        CHECK(std::isfinite(rows[i].lr));
    }
    // nn eval at every epoch end in this config
    CHECK(rows[9].nn_accuracy.has_value());
    CHECK(rows[19].nn_accuracy.has_value());
    CHECK_FALSE(rows[5].nn_accuracy.has_value());

    const Checkpoint ck = load_checkpoint(summary.checkpoint_path);
    CHECK(ck.step_count == 20);
    CHECK(ck.velocity.has_value());

    // resolved config reparses to the identical text
    const std::string text = slurp(summary.config_path);
    CHECK(emit_config(parse_config_text(text)) == text);
}

TEST_CASE("zero epochs: the checkpoint equals the initialization") {
    TrainConfig config = tiny_config();
    config.epochs = 0;
    const auto dir = temp_dir("zero_epochs");
    const TrainSummary summary = train(config, dir);
    const Checkpoint ck = load_checkpoint(summary.checkpoint_path);

    const Experiment exp = build_experiment(config);
    const EncoderParams fresh = init_params(exp.encoder, config.train_seed);
    const auto a = std::as_const(ck.params).parameter_list();
    const auto b = std::as_const(fresh).parameter_list();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(max_abs_diff(*a[i], *b[i]) == 0.0);

    const auto rows = read_metrics_csv(summary.metrics_path);
    CHECK(rows.empty());
}

TEST_CASE("training is reproducible and resuming replays the tail exactly") {
    TrainConfig config = tiny_config();
    config.epochs = 4;
    config.checkpoint_every_epochs = 2;

    const auto full_dir = temp_dir("full_run");
    const TrainSummary full = train(config, full_dir);
    const auto full_rows = read_metrics_csv(full.metrics_path);
    REQUIRE(full_rows.size() == 40);

    // identical rerun: bitwise identical checkpoint
    const auto again_dir = temp_dir("again_run");
    const TrainSummary again = train(config, again_dir);
    CHECK(slurp(full.checkpoint_path) == slurp(again.checkpoint_path));

    // resume from the mid-run checkpoint written at epoch 2
    const auto resume_dir = temp_dir("resume_run");
    const TrainSummary resumed =
        train(config, resume_dir, full_dir / "checkpoint_epoch2.paws");
    const auto tail_rows = read_metrics_csv(resumed.metrics_path);
    REQUIRE(tail_rows.size() == 20);

    const MetricsRow& a = full_rows.back();
    const MetricsRow& b = tail_rows.back();
    CHECK(a.step == b.step);
    CHECK(std::abs(a.lr - b.lr) <= 1e-10);
    CHECK(std::abs(a.paws_consistency - b.paws_consistency) <= 1e-10);
    CHECK(std::abs(a.me_max_entropy - b.me_max_entropy) <= 1e-10);
    CHECK(std::abs(a.mean_target_confidence - b.mean_target_confidence) <= 1e-10);
    CHECK(slurp(full.checkpoint_path) == slurp(resumed.checkpoint_path));
}

TEST_CASE("disabling diagnostics leaves the trajectory bitwise identical") {
    TrainConfig config = tiny_config();
    const auto with_dir = temp_dir("diag_on");
    const auto without_dir = temp_dir("diag_off");
    const TrainSummary with_diag = train(config, with_dir);
    config.diagnostics = false;
    const TrainSummary without_diag = train(config, without_dir);
    CHECK(slurp(with_diag.checkpoint_path) == slurp(without_diag.checkpoint_path));

    const auto rows = read_metrics_csv(without_diag.metrics_path);
    for (const auto& row : rows) {
        CHECK(row.instance_discrimination_loss == 0.0);
        CHECK(row.support_classification_loss == 0.0);
    }
}

TEST_CASE("labeled-anchor targets and the prediction head both train") {
    TrainConfig config = tiny_config();
    config.epochs = 1;
    config.labeled_anchor_targets = true;
    const TrainSummary a = train(config, temp_dir("labeled_targets"));
    CHECK(std::isfinite(a.final_epoch_consistency));

    config.labeled_anchor_targets = false;
    config.prediction_head = true;
    const TrainSummary b = train(config, temp_dir("with_head"));
    CHECK(std::isfinite(b.final_epoch_consistency));
    const Checkpoint ck = load_checkpoint(b.checkpoint_path);
    CHECK(ck.params.prediction.size() == 2);
}

TEST_CASE("the detached me-max variant trains and differs from the default") {
    TrainConfig config = tiny_config();
    config.epochs = 1;
    const TrainSummary a = train(config, temp_dir("memax_rho"));
    config.me_max_variant = "detached";
    const TrainSummary b = train(config, temp_dir("memax_detached"));
    CHECK(slurp(a.checkpoint_path) != slurp(b.checkpoint_path));
}

TEST_CASE("fine-tune: zero-epoch grid reduces to the zero classifier") {
    TrainConfig config = tiny_config();
    config.finetune_epochs_grid = {0};
    config.finetune_lr_grid = {0.1};
    const Experiment exp = build_experiment(config);
    const EncoderParams params = init_params(exp.encoder, 0);
    const FineTuneResult result = fine_tune_linear(config, params, exp.data, exp.pool);

    // zero classifier: all logits zero, argmax ties break to class 0
    std::size_t class0 = 0;
    for (int l : exp.data.test_labels) {
        if (l == 0) ++class0;
    }
    const double expected = static_cast<double>(class0) /
                            static_cast<double>(exp.data.test_labels.size());
    CHECK(result.test_accuracy == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fine-tune selects on validation; test labels cannot influence it") {
    TrainConfig config = tiny_config();
    config.finetune_epochs_grid = {3};
    config.finetune_lr_grid = {0.01, 0.1};
    Experiment exp = build_experiment(config);
    const EncoderParams params = init_params(exp.encoder, 1);

    const FineTuneResult base = fine_tune_linear(config, params, exp.data, exp.pool);

    Experiment permuted = exp;
    for (std::size_t i = 0; i + 1 < permuted.data.test_labels.size(); i += 2) {
        std::swap(permuted.data.test_labels[i], permuted.data.test_labels[i + 1]);
    }
    const FineTuneResult shuffled = fine_tune_linear(config, params, permuted.data, permuted.pool);
    CHECK(base.selected_lr == shuffled.selected_lr);
    CHECK(base.selected_epochs == shuffled.selected_epochs);
    CHECK(base.validation_accuracy == shuffled.validation_accuracy);
    CHECK(base.test_accuracy != shuffled.test_accuracy);
}

TEST_CASE("fine-tune improves over the untrained zero classifier on easy blobs") {
    TrainConfig config = tiny_config();
    config.finetune_epochs_grid = {20};
    config.finetune_lr_grid = {0.05, 0.1};
    const Experiment exp = build_experiment(config);
    const EncoderParams params = init_params(exp.encoder, 2);
    const FineTuneResult result = fine_tune_linear(config, params, exp.data, exp.pool);
    CHECK(result.test_accuracy > 0.6);  // 4 classes, separation 6
}

TEST_CASE("grid datasets train end to end with windowed local views") {
    TrainConfig config = tiny_config();
    config.dataset_kind = "grid";
    config.dataset_grid = 5;
    config.dataset_per_class = 40;  // 128 train
    config.batch_size = 16;
    config.epochs = 1;
    const Experiment exp = build_experiment(config);
    CHECK(exp.data.input_dim == 25);
    CHECK(exp.augment.grid_mode());
    const TrainSummary summary = train(config, temp_dir("grid_run"));
    CHECK(std::isfinite(summary.final_epoch_consistency));
    CHECK(summary.final_nn_accuracy > 0.5);
}

TEST_CASE("train rejects oversized batches and undersized pools") {
    TrainConfig config = tiny_config();
    config.batch_size = 1000;
    CHECK_THROWS_AS(train(config, temp_dir("bad_batch")), ConfigError);

    config = tiny_config();
    config.label_budget = 40;
    config.support_per_class = 11;  // classes hold only 10 labeled samples each
    CHECK_THROWS_AS(train(config, temp_dir("bad_support")), ConfigError);
}

TEST_CASE("a diverging run aborts with a diagnostics dump instead of looping") {
    TrainConfig config = tiny_config();
    config.epochs = 1;
    config.lr_start = 1e200;
    config.lr_peak = 1e200;
    config.lr_final = 1e200;
    CHECK_THROWS_WITH_AS(train(config, temp_dir("diverge")), doctest::Contains("non-finite"),
                         Error);
}
