#pragma once

#include <filesystem>
#include <optional>

#include "paws/checkpoint.hpp"
#include "paws/config.hpp"
#include "paws/dataset.hpp"
#include "paws/encoder.hpp"
#include "paws/views.hpp"

namespace paws {

/// Dataset, labeled pool and resolved augmentation for one config. Identical
/// configs build identical experiments.
struct Experiment {
    Dataset data;
    LabeledPool pool;
    AugmentConfig augment;
    EncoderConfig encoder;
};

Experiment build_experiment(const TrainConfig& config);

struct TrainSummary {
    std::filesystem::path checkpoint_path;
    std::filesystem::path metrics_path;
    std::filesystem::path config_path;
    std::size_t steps_per_epoch = 0;
    std::size_t total_steps = 0;
    // Per-epoch means of the consistency loss and target confidence for the
    // first and last epoch of THIS run (NaN when the run resumed past them).
    double first_epoch_consistency = 0.0;
    double final_epoch_consistency = 0.0;
    double first_epoch_confidence = 0.0;
    double final_epoch_confidence = 0.0;
    double final_nn_accuracy = 0.0;
};

/// Full training loop. Writes metrics.csv, checkpoint.paws and
/// config.resolved under out_dir; optional periodic checkpoints
/// (checkpoint_epoch<N>.paws). Resuming from a mid-training checkpoint
/// replays the remaining steps bit-for-bit, because all per-step randomness
/// is derived from (seed, step) rather than from generator state.
TrainSummary train(const TrainConfig& config, const std::filesystem::path& out_dir,
                   const std::optional<std::filesystem::path>& resume_checkpoint = std::nullopt);

struct FineTuneResult {
    double test_accuracy = 0.0;
    double validation_accuracy = 0.0;
    double selected_lr = 0.0;
    std::size_t selected_epochs = 0;
};

/// Attach a zero-initialized linear classifier to the first projection layer
/// and jointly fine-tune trunk + first projection + classifier with
/// supervised cross-entropy (momentum SGD, no weight decay, global-style
/// augmentation only). The (lr, epochs) pair is selected on a held-out
/// validation split of the labeled pool; test labels never influence the
/// selection.
FineTuneResult fine_tune_linear(const TrainConfig& config, const EncoderParams& pretrained,
                                const Dataset& data, const LabeledPool& pool);

}  // namespace paws
