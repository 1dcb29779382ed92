#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace paws {

/// Every knob of a training run. Field defaults are the library defaults; a
/// config file and --set overrides layer on top. The resolved config is
/// serialized next to every run's outputs, and a run is reproducible from
/// that file alone.
struct TrainConfig {
    // dataset
    std::string dataset_kind = "blobs";  // blobs | grid
    std::size_t dataset_classes = 4;
    std::size_t dataset_per_class = 1250;
    std::size_t dataset_dim = 16;
    double dataset_separation = 6.0;
    std::size_t dataset_grid = 6;
    double dataset_grid_noise = 0.25;
    std::uint64_t dataset_seed = 0;

    // labels
    double label_budget = 40;  // absolute count, or fraction of train when < 1

    // method
    double tau = 0.1;
    double sharpen_temperature = 0.25;
    double label_smoothing = 0.1;
    bool me_max = true;
    std::string me_max_variant = "differentiable_rho";  // differentiable_rho | detached
    double entropy_min_weight = 0.0;
    bool labeled_anchor_targets = false;

    // views
    std::size_t global_views = 2;
    std::size_t local_views = 6;
    double view_noise_scale = 0.1;  // noise sigma as a fraction of the train feature std
    double view_jitter_low = 0.9;
    double view_jitter_high = 1.1;
    double view_mask_fraction = 0.5;
    double view_window_fraction = 0.5;  // grid datasets only

    // support
    std::size_t support_classes = 4;
    std::size_t support_per_class = 8;
    std::size_t support_views_per_sample = 1;

    // training
    std::size_t batch_size = 64;
    std::size_t epochs = 100;
    std::uint64_t train_seed = 0;

    // encoder
    std::size_t encoder_hidden_dim = 64;
    std::size_t encoder_trunk_layers = 2;
    std::size_t encoder_proj_hidden_dim = 64;
    std::size_t encoder_embed_dim = 32;
    bool prediction_head = false;
    std::size_t encoder_pred_hidden_dim = 32;
    bool encoder_passthrough = false;

    // optimizer
    double momentum = 0.9;
    double weight_decay = 1e-6;
    double lr_start = 0.05;
    double lr_peak = 0.5;
    double lr_final = 0.0;
    double warmup_fraction = 0.1;  // fraction of total epochs spent warming up

    // fine-tune
    std::vector<double> finetune_lr_grid = {0.01, 0.02, 0.05, 0.1, 0.2};
    std::vector<std::size_t> finetune_epochs_grid = {30, 50};
    double finetune_val_fraction = 0.2;
    double finetune_momentum = 0.9;

    // evaluation / io
    std::size_t nn_eval_every_epochs = 10;
    std::size_t checkpoint_every_epochs = 0;  // 0 = final checkpoint only
    // Report-only losses in metrics.csv; never affects the trajectory.
    bool diagnostics = true;

    void validate() const;
};

/// Flat "key = value" text, '#' starts a comment, keys are dotted paths.
/// Unknown keys and malformed values raise ValidationError.
TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config_file(const std::filesystem::path& path);

/// Apply one "key=value" override.
void apply_override(TrainConfig& config, const std::string& assignment);

/// Canonical emission: every key in registry order, floats with up to 17
/// significant digits. emit(parse(emit(c))) == emit(c) byte for byte.
std::string emit_config(const TrainConfig& config);
void write_config_file(const std::filesystem::path& path, const TrainConfig& config);

/// All known keys in canonical order (exposed for --help and tests).
std::vector<std::string> config_keys();

}  // namespace paws
