#include "paws/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "paws/diagnostics.hpp"
#include "paws/errors.hpp"
#include "paws/eval.hpp"
#include "paws/metrics.hpp"
#include "paws/objective.hpp"
#include "paws/optim.hpp"
#include "paws/rng.hpp"
#include "paws/support_sampler.hpp"
#include "paws/tape.hpp"

namespace paws {

namespace {

double feature_std(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    const double mu = mean(m);
    double acc = 0.0;
    for (double v : m.data()) acc += (v - mu) * (v - mu);
    return std::sqrt(acc / static_cast<double>(m.size()));
}

Matrix gather_rows(const Matrix& source, const std::vector<std::size_t>& rows, std::size_t begin,
                   std::size_t count) {
    Matrix out(count, source.cols());
    for (std::size_t i = 0; i < count; ++i) {
        const double* src = source.row_ptr(rows[begin + i]);
        std::copy(src, src + source.cols(), out.row_ptr(i));
    }
    return out;
}

MeMaxVariant parse_variant(const std::string& name) {
    return name == "detached" ? MeMaxVariant::kDetachedSharpen
                              : MeMaxVariant::kDifferentiableSharpen;
}

}  // namespace

Experiment build_experiment(const TrainConfig& config) {
    config.validate();
    Experiment exp;
    if (config.dataset_kind == "blobs") {
        exp.data = make_blobs(config.dataset_classes, config.dataset_per_class, config.dataset_dim,
                              config.dataset_separation, config.dataset_seed);
    } else {
        exp.data = make_tiny_grid(config.dataset_classes, config.dataset_per_class,
                                  config.dataset_grid, config.dataset_grid_noise,
                                  config.dataset_seed);
    }
    exp.pool = select_labeled_pool(exp.data, config.label_budget, config.train_seed);

    exp.augment.noise_sigma = config.view_noise_scale * feature_std(exp.data.train_inputs);
    exp.augment.scale_jitter_low = config.view_jitter_low;
    exp.augment.scale_jitter_high = config.view_jitter_high;
    exp.augment.mask_fraction_local = config.view_mask_fraction;
    if (config.dataset_kind == "grid") {
        exp.augment.grid_rows = config.dataset_grid;
        exp.augment.grid_cols = config.dataset_grid;
        exp.augment.window_fraction = config.view_window_fraction;
    }

    exp.encoder.input_dim = exp.data.input_dim;
    exp.encoder.hidden_dim = config.encoder_hidden_dim;
    exp.encoder.trunk_layers = config.encoder_trunk_layers;
    exp.encoder.proj_hidden_dim = config.encoder_proj_hidden_dim;
    exp.encoder.embed_dim = config.encoder_embed_dim;
    exp.encoder.prediction_head = config.prediction_head;
    exp.encoder.pred_hidden_dim = config.encoder_pred_hidden_dim;
    exp.encoder.passthrough = config.encoder_passthrough;
    return exp;
}

TrainSummary train(const TrainConfig& config, const std::filesystem::path& out_dir,
                   const std::optional<std::filesystem::path>& resume_checkpoint) {
    Experiment exp = build_experiment(config);
    const std::size_t train_count = exp.data.train_inputs.rows();
    const std::size_t steps_per_epoch = train_count / config.batch_size;
    if (steps_per_epoch == 0) {
        throw ConfigError("train: batch size " + std::to_string(config.batch_size) +
                          " exceeds the train split (" + std::to_string(train_count) + ")");
    }
    const std::size_t total_steps = steps_per_epoch * config.epochs;

    EncoderParams params;
    std::size_t start_step = 0;
    std::optional<std::vector<Matrix>> resumed_velocity;
    if (resume_checkpoint.has_value()) {
        Checkpoint ck = load_checkpoint(*resume_checkpoint);
        if (ck.params.config.input_dim != exp.encoder.input_dim) {
            throw FormatError("train: checkpoint input dim " +
                              std::to_string(ck.params.config.input_dim) +
                              " does not match dataset dim " +
                              std::to_string(exp.encoder.input_dim));
        }
        params = std::move(ck.params);
        start_step = ck.step_count;
        resumed_velocity = std::move(ck.velocity);
        if (start_step > total_steps) {
            throw ConfigError("train: checkpoint is at step " + std::to_string(start_step) +
                              ", beyond the configured " + std::to_string(total_steps));
        }
    } else {
        params = init_params(exp.encoder, config.train_seed);
    }

    std::vector<Matrix*> param_ptrs = params.parameter_list();
    std::vector<const Matrix*> param_ptrs_const(param_ptrs.begin(), param_ptrs.end());
    OptimizerState optimizer =
        make_optimizer(param_ptrs_const, params.bias_flags(), config.momentum, config.weight_decay);
    if (resumed_velocity.has_value()) {
        if (resumed_velocity->size() != optimizer.velocity.size()) {
            throw FormatError("train: checkpoint optimizer state does not match the parameters");
        }
        optimizer.velocity = std::move(*resumed_velocity);
        optimizer.step_count = start_step;
    }

    LrSchedule schedule;
    schedule.warmup_epochs = config.warmup_fraction * static_cast<double>(config.epochs);
    schedule.start_lr = config.lr_start;
    schedule.peak_lr = config.lr_peak;
    schedule.final_lr = config.lr_final;
    schedule.total_epochs = config.epochs;
    schedule.steps_per_epoch = steps_per_epoch;

    std::filesystem::create_directories(out_dir);
    TrainSummary summary;
    summary.steps_per_epoch = steps_per_epoch;
    summary.total_steps = total_steps;
    summary.config_path = out_dir / "config.resolved";
    summary.metrics_path = out_dir / "metrics.csv";
    summary.checkpoint_path = out_dir / "checkpoint.paws";
    write_config_file(summary.config_path, config);
    MetricsWriter metrics(summary.metrics_path);

    // Label lookup for the optional labeled-anchor targets.
    std::vector<std::optional<int>> train_row_label(train_count);
    if (config.labeled_anchor_targets) {
        for (std::size_t i = 0; i < exp.pool.size(); ++i) {
            train_row_label[exp.pool.source_rows[i]] = exp.pool.labels[i];
        }
    }

    LossOptions loss_options;
    loss_options.sharpen_temperature = config.sharpen_temperature;
    loss_options.enable_me_max = config.me_max;
    loss_options.me_max_variant = parse_variant(config.me_max_variant);
    loss_options.entropy_min_weight = config.entropy_min_weight;

    std::vector<double> epoch_consistency(config.epochs, 0.0);
    std::vector<double> epoch_confidence(config.epochs, 0.0);

    std::vector<std::size_t> order(train_count);
    std::size_t order_epoch = std::numeric_limits<std::size_t>::max();

    const auto abort_with_dump = [&](std::size_t step, double lr, const std::string& what,
                                     const std::vector<Matrix>* grads) {
        std::string msg = "train: " + what + " at step " + std::to_string(step + 1) +
                          " (lr=" + std::to_string(lr) + ")";
        if (grads != nullptr) {
            msg += "; grad norms:";
            for (std::size_t i = 0; i < grads->size(); ++i) {
                msg += " " + std::to_string(frobenius_norm((*grads)[i]));
            }
        }
        throw Error(msg);
    };

    for (std::size_t step = start_step; step < total_steps; ++step) {
        const std::size_t epoch = step / steps_per_epoch;
        const std::size_t in_epoch = step % steps_per_epoch;
        if (epoch != order_epoch) {
            for (std::size_t i = 0; i < train_count; ++i) order[i] = i;
            Rng shuffle_rng(stream_seed(config.train_seed, streams::kEpochShuffle, epoch));
            shuffle_rng.shuffle(order);
            order_epoch = epoch;
        }

        const Matrix batch =
            gather_rows(exp.data.train_inputs, order, in_epoch * config.batch_size,
                        config.batch_size);

        Rng view_rng(stream_seed(config.train_seed, streams::kViews, step));
        const ViewBatch views =
            generate_views(batch, exp.augment, config.global_views, config.local_views, view_rng);

        Rng support_rng(stream_seed(config.train_seed, streams::kSupportDraw, step));
        const SupportDraw draw = sample_support(exp.pool, config.support_classes,
                                                config.support_per_class, support_rng);
        Rng support_view_rng(stream_seed(config.train_seed, streams::kSupportViews, step));
        const SupportViews sv =
            support_views(exp.pool, draw, exp.augment, config.support_views_per_sample,
                          config.label_smoothing, support_view_rng);

        ad::Tape tape;
        EncoderGraph enc(tape, params);

        ad::Var z_support = enc.encode(sv.inputs);
        SupportBatch target_support;
        target_support.z_s = z_support;
        target_support.y_s = sv.labels;
        target_support.classes_present = config.support_classes;
        target_support.per_class_count =
            config.support_per_class * config.support_views_per_sample;

        SupportBatch anchor_support = target_support;
        if (config.prediction_head) {
            anchor_support.z_s = enc.predict_head(z_support, true);
        }

        std::vector<ad::Var> z_views;
        for (const Matrix& gv : views.global_views) z_views.push_back(enc.encode(gv));
        for (const Matrix& lv : views.local_views) z_views.push_back(enc.encode(lv));

        const double lr = lr_at(schedule, step);

        std::vector<ad::Var> p_anchor;
        for (const ad::Var& z : z_views) {
            if (!all_finite(z.value())) {
                abort_with_dump(step, lr, "non-finite representations", nullptr);
            }
            ad::Var q = config.prediction_head ? enc.predict_head(z, true) : z;
            p_anchor.push_back(similarity_classifier(q, anchor_support, config.tau).p);
        }

        std::optional<std::array<Matrix, 2>> target_values;
        if (config.prediction_head) {
            // Target pathway bypasses the prediction head.
            target_values = std::array<Matrix, 2>{
                similarity_classifier(z_views[0], target_support, config.tau).p.value(),
                similarity_classifier(z_views[1], target_support, config.tau).p.value()};
        }

        std::vector<std::optional<int>> anchor_labels;
        const std::vector<std::optional<int>>* labels_ptr = nullptr;
        if (config.labeled_anchor_targets) {
            anchor_labels.resize(config.batch_size);
            for (std::size_t i = 0; i < config.batch_size; ++i) {
                anchor_labels[i] = train_row_label[order[in_epoch * config.batch_size + i]];
            }
            labels_ptr = &anchor_labels;
        }

        std::array<ad::Var, 2> p_global = {p_anchor[0], p_anchor[1]};
        std::vector<ad::Var> p_local(p_anchor.begin() + 2, p_anchor.end());
        const LossBreakdown loss =
            paws_loss_multicrop(p_global, p_local, loss_options, target_values, labels_ptr,
                                config.label_smoothing);

        if (!std::isfinite(loss.total.value()(0, 0))) {
            abort_with_dump(step, lr, "non-finite loss", nullptr);
        }

        tape.backward(loss.total);
        const std::vector<Matrix> grads = enc.gradients();
        for (const Matrix& g : grads) {
            if (!all_finite(g)) abort_with_dump(step, lr, "non-finite gradient", &grads);
        }
        sgd_momentum_step(param_ptrs, grads, optimizer, lr);

        MetricsRow row;
        row.epoch = epoch + 1;
        row.step = step + 1;
        row.lr = lr;
        row.paws_consistency = loss.consistency;
        row.me_max_entropy = loss.me_max;
        if (config.diagnostics) {
            row.instance_discrimination_loss =
                nt_xent(z_views[0].value(), z_views[1].value(), config.tau);
            std::vector<int> support_int_labels;
            for (std::size_t v = 0; v < config.support_views_per_sample; ++v) {
                for (std::size_t idx : draw.indices) {
                    support_int_labels.push_back(exp.pool.labels[idx]);
                }
            }
            row.support_classification_loss =
                support_contrastive(z_support.value(), support_int_labels, config.tau);
        }
        row.mean_target_confidence = loss.target_confidence;

        epoch_consistency[epoch] += loss.consistency / static_cast<double>(steps_per_epoch);
        epoch_confidence[epoch] += loss.target_confidence / static_cast<double>(steps_per_epoch);

        const bool epoch_end = in_epoch + 1 == steps_per_epoch;
        if (epoch_end) {
            const std::size_t epoch_1based = epoch + 1;
            const bool last_epoch = epoch_1based == config.epochs;
            const bool periodic = config.nn_eval_every_epochs > 0 &&
                                  epoch_1based % config.nn_eval_every_epochs == 0;
            if (periodic || last_epoch) {
                row.nn_accuracy =
                    eval_nn(params, exp.pool.inputs, exp.pool.labels, exp.data.num_classes,
                            exp.data.test_inputs, exp.data.test_labels, config.tau);
                summary.final_nn_accuracy = *row.nn_accuracy;
            }
            if (config.checkpoint_every_epochs > 0 && !last_epoch &&
                epoch_1based % config.checkpoint_every_epochs == 0) {
                save_checkpoint(out_dir / ("checkpoint_epoch" + std::to_string(epoch_1based) +
                                           ".paws"),
                                params, &optimizer, step + 1);
            }
        }
        metrics.append(row);
    }

    save_checkpoint(summary.checkpoint_path, params, &optimizer, total_steps);

    const std::size_t first_epoch = start_step / steps_per_epoch;
    const bool first_epoch_complete = start_step % steps_per_epoch == 0 && config.epochs > 0;
    summary.first_epoch_consistency = first_epoch_complete && first_epoch < config.epochs
                                          ? epoch_consistency[first_epoch]
                                          : std::numeric_limits<double>::quiet_NaN();
    summary.first_epoch_confidence = first_epoch_complete && first_epoch < config.epochs
                                         ? epoch_confidence[first_epoch]
                                         : std::numeric_limits<double>::quiet_NaN();
    summary.final_epoch_consistency =
        config.epochs > 0 ? epoch_consistency[config.epochs - 1]
                          : std::numeric_limits<double>::quiet_NaN();
    summary.final_epoch_confidence =
        config.epochs > 0 ? epoch_confidence[config.epochs - 1]
                          : std::numeric_limits<double>::quiet_NaN();
    return summary;
}

// ---------------------------------------------------------------------------
// Fine-tuning
// ---------------------------------------------------------------------------

namespace {

struct FineTuneModel {
    EncoderParams encoder;  // trunk + projection; only trunk and projection[0] train
    Matrix classifier_weight;  // [proj_hidden x K], zero-initialized
    Matrix classifier_bias;    // [1 x K]
};

std::vector<int> classify_values(const FineTuneModel& model, const Matrix& inputs) {
    const Matrix feat = first_projection_values(model.encoder, inputs);
    Matrix logits = matmul(feat, model.classifier_weight);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        for (std::size_t j = 0; j < logits.cols(); ++j) logits(i, j) += model.classifier_bias(0, j);
    }
    std::vector<int> out(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* r = logits.row_ptr(i);
        std::size_t best = 0;
        for (std::size_t k = 1; k < logits.cols(); ++k) {
            if (r[k] > r[best]) best = k;
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

FineTuneModel run_fine_tune(const TrainConfig& config, const EncoderParams& pretrained,
                            const Matrix& fit_inputs, const std::vector<int>& fit_labels,
                            std::size_t num_classes, const AugmentConfig& augment, double lr,
                            std::size_t epochs, std::uint64_t stream_index) {
    FineTuneModel model;
    model.encoder = pretrained;
    model.classifier_weight = Matrix(pretrained.config.proj_hidden_dim, num_classes);
    model.classifier_bias = Matrix(1, num_classes);

    // Trainable set: trunk layers, first projection layer, classifier.
    std::vector<Matrix*> trainable;
    std::vector<bool> bias_flags;
    for (LinearLayer& l : model.encoder.trunk) {
        trainable.push_back(&l.weight);
        bias_flags.push_back(false);
        trainable.push_back(&l.bias);
        bias_flags.push_back(true);
    }
    trainable.push_back(&model.encoder.projection[0].weight);
    bias_flags.push_back(false);
    trainable.push_back(&model.encoder.projection[0].bias);
    bias_flags.push_back(true);
    trainable.push_back(&model.classifier_weight);
    bias_flags.push_back(false);
    trainable.push_back(&model.classifier_bias);
    bias_flags.push_back(true);

    std::vector<const Matrix*> trainable_const(trainable.begin(), trainable.end());
    // No weight decay during fine-tuning.
    OptimizerState optimizer =
        make_optimizer(trainable_const, bias_flags, config.finetune_momentum, 0.0);

    const Matrix targets = smooth_one_hot(fit_labels, num_classes, 0.0);
    for (std::size_t step = 0; step < epochs; ++step) {
        Rng rng(stream_seed(config.train_seed, streams::kFineTune, stream_index * 1000000 + step));
        const Matrix batch = augment_global(fit_inputs, augment, rng);

        ad::Tape tape;
        std::vector<ad::Var> leaves;
        leaves.reserve(trainable.size());
        for (Matrix* m : trainable) leaves.push_back(tape.leaf(*m, true));

        ad::Var h = tape.constant(batch);
        std::size_t li = 0;
        for (std::size_t t = 0; t < model.encoder.trunk.size(); ++t) {
            h = ad::relu(ad::add_rowvec(ad::matmul(h, leaves[li]), leaves[li + 1]));
            li += 2;
        }
        h = ad::relu(ad::add_rowvec(ad::matmul(h, leaves[li]), leaves[li + 1]));
        li += 2;
        ad::Var logits = ad::add_rowvec(ad::matmul(h, leaves[li]), leaves[li + 1]);
        ad::Var probs = ad::softmax_rows(logits, 1.0);
        ad::Var loss = ad::cross_entropy_rows(targets, probs);

        tape.backward(loss);
        std::vector<Matrix> grads;
        grads.reserve(leaves.size());
        for (ad::Var v : leaves) grads.push_back(v.grad());
        sgd_momentum_step(trainable, grads, optimizer, lr);
    }
    return model;
}

}  // namespace

FineTuneResult fine_tune_linear(const TrainConfig& config, const EncoderParams& pretrained,
                                const Dataset& data, const LabeledPool& pool) {
    if (pretrained.config.passthrough || pretrained.projection.empty()) {
        throw ConfigError("fine_tune_linear: checkpoint has no projection head");
    }
    config.validate();

    // Stratified validation split of the labeled pool, seeded once so every
    // grid candidate sees the identical split.
    Rng split_rng(stream_seed(config.train_seed, streams::kFineTune, 0));
    std::vector<std::size_t> val_rows;
    std::vector<std::size_t> fit_rows;
    for (const std::vector<std::size_t>& members : pool.class_indices) {
        std::vector<std::size_t> rows = members;
        split_rng.shuffle(rows);
        const auto val_count = static_cast<std::size_t>(
            std::llround(config.finetune_val_fraction * static_cast<double>(rows.size())));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            (i < val_count ? val_rows : fit_rows).push_back(rows[i]);
        }
    }
    if (val_rows.empty() || fit_rows.empty()) {
        throw ConfigError("fine_tune_linear: labeled pool too small for a " +
                          std::to_string(config.finetune_val_fraction) + " validation split");
    }
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(fit_rows.begin(), fit_rows.end());

    const Matrix fit_inputs = gather_rows(pool.inputs, fit_rows, 0, fit_rows.size());
    const Matrix val_inputs = gather_rows(pool.inputs, val_rows, 0, val_rows.size());
    std::vector<int> fit_labels;
    std::vector<int> val_labels;
    for (std::size_t r : fit_rows) fit_labels.push_back(pool.labels[r]);
    for (std::size_t r : val_rows) val_labels.push_back(pool.labels[r]);

    // Basic augmentation only: the global family, no local masking.
    AugmentConfig basic;
    basic.noise_sigma = config.view_noise_scale * feature_std(data.train_inputs);
    basic.scale_jitter_low = config.view_jitter_low;
    basic.scale_jitter_high = config.view_jitter_high;
    basic.mask_fraction_local = 0.0;

    FineTuneResult best;
    FineTuneModel best_model;
    bool have_best = false;
    std::uint64_t pair_index = 1;
    for (std::size_t epochs : config.finetune_epochs_grid) {
        for (double lr : config.finetune_lr_grid) {
            FineTuneModel model = run_fine_tune(config, pretrained, fit_inputs, fit_labels,
                                                data.num_classes, basic, lr, epochs, pair_index);
            ++pair_index;
            const double val_acc = accuracy(classify_values(model, val_inputs), val_labels);
            if (!have_best || val_acc > best.validation_accuracy) {
                have_best = true;
                best.validation_accuracy = val_acc;
                best.selected_lr = lr;
                best.selected_epochs = epochs;
                best_model = std::move(model);
            }
        }
    }
    best.test_accuracy = accuracy(classify_values(best_model, data.test_inputs), data.test_labels);
    return best;
}

}  // namespace paws
