#include "paws/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "paws/errors.hpp"

namespace paws {

namespace {

constexpr double kSharpenFloor = 1e-12;
// Keeps 0 * log(0) finite inside entropy graphs; entries this small carry no
// meaningful probability mass.
constexpr double kEntropyLogFloor = 1e-300;

// -sum_all(hadamard(x, log x)) as a graph node; x holds distributions.
ad::Var entropy_node(ad::Var x) {
    return ad::scale(ad::sum_all(ad::hadamard(x, ad::log(x, kEntropyLogFloor))), -1.0);
}

}  // namespace

void SupportBatch::validate() const {
    const Matrix& labels = y_s;
    const Matrix& reps = z_s.value();
    if (labels.rows() == 0) throw ConfigError("SupportBatch: empty support");
    if (reps.rows() != labels.rows()) {
        throw ShapeError("SupportBatch: z_s has " + std::to_string(reps.rows()) +
                         " rows, y_s has " + std::to_string(labels.rows()));
    }
    if (classes_present == 0 || per_class_count == 0 ||
        classes_present * per_class_count != labels.rows()) {
        throw ValidationError("SupportBatch: " + std::to_string(labels.rows()) +
                              " rows do not form " + std::to_string(classes_present) +
                              " classes of " + std::to_string(per_class_count) + " instances");
    }
    for (std::size_t i = 0; i < labels.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < labels.cols(); ++j) s += labels(i, j);
        if (std::abs(s - 1.0) > 1e-9) {
            throw ValidationError("SupportBatch: label row " + std::to_string(i) + " sums to " +
                                  std::to_string(s));
        }
    }
}

PredictionBatch similarity_classifier(ad::Var z, const SupportBatch& support, double tau) {
    if (tau <= 0.0) {
        throw DomainError("similarity_classifier: tau must be positive, got " + std::to_string(tau));
    }
    support.validate();
    const Matrix& zs = support.z_s.value();
    if (z.cols() != zs.cols()) {
        throw ShapeError("similarity_classifier: embedding dims differ, z has " +
                         std::to_string(z.cols()) + ", z_s has " + std::to_string(zs.cols()));
    }
    ad::Var zn = ad::row_l2_normalize(z);
    ad::Var zsn = ad::row_l2_normalize(support.z_s);
    ad::Var logits = ad::matmul(zn, ad::transpose(zsn));
    ad::Var weights = ad::softmax_rows(logits, tau);
    ad::Var p = ad::matmul(weights, z.tape().constant(support.y_s));
    PredictionBatch out;
    out.p = p;
    out.temperature = tau;
    return out;
}

Matrix sharpen(const Matrix& p, double temperature) {
    if (temperature <= 0.0) {
        throw DomainError("sharpen: temperature must be positive, got " +
                          std::to_string(temperature));
    }
    const double c = 1.0 / temperature;
    Matrix out(p.rows(), p.cols());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        const double* r = p.row_ptr(i);
        double top = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) top = std::max(top, r[j]);
        if (top <= 0.0) {
            throw ValidationError("sharpen: row " + std::to_string(i) + " is all zero");
        }
        double* o = out.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) {
            o[j] = std::exp(c * std::log(std::max(r[j], kSharpenFloor)));
            s += o[j];
        }
        for (std::size_t j = 0; j < p.cols(); ++j) o[j] /= s;
    }
    return out;
}

ad::Var me_max_entropy(const std::vector<ad::Var>& live_predictions, double sharpen_temperature,
                       MeMaxVariant variant) {
    if (live_predictions.empty()) {
        throw ConfigError("me_max_entropy: no predictions supplied");
    }
    const double inv_views = 1.0 / static_cast<double>(live_predictions.size());

    ad::Var p_bar;
    if (variant == MeMaxVariant::kDifferentiableSharpen) {
        for (std::size_t k = 0; k < live_predictions.size(); ++k) {
            ad::Var m = ad::mean_of_rows(ad::sharpen_rows(live_predictions[k], sharpen_temperature));
            p_bar = k == 0 ? m : ad::add(p_bar, m);
        }
        p_bar = ad::scale(p_bar, inv_views);
    } else {
        // Straight-through: value from the detached sharpened average,
        // gradient through the unsharpened mean of the live predictions.
        ad::Var live_mean;
        Matrix sharp_mean;
        for (std::size_t k = 0; k < live_predictions.size(); ++k) {
            ad::Var m = ad::mean_of_rows(live_predictions[k]);
            live_mean = k == 0 ? m : ad::add(live_mean, m);
            Matrix s = mean_of_rows(sharpen(live_predictions[k].value(), sharpen_temperature));
            sharp_mean = k == 0 ? s : add(sharp_mean, s);
        }
        live_mean = ad::scale(live_mean, inv_views);
        sharp_mean = scale(sharp_mean, inv_views);
        p_bar = ad::add_constant(live_mean, subtract(sharp_mean, live_mean.value()));
    }
    return entropy_node(p_bar);
}

ad::Var entropy_minimization_term(ad::Var p, double weight) {
    if (weight < 0.0) {
        throw DomainError("entropy_minimization_term: weight must be nonnegative");
    }
    if (weight == 0.0) {
        return p.tape().constant(Matrix(1, 1));
    }
    // weight * (1/n) * sum_i H(p_i) with H the Shannon entropy of each row.
    const double c = -weight / static_cast<double>(p.rows());
    return ad::scale(ad::sum_all(ad::hadamard(p, ad::log(p, kEntropyLogFloor))), c);
}

Matrix smooth_one_hot(const std::vector<int>& labels, std::size_t num_classes, double smoothing) {
    if (smoothing < 0.0 || smoothing >= 1.0) {
        throw DomainError("smooth_one_hot: smoothing must lie in [0, 1), got " +
                          std::to_string(smoothing));
    }
    const double off = smoothing / static_cast<double>(num_classes);
    const double on = 1.0 - smoothing + off;
    Matrix out(labels.size(), num_classes, off);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw ValidationError("smooth_one_hot: label " + std::to_string(labels[i]) +
                                  " out of range for " + std::to_string(num_classes) + " classes");
        }
        out(i, static_cast<std::size_t>(labels[i])) = on;
    }
    return out;
}

Matrix semi_supervised_target_override(const Matrix& default_targets,
                                       const std::vector<std::optional<int>>& labels,
                                       std::size_t num_classes, double smoothing) {
    if (labels.size() != default_targets.rows()) {
        throw ShapeError("semi_supervised_target_override: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(default_targets.rows()) + " target rows");
    }
    if (default_targets.cols() != num_classes) {
        throw ShapeError("semi_supervised_target_override: targets have " +
                         std::to_string(default_targets.cols()) + " columns, expected " +
                         std::to_string(num_classes));
    }
    Matrix out = default_targets;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i].has_value()) continue;
        const Matrix row = smooth_one_hot({*labels[i]}, num_classes, smoothing);
        for (std::size_t j = 0; j < num_classes; ++j) out(i, j) = row(0, j);
    }
    return out;
}

LossBreakdown paws_loss_two_view(ad::Var p_anchor, ad::Var p_positive, const LossOptions& options) {
    return paws_loss_multicrop({p_anchor, p_positive}, {}, options);
}

LossBreakdown paws_loss_multicrop(std::array<ad::Var, 2> p_global,
                                  const std::vector<ad::Var>& p_local, const LossOptions& options,
                                  const std::optional<std::array<Matrix, 2>>& global_target_values,
                                  const std::vector<std::optional<int>>* anchor_labels,
                                  double label_smoothing) {
    const Matrix& g0 = p_global[0].value();
    require_same_shape(g0, p_global[1].value(), "paws_loss_multicrop globals");
    for (const ad::Var& l : p_local) {
        require_same_shape(g0, l.value(), "paws_loss_multicrop locals");
    }
    const std::size_t num_classes = g0.cols();
    const double view_count = static_cast<double>(2 + p_local.size());

    const Matrix& tv0 = global_target_values ? (*global_target_values)[0] : p_global[0].value();
    const Matrix& tv1 = global_target_values ? (*global_target_values)[1] : p_global[1].value();
    require_same_shape(g0, tv0, "paws_loss_multicrop target values");
    require_same_shape(g0, tv1, "paws_loss_multicrop target values");

    Matrix rho0 = sharpen(tv0, options.sharpen_temperature);
    Matrix rho1 = sharpen(tv1, options.sharpen_temperature);
    Matrix target_g0 = rho1;
    Matrix target_g1 = rho0;
    Matrix target_local = scale(add(rho0, rho1), 0.5);
    if (anchor_labels != nullptr) {
        target_g0 = semi_supervised_target_override(target_g0, *anchor_labels, num_classes,
                                                    label_smoothing);
        target_g1 = semi_supervised_target_override(target_g1, *anchor_labels, num_classes,
                                                    label_smoothing);
        target_local = semi_supervised_target_override(target_local, *anchor_labels, num_classes,
                                                       label_smoothing);
    }

    double confidence = 0.0;
    for (const Matrix* t : {&target_g0, &target_g1}) {
        for (std::size_t i = 0; i < t->rows(); ++i) {
            const double* r = t->row_ptr(i);
            double top = r[0];
            for (std::size_t j = 1; j < t->cols(); ++j) top = std::max(top, r[j]);
            confidence += top;
        }
    }
    confidence /= static_cast<double>(2 * g0.rows());

    ad::Var consistency = ad::add(ad::cross_entropy_rows(target_g0, p_global[0]),
                                  ad::cross_entropy_rows(target_g1, p_global[1]));
    for (const ad::Var& l : p_local) {
        consistency = ad::add(consistency, ad::cross_entropy_rows(target_local, l));
    }
    consistency = ad::scale(consistency, 1.0 / view_count);

    LossBreakdown out;
    out.consistency = consistency.value()(0, 0);
    out.target_confidence = confidence;
    out.total = consistency;

    std::vector<ad::Var> live;
    live.push_back(p_global[0]);
    live.push_back(p_global[1]);
    for (const ad::Var& l : p_local) live.push_back(l);

    // p_bar reported for every run so metrics can track it with the
    // regularizer disabled as well.
    {
        Matrix acc;
        for (std::size_t k = 0; k < live.size(); ++k) {
            Matrix m = mean_of_rows(sharpen(live[k].value(), options.sharpen_temperature));
            acc = k == 0 ? m : add(acc, m);
        }
        out.p_bar = scale(acc, 1.0 / view_count);
    }

    if (options.enable_me_max) {
        ad::Var h = me_max_entropy(live, options.sharpen_temperature, options.me_max_variant);
        out.me_max = h.value()(0, 0);
        out.total = ad::subtract(out.total, h);
    }

    if (options.entropy_min_weight > 0.0) {
        ad::Var term;
        for (std::size_t k = 0; k < live.size(); ++k) {
            ad::Var t = entropy_minimization_term(live[k], options.entropy_min_weight);
            term = k == 0 ? t : ad::add(term, t);
        }
        term = ad::scale(term, 1.0 / view_count);
        out.entropy_min = term.value()(0, 0);
        out.total = ad::add(out.total, term);
    }
    return out;
}

}  // namespace paws
