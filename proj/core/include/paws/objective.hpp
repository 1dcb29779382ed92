#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "paws/matrix.hpp"
#include "paws/tape.hpp"

namespace paws {

/// Labeled support mini-batch: representations paired with (smoothed) one-hot
/// labels. Balance (equal rows per class) is what makes collapsed predictions
/// exactly uniform, so it is validated, not assumed.
struct SupportBatch {
    ad::Var z_s;                    // [m x d], live node: gradients flow into the support side
    Matrix y_s;                     // [m x K], constant
    std::size_t classes_present = 0;
    std::size_t per_class_count = 0;

    // Throws ValidationError unless every y_s row sums to 1 within 1e-9 and
    // m == classes_present * per_class_count.
    void validate() const;
};

struct PredictionBatch {
    ad::Var p;                 // [n x K], rows are probability distributions
    Matrix sharpened;          // constant target copy; empty until sharpened
    double temperature = 0.0;  // cosine temperature used
    double sharpen_temperature = 0.0;
};

/// How the mean-entropy regularizer obtains its differentiable pathway.
enum class MeMaxVariant {
    // Sharpening applied as a differentiable op on the live predictions; the
    // regularizer's gradient flows through the sharpening Jacobian.
    kDifferentiableSharpen,
    // The regularizer's value is the entropy of the detached sharpened
    // average, but its gradient flows through the unsharpened mean of the
    // live predictions (straight-through).
    kDetachedSharpen,
};

struct LossOptions {
    double sharpen_temperature = 0.25;
    bool enable_me_max = true;
    MeMaxVariant me_max_variant = MeMaxVariant::kDifferentiableSharpen;
    double entropy_min_weight = 0.0;
};

struct LossBreakdown {
    ad::Var total;
    double consistency = 0.0;      // mean cross-entropy against sharpened targets
    double me_max = 0.0;           // H(p_bar); 0 when the regularizer is off
    double entropy_min = 0.0;      // weighted entropy-minimization term; 0 when off
    Matrix p_bar;                  // [1 x K] average sharpened prediction
    double target_confidence = 0.0;  // mean row-max of the global-view targets in use
};

/// Soft nearest-neighbor classifier: p = softmax_tau(zhat zhat_S^T) y_S with
/// both sides L2-normalized internally. Differentiable with respect to z and
/// z_S; each output row is a convex combination of support label rows.
PredictionBatch similarity_classifier(ad::Var z, const SupportBatch& support, double tau);

/// Detached sharpening rho: row k -> p_k^(1/T) / sum_j p_j^(1/T), computed as
/// exp(log(max(p, 1e-12)) / T). Output is a plain Matrix and can never carry
/// gradient. T = 1 reproduces the input up to floating-point rounding.
Matrix sharpen(const Matrix& p, double temperature);

/// H(p_bar) as a live node, where p_bar averages the sharpened predictions of
/// all views. The gradient pathway depends on the variant; the value does not.
ad::Var me_max_entropy(const std::vector<ad::Var>& live_predictions, double sharpen_temperature,
                       MeMaxVariant variant);

/// Mean self-entropy of the predictions: weight * mean_i H(p_i, p_i),
/// differentiable through p (alternative non-collapse term, default off).
ad::Var entropy_minimization_term(ad::Var p, double weight);

/// Per-anchor target override: rows with a class label get the smoothed
/// one-hot label as their target; unlabeled rows keep default_targets.
Matrix semi_supervised_target_override(const Matrix& default_targets,
                                       const std::vector<std::optional<int>>& labels,
                                       std::size_t num_classes, double smoothing);

/// Two-view objective: (1/2n) sum_i [H(rho(p+_i), p_i) + H(rho(p_i), p+_i)]
/// minus H(p_bar) when the regularizer is on. Targets are detached.
LossBreakdown paws_loss_two_view(ad::Var p_anchor, ad::Var p_positive, const LossOptions& options);

/// Multi-view objective over 2 global views and any number of local views:
///   (1/(V n)) sum_i [ H(rho(p1), p2) + H(rho(p2), p1)
///                     + sum_local H((rho(p1)+rho(p2))/2, p_local) ] - H(p_bar)
/// with V = 2 + #locals and p_bar averaging sharpened predictions of all views.
///
/// global_target_values overrides the prediction values the global targets are
/// sharpened from (used when the anchor pathway applies a prediction head the
/// target pathway must not see). anchor_labels, when given, routes each labeled
/// anchor's rows through semi_supervised_target_override.
LossBreakdown paws_loss_multicrop(
    std::array<ad::Var, 2> p_global, const std::vector<ad::Var>& p_local,
    const LossOptions& options,
    const std::optional<std::array<Matrix, 2>>& global_target_values = std::nullopt,
    const std::vector<std::optional<int>>* anchor_labels = nullptr, double label_smoothing = 0.0);

/// Smoothed one-hot row: 1 - eps + eps/K at the true class, eps/K elsewhere.
Matrix smooth_one_hot(const std::vector<int>& labels, std::size_t num_classes, double smoothing);

}  // namespace paws
