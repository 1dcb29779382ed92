#pragma once

#include <cstddef>
#include <vector>

#include "paws/matrix.hpp"
#include "paws/rng.hpp"
#include "paws/views.hpp"

namespace paws {

/// The annotated pool the non-parametric classifier draws from.
struct LabeledPool {
    Matrix inputs;                                   // [M x input_dim]
    std::vector<int> labels;                         // class ids in [0, K)
    std::size_t num_classes = 0;
    std::vector<std::vector<std::size_t>> class_indices;  // partition of [0, M)
    // Original dataset row per pool row; lets the trainer recognize labeled
    // anchors inside an unlabeled batch.
    std::vector<std::size_t> source_rows;

    std::size_t size() const { return labels.size(); }
};

/// Build the per-class index lists and validate labels. source_rows defaults
/// to the identity when empty.
LabeledPool make_labeled_pool(Matrix inputs, std::vector<int> labels, std::size_t num_classes,
                              std::vector<std::size_t> source_rows = {});

/// One class-balanced support draw: indices grouped class-major, exactly
/// images_per_class rows per sampled class, all distinct within the draw.
struct SupportDraw {
    std::vector<std::size_t> indices;   // classes_sampled * images_per_class pool rows
    std::vector<int> sampled_classes;   // the classes, in draw order
    std::size_t images_per_class = 0;
};

/// Sample classes_per_batch classes uniformly without replacement, then
/// images_per_class distinct instances per class uniformly without
/// replacement. Successive draws are independent (sampling with replacement
/// across iterations). Every class in the pool must hold at least
/// images_per_class instances; the error names the offending class.
SupportDraw sample_support(const LabeledPool& pool, std::size_t classes_per_batch,
                           std::size_t images_per_class, Rng& rng);

/// Smoothed one-hot label rows for a draw, in draw order. Rows sum to 1.
Matrix encode_labels(const SupportDraw& draw, const LabeledPool& pool, std::size_t num_classes,
                     double smoothing);

/// views_per_support augmented copies of each drawn support input, stacked
/// view-major: [v * C * s x input_dim]. Labels replicate in matching order,
/// so per-class balance becomes v * s.
struct SupportViews {
    Matrix inputs;
    Matrix labels;  // smoothed rows aligned with inputs
};
SupportViews support_views(const LabeledPool& pool, const SupportDraw& draw,
                           const AugmentConfig& augment, std::size_t views_per_support,
                           double smoothing, Rng& rng);

}  // namespace paws
