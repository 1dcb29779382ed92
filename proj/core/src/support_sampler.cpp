#include "paws/support_sampler.hpp"

#include <algorithm>
#include <string>

#include "paws/errors.hpp"
#include "paws/objective.hpp"

namespace paws {

LabeledPool make_labeled_pool(Matrix inputs, std::vector<int> labels, std::size_t num_classes,
                              std::vector<std::size_t> source_rows) {
    if (inputs.rows() != labels.size()) {
        throw ShapeError("make_labeled_pool: " + std::to_string(inputs.rows()) + " inputs vs " +
                         std::to_string(labels.size()) + " labels");
    }
    if (num_classes == 0) throw ConfigError("make_labeled_pool: num_classes must be positive");
    LabeledPool pool;
    pool.num_classes = num_classes;
    pool.class_indices.resize(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
            throw ValidationError("make_labeled_pool: label " + std::to_string(c) +
                                  " out of range for " + std::to_string(num_classes) + " classes");
        }
        pool.class_indices[static_cast<std::size_t>(c)].push_back(i);
    }
    if (source_rows.empty()) {
        source_rows.resize(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) source_rows[i] = i;
    } else if (source_rows.size() != labels.size()) {
        throw ShapeError("make_labeled_pool: source_rows size mismatch");
    }
    pool.inputs = std::move(inputs);
    pool.labels = std::move(labels);
    pool.source_rows = std::move(source_rows);
    return pool;
}

SupportDraw sample_support(const LabeledPool& pool, std::size_t classes_per_batch,
                           std::size_t images_per_class, Rng& rng) {
    if (images_per_class == 0) {
        throw ConfigError("sample_support: images_per_class must be positive");
    }
    if (classes_per_batch == 0 || classes_per_batch > pool.num_classes) {
        throw ConfigError("sample_support: classes_per_batch " + std::to_string(classes_per_batch) +
                          " not in [1, " + std::to_string(pool.num_classes) + "]");
    }
    for (std::size_t c = 0; c < pool.num_classes; ++c) {
        if (pool.class_indices[c].size() < images_per_class) {
            throw ConfigError("sample_support: class " + std::to_string(c) + " has only " +
                              std::to_string(pool.class_indices[c].size()) +
                              " instances, need " + std::to_string(images_per_class));
        }
    }
    SupportDraw draw;
    draw.images_per_class = images_per_class;
    const std::vector<std::size_t> classes =
        rng.sample_without_replacement(pool.num_classes, classes_per_batch);
    for (std::size_t c : classes) {
        draw.sampled_classes.push_back(static_cast<int>(c));
        const std::vector<std::size_t>& members = pool.class_indices[c];
        for (std::size_t pick : rng.sample_without_replacement(members.size(), images_per_class)) {
            draw.indices.push_back(members[pick]);
        }
    }
    return draw;
}

Matrix encode_labels(const SupportDraw& draw, const LabeledPool& pool, std::size_t num_classes,
                     double smoothing) {
    std::vector<int> labels;
    labels.reserve(draw.indices.size());
    for (std::size_t idx : draw.indices) labels.push_back(pool.labels[idx]);
    return smooth_one_hot(labels, num_classes, smoothing);
}

SupportViews support_views(const LabeledPool& pool, const SupportDraw& draw,
                           const AugmentConfig& augment, std::size_t views_per_support,
                           double smoothing, Rng& rng) {
    if (views_per_support == 0) {
        throw ConfigError("support_views: views_per_support must be positive");
    }
    Matrix drawn(draw.indices.size(), pool.inputs.cols());
    for (std::size_t i = 0; i < draw.indices.size(); ++i) {
        const double* src = pool.inputs.row_ptr(draw.indices[i]);
        std::copy(src, src + pool.inputs.cols(), drawn.row_ptr(i));
    }
    const Matrix labels = encode_labels(draw, pool, pool.num_classes, smoothing);

    SupportViews out;
    out.inputs = Matrix(views_per_support * drawn.rows(), drawn.cols());
    out.labels = Matrix(views_per_support * drawn.rows(), labels.cols());
    for (std::size_t v = 0; v < views_per_support; ++v) {
        const Matrix view = augment_global(drawn, augment, rng);
        for (std::size_t i = 0; i < drawn.rows(); ++i) {
            const std::size_t row = v * drawn.rows() + i;
            std::copy(view.row_ptr(i), view.row_ptr(i) + view.cols(), out.inputs.row_ptr(row));
            std::copy(labels.row_ptr(i), labels.row_ptr(i) + labels.cols(),
                      out.labels.row_ptr(row));
        }
    }
    return out;
}

}  // namespace paws
