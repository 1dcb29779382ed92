#include "paws/views.hpp"

#include <cmath>
#include <string>

#include "paws/errors.hpp"

namespace paws {

void AugmentConfig::validate() const {
    if (noise_sigma < 0.0) throw DomainError("AugmentConfig: noise_sigma must be nonnegative");
    if (scale_jitter_low <= 0.0 || scale_jitter_low > scale_jitter_high) {
        throw DomainError("AugmentConfig: require 0 < scale_jitter_low <= scale_jitter_high");
    }
    if (mask_fraction_local < 0.0 || mask_fraction_local >= 1.0) {
        throw DomainError("AugmentConfig: mask_fraction_local must lie in [0, 1)");
    }
    if (grid_mode() && (window_fraction <= 0.0 || window_fraction > 1.0)) {
        throw DomainError("AugmentConfig: window_fraction must lie in (0, 1]");
    }
}

Matrix augment_global(const Matrix& x, const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        const double jitter = rng.uniform(cfg.scale_jitter_low, cfg.scale_jitter_high);
        double* r = out.row_ptr(i);
        for (std::size_t j = 0; j < out.cols(); ++j) {
            r[j] = r[j] * jitter + (cfg.noise_sigma > 0.0 ? rng.normal(0.0, cfg.noise_sigma) : 0.0);
        }
    }
    return out;
}

namespace {

void mask_coordinates(Matrix& view, const AugmentConfig& cfg, Rng& rng) {
    const std::size_t dim = view.cols();
    const auto zeroed = static_cast<std::size_t>(std::llround(cfg.mask_fraction_local *
                                                              static_cast<double>(dim)));
    if (zeroed == 0) return;
    for (std::size_t i = 0; i < view.rows(); ++i) {
        const std::vector<std::size_t> coords = rng.sample_without_replacement(dim, zeroed);
        double* r = view.row_ptr(i);
        for (std::size_t c : coords) r[c] = 0.0;
    }
}

void mask_grid_window(Matrix& view, const AugmentConfig& cfg, Rng& rng) {
    if (cfg.grid_rows * cfg.grid_cols != view.cols()) {
        throw ConfigError("augment_local: grid " + std::to_string(cfg.grid_rows) + "x" +
                          std::to_string(cfg.grid_cols) + " does not match input dim " +
                          std::to_string(view.cols()));
    }
    const auto wr = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.window_fraction * cfg.grid_rows)));
    const auto wc = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.window_fraction * cfg.grid_cols)));
    for (std::size_t i = 0; i < view.rows(); ++i) {
        const std::size_t top = rng.index(cfg.grid_rows - wr + 1);
        const std::size_t left = rng.index(cfg.grid_cols - wc + 1);
        double* r = view.row_ptr(i);
        for (std::size_t gr = 0; gr < cfg.grid_rows; ++gr) {
            for (std::size_t gc = 0; gc < cfg.grid_cols; ++gc) {
                const bool inside = gr >= top && gr < top + wr && gc >= left && gc < left + wc;
                if (!inside) r[gr * cfg.grid_cols + gc] = 0.0;
            }
        }
    }
}

}  // namespace

Matrix augment_local(const Matrix& x, const AugmentConfig& cfg, Rng& rng) {
    Matrix view = augment_global(x, cfg, rng);
    if (cfg.grid_mode()) {
        mask_grid_window(view, cfg, rng);
    } else {
        mask_coordinates(view, cfg, rng);
    }
    return view;
}

ViewBatch generate_views(const Matrix& x, const AugmentConfig& cfg, std::size_t num_global,
                         std::size_t num_local, Rng& rng,
                         const std::vector<std::size_t>& source_indices) {
    if (num_global < 2) {
        throw DomainError("generate_views: need at least 2 global views, got " +
                          std::to_string(num_global));
    }
    cfg.validate();
    ViewBatch batch;
    if (source_indices.empty()) {
        batch.source_indices.resize(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) batch.source_indices[i] = i;
    } else {
        if (source_indices.size() != x.rows()) {
            throw ShapeError("generate_views: " + std::to_string(source_indices.size()) +
                             " source indices for " + std::to_string(x.rows()) + " rows");
        }
        batch.source_indices = source_indices;
    }
    for (std::size_t g = 0; g < num_global; ++g) batch.global_views.push_back(augment_global(x, cfg, rng));
    for (std::size_t l = 0; l < num_local; ++l) batch.local_views.push_back(augment_local(x, cfg, rng));
    return batch;
}

std::vector<std::vector<std::size_t>> pair_structure(const ViewBatch& batch) {
    if (batch.global_views.size() != 2) {
        throw ConfigError("pair_structure: the objective is defined for exactly 2 global views, got " +
                          std::to_string(batch.global_views.size()));
    }
    std::vector<std::vector<std::size_t>> targets;
    targets.push_back({1});
    targets.push_back({0});
    for (std::size_t l = 0; l < batch.local_views.size(); ++l) targets.push_back({0, 1});
    return targets;
}

}  // namespace paws
