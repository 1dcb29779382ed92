#pragma once

#include <cstddef>
#include <vector>

#include "paws/matrix.hpp"
#include "paws/rng.hpp"

namespace paws {

/// Stochastic view generation for flat feature vectors (and, optionally, tiny
/// flattened image grids). Global views keep all coordinates; local views
/// destroy part of the input, which is what makes predicting the global
/// assignment from a local view a nontrivial task.
struct AugmentConfig {
    double noise_sigma = 0.0;       // additive Gaussian noise, absolute scale
    double scale_jitter_low = 1.0;  // per-sample multiplicative jitter range
    double scale_jitter_high = 1.0;
    double mask_fraction_local = 0.5;  // fraction of coordinates zeroed in local views

    // When grid_rows * grid_cols == input_dim, local views take a contiguous
    // sub-window of the grid (zero-padded) instead of a random coordinate mask.
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    double window_fraction = 0.5;  // side-length fraction of the local sub-window

    bool grid_mode() const { return grid_rows > 0 && grid_cols > 0; }
    void validate() const;
};

struct ViewBatch {
    std::vector<Matrix> global_views;          // length G, each [n x input_dim]
    std::vector<Matrix> local_views;           // length L, each [n x input_dim]
    std::vector<std::size_t> source_indices;   // n sample ids, row i of every view
                                               // derives from source sample i
};

/// One global-style augmentation: x * jitter + noise, independent per sample.
Matrix augment_global(const Matrix& x, const AugmentConfig& cfg, Rng& rng);
/// Global-style perturbation followed by information removal (coordinate mask
/// or grid sub-window).
Matrix augment_local(const Matrix& x, const AugmentConfig& cfg, Rng& rng);

/// G global and L local views of each row of x. Requires G >= 2: each global
/// view's target is the other global view's prediction.
ViewBatch generate_views(const Matrix& x, const AugmentConfig& cfg, std::size_t num_global,
                         std::size_t num_local, Rng& rng,
                         const std::vector<std::size_t>& source_indices = {});

/// For each view index (globals first, then locals), the view indices whose
/// predictions form its target: global 0 <-> global 1, every local -> both
/// globals. Locals never appear in any target list. Requires exactly 2 globals.
std::vector<std::vector<std::size_t>> pair_structure(const ViewBatch& batch);

}  // namespace paws
