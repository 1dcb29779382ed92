#pragma once

#include <cstdint>
#include <vector>

#include "paws/matrix.hpp"
#include "paws/support_sampler.hpp"

namespace paws {

/// Synthetic dataset, already split into train (the unlabeled set) and test.
struct Dataset {
    Matrix train_inputs;
    std::vector<int> train_labels;  // ground truth, visible only through the labeled pool
    Matrix test_inputs;
    std::vector<int> test_labels;
    std::size_t num_classes = 0;
    std::size_t input_dim = 0;
};

/// K Gaussian clusters with unit covariance and means at
/// separation * (random unit directions with pairwise angle >= 45 degrees),
/// stratified 80/20 train/test split. Deterministic per seed. Throws
/// ConfigError when no sufficiently separated direction set exists.
Dataset make_blobs(std::size_t classes, std::size_t per_class, std::size_t dim, double separation,
                   std::uint64_t seed);

/// Tiny flattened grid images: each class is a fixed random binary pattern on
/// a grid x grid board, samples are the pattern plus Gaussian noise.
Dataset make_tiny_grid(std::size_t classes, std::size_t per_class, std::size_t grid, double noise,
                       std::uint64_t seed);

/// Class-balanced labeled subset of the train split (budget split as evenly
/// as possible across classes). budget_fraction in (0, 1) selects a fraction
/// of the train set instead of an absolute count.
LabeledPool select_labeled_pool(const Dataset& data, double budget, std::uint64_t seed);

}  // namespace paws
