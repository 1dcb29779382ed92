#pragma once

#include <vector>

#include "paws/matrix.hpp"

namespace paws {

/// Report-only losses computed on detached representation values; no gradient
/// ever flows through them and computing them consumes no randomness, so
/// toggling them cannot change a training trajectory.

/// Normalized temperature-scaled cross-entropy over two global views of the
/// same batch: each of the 2n rows treats the other view of its sample as the
/// positive and the remaining 2n - 2 rows as negatives. With all
/// representations identical the value is log(2n - 1).
double nt_xent(const Matrix& view_a, const Matrix& view_b, double tau);

/// Supervised contrastive diagnostic over support representations: positives
/// are all other rows with the same class label.
double support_contrastive(const Matrix& support, const std::vector<int>& labels, double tau);

}  // namespace paws
