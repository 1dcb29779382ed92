#pragma once

#include <vector>

#include "paws/encoder.hpp"
#include "paws/matrix.hpp"

namespace paws {

/// Soft nearest-neighbor classification over plain values: for each query row,
/// p = softmax_tau(qhat shat^T) y with both sides L2-normalized, predicted
/// class = argmax_k p_k, ties broken by the lowest class index.
struct SoftNnResult {
    std::vector<int> predicted;
    Matrix probabilities;  // [n x K]
};
SoftNnResult soft_nn_classify(const Matrix& queries, const Matrix& support,
                              const std::vector<int>& support_labels, std::size_t num_classes,
                              double tau);

/// Hard 1-nearest-neighbor by Euclidean distance (the raw-feature baseline).
/// Ties broken by the lowest reference row index.
std::vector<int> nearest_neighbor_classify(const Matrix& queries, const Matrix& reference,
                                           const std::vector<int>& reference_labels);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

/// PAWS-NN evaluation: encode queries and the full labeled pool without
/// augmentation, classify with the similarity classifier. Throws FormatError
/// when input dimensions do not match the encoder.
double eval_nn(const EncoderParams& params, const Matrix& pool_inputs,
               const std::vector<int>& pool_labels, std::size_t num_classes,
               const Matrix& test_inputs, const std::vector<int>& test_labels, double tau);

}  // namespace paws
