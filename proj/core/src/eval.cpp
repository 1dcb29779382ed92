#include "paws/eval.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "paws/errors.hpp"

namespace paws {

SoftNnResult soft_nn_classify(const Matrix& queries, const Matrix& support,
                              const std::vector<int>& support_labels, std::size_t num_classes,
                              double tau) {
    if (tau <= 0.0) throw DomainError("soft_nn_classify: tau must be positive");
    if (support.rows() != support_labels.size()) {
        throw ShapeError("soft_nn_classify: " + std::to_string(support.rows()) +
                         " support rows vs " + std::to_string(support_labels.size()) + " labels");
    }
    if (queries.cols() != support.cols()) {
        throw ShapeError("soft_nn_classify: query dim " + std::to_string(queries.cols()) +
                         " vs support dim " + std::to_string(support.cols()));
    }
    const Matrix qn = row_l2_normalize(queries);
    const Matrix sn = row_l2_normalize(support);
    const Matrix weights = softmax_rows(matmul_nt(qn, sn), tau);

    SoftNnResult out;
    out.probabilities = Matrix(queries.rows(), num_classes);
    out.predicted.resize(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        double* p = out.probabilities.row_ptr(i);
        const double* w = weights.row_ptr(i);
        for (std::size_t j = 0; j < support.rows(); ++j) {
            p[static_cast<std::size_t>(support_labels[j])] += w[j];
        }
        std::size_t best = 0;
        for (std::size_t k = 1; k < num_classes; ++k) {
            if (p[k] > p[best]) best = k;  // strict: ties keep the lowest index
        }
        out.predicted[i] = static_cast<int>(best);
    }
    return out;
}

std::vector<int> nearest_neighbor_classify(const Matrix& queries, const Matrix& reference,
                                           const std::vector<int>& reference_labels) {
    if (reference.rows() != reference_labels.size()) {
        throw ShapeError("nearest_neighbor_classify: reference/label count mismatch");
    }
    std::vector<int> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        const double* q = queries.row_ptr(i);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < reference.rows(); ++j) {
            const double* r = reference.row_ptr(j);
            double d = 0.0;
            for (std::size_t c = 0; c < queries.cols(); ++c) {
                const double diff = q[c] - r[c];
                d += diff * diff;
            }
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        out[i] = reference_labels[best_j];
    }
    return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("accuracy: prediction/truth count mismatch");
    }
    if (predicted.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double eval_nn(const EncoderParams& params, const Matrix& pool_inputs,
               const std::vector<int>& pool_labels, std::size_t num_classes,
               const Matrix& test_inputs, const std::vector<int>& test_labels, double tau) {
    if (test_inputs.cols() != params.config.input_dim ||
        pool_inputs.cols() != params.config.input_dim) {
        throw FormatError("eval_nn: input dim " + std::to_string(test_inputs.cols()) +
                          " does not match checkpoint input dim " +
                          std::to_string(params.config.input_dim));
    }
    const Matrix z_test = encode_values(params, test_inputs);
    const Matrix z_pool = encode_values(params, pool_inputs);
    const SoftNnResult result = soft_nn_classify(z_test, z_pool, pool_labels, num_classes, tau);
    return accuracy(result.predicted, test_labels);
}

}  // namespace paws
