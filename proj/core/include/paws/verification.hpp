#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paws/encoder.hpp"
#include "paws/matrix.hpp"

namespace paws {

/// A constructed (not trained-to) collapse: the final projection layer's
/// weights are collapse_offset-scaled noise and its bias is a shared unit
/// vector, so with collapse_offset == 0 every representation row equals the
/// bias exactly and the premise of the non-collapse argument holds to machine
/// precision. collapse_offset > 0 gives a near-collapsed state.
///
/// Note on the exact case: with cosine similarity, exact collapse places every
/// pairwise similarity at its maximum, where the cosine is stationary, so the
/// consistency-loss gradient vanishes identically there (the point is a
/// saddle, not an attractor). Gradient-flow checks therefore run on
/// near-collapsed constructions; the exact construction is what makes the
/// uniform-prediction statement exact.
struct CollapseConstruction {
    EncoderParams params;
    Matrix support_inputs;
    std::vector<int> support_labels;  // class-major
    Matrix anchor_inputs;
    std::size_t num_classes = 0;
    std::vector<std::size_t> class_counts;  // support rows per class
    bool balanced = true;
    double collapse_offset = 0.0;
};

struct CollapseSetup {
    std::size_t num_classes = 4;
    std::size_t per_class = 2;
    std::size_t anchors = 8;
    std::size_t input_dim = 8;
    std::size_t hidden_dim = 16;
    std::size_t embed_dim = 8;
    double collapse_offset = 0.0;
    // Explicit per-class support counts; empty means per_class for every class.
    std::vector<std::size_t> class_counts;
};

CollapseConstruction make_collapse_construction(const CollapseSetup& setup, std::uint64_t seed);

/// Similarity-classifier predictions of the construction's anchors against
/// its support set with hard one-hot labels (values only, no tape).
Matrix collapsed_predictions(const CollapseConstruction& construction, double tau);

struct UniformCheckReport {
    double max_deviation = 0.0;  // max_k |p_k - 1/K| over all rows
    bool pass = false;           // max_deviation <= 1e-12
};

/// Requires an exactly collapsed, class-balanced construction
/// (PreconditionError otherwise): collapsed representations with balanced
/// support give exactly uniform predictions.
UniformCheckReport check_uniform_under_collapse(const CollapseConstruction& construction,
                                                double tau);

struct GradientCheckReport {
    double grad_norm = 0.0;       // sqrt of the summed squared parameter gradients
    bool degenerate_target = false;  // targets uniform: gradient may legitimately vanish
};

/// Gradient of mean H(target_i, p_i) with respect to every encoder parameter
/// at the construction. Uniform targets are reported as degenerate rather
/// than asserted on.
GradientCheckReport check_noncollapse_gradient(const CollapseConstruction& construction,
                                               const Matrix& targets, double tau);

/// The labeled-anchor route: targets are the (unsharpened, T = 1) positive
/// predictions, except that the first num_labeled anchors use their smoothed
/// class label. Throws PreconditionError when num_labeled == 0.
GradientCheckReport check_labeled_anchor_gradient(const CollapseConstruction& construction,
                                     std::size_t num_labeled, double tau, double smoothing);

struct EscapeOptions {
    double sharpen_temperature = 0.25;
    bool me_max = true;
    double entropy_min_weight = 0.0;
    std::size_t steps = 100;
    double lr = 0.3;
    double tau = 0.1;
    std::size_t batch_size = 16;
    std::size_t local_views = 2;
};

struct EscapeReport {
    std::vector<double> mean_pairwise_distance;  // per step, over normalized probe representations
    std::vector<double> prediction_entropy;      // per step, mean row entropy of probe predictions
    double initial_distance = 0.0;
    double final_distance = 0.0;
    bool spread_10x = false;
};

/// Train a near-collapse-initialized encoder for a fixed number of steps on a
/// small blob task and record how far the representations spread.
EscapeReport run_collapse_escape(const EscapeOptions& options, std::uint64_t seed);

struct VerificationLine {
    std::string name;
    bool info_only = false;  // measurement reported without an assertion
    bool passed = false;
    std::string detail;
};

struct VerificationReport {
    std::vector<VerificationLine> lines;
    bool all_pass = true;  // info-only lines do not count
    EscapeReport escape_sharpened;
    EscapeReport escape_unsharpened;   // report-only trajectory
    EscapeReport escape_entropy_min;
};

/// The full non-collapse suite: uniformity under exact collapse, the
/// unbalanced negative control, gradient flow at near-collapse, the
/// labeled-anchor route, and the three collapse-escape runs.
VerificationReport run_verification_suite(std::uint64_t seed);

}  // namespace paws
