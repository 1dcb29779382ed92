#pragma once

#include <cstdint>
#include <vector>

#include "paws/matrix.hpp"
#include "paws/tape.hpp"

namespace paws {

struct LinearLayer {
    Matrix weight;  // [in x out]
    Matrix bias;    // [1 x out]
};

struct EncoderConfig {
    std::size_t input_dim = 16;
    std::size_t hidden_dim = 64;
    std::size_t trunk_layers = 2;
    std::size_t proj_hidden_dim = 64;
    std::size_t embed_dim = 32;
    bool prediction_head = false;
    std::size_t pred_hidden_dim = 32;
    // Identity encoder: no parameters, representations are the raw inputs.
    // Exists so the non-parametric classifier can be exercised on raw features.
    bool passthrough = false;
};

/// MLP trunk + 3-layer projection head, plus an optional 2-layer prediction
/// head mapping embeddings to embeddings. ReLU after every layer except the
/// final layer of each head.
struct EncoderParams {
    EncoderConfig config;
    std::vector<LinearLayer> trunk;
    std::vector<LinearLayer> projection;  // always 3 layers unless passthrough
    std::vector<LinearLayer> prediction;  // 0 or 2 layers

    std::size_t embed_dim() const { return config.passthrough ? config.input_dim : config.embed_dim; }
    std::size_t input_dim() const { return config.input_dim; }

    // Canonical flat ordering (trunk, projection, prediction; weight before
    // bias). The optimizer and the checkpoint both rely on this order.
    std::vector<Matrix*> parameter_list();
    std::vector<const Matrix*> parameter_list() const;
    std::vector<bool> bias_flags() const;
};

/// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases.
/// Bitwise deterministic per seed.
EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed);

/// Tape-free forward pass: trunk + projection values only.
Matrix encode_values(const EncoderParams& params, const Matrix& x);

/// Tape-free trunk + first projection layer (post-ReLU) values.
Matrix first_projection_values(const EncoderParams& params, const Matrix& x);

/// Binds EncoderParams onto one tape as requires_grad leaves. Every encode()
/// call on the same binding reuses the same leaves, so gradients from all
/// views and the support batch accumulate per parameter.
class EncoderGraph {
   public:
    EncoderGraph(ad::Tape& tape, const EncoderParams& params);

    /// Trunk + projection: [n x input_dim] -> [n x embed_dim].
    ad::Var encode(const Matrix& x) const;

    /// Prediction head g applied to embeddings. With enabled == false the
    /// input is returned unchanged; enabled == true requires the head to be
    /// configured (ConfigError otherwise).
    ad::Var predict_head(ad::Var z, bool enabled) const;

    /// Trunk + first projection layer (post-ReLU); the feature the linear
    /// fine-tune classifier attaches to.
    ad::Var encode_first_projection(const Matrix& x) const;

    /// Leaves in EncoderParams::parameter_list order.
    const std::vector<ad::Var>& param_vars() const { return param_vars_; }
    /// Copies of the accumulated gradients, in parameter_list order.
    std::vector<Matrix> gradients() const;

   private:
    struct BoundLayer {
        ad::Var weight;
        ad::Var bias;
    };
    ad::Var run_stack(ad::Var h, const std::vector<BoundLayer>& layers, bool relu_after_last) const;

    ad::Tape* tape_;
    const EncoderParams* params_;
    std::vector<BoundLayer> trunk_;
    std::vector<BoundLayer> projection_;
    std::vector<BoundLayer> prediction_;
    std::vector<ad::Var> param_vars_;
};

}  // namespace paws
