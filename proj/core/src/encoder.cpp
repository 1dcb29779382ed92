#include "paws/encoder.hpp"

#include <cmath>
#include <string>

#include "paws/errors.hpp"
#include "paws/rng.hpp"

namespace paws {

namespace {

void collect(std::vector<Matrix*>& out, std::vector<LinearLayer>& layers) {
    for (LinearLayer& l : layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
}

LinearLayer init_layer(std::size_t in, std::size_t out, Rng& rng) {
    LinearLayer layer;
    layer.weight = Matrix(in, out);
    layer.bias = Matrix(1, out);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
    return layer;
}

Matrix forward_layer_values(const Matrix& x, const LinearLayer& layer, bool relu) {
    Matrix h = matmul(x, layer.weight);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        double* r = h.row_ptr(i);
        for (std::size_t j = 0; j < h.cols(); ++j) {
            r[j] += layer.bias(0, j);
            if (relu && r[j] < 0.0) r[j] = 0.0;
        }
    }
    return h;
}

}  // namespace

std::vector<Matrix*> EncoderParams::parameter_list() {
    std::vector<Matrix*> out;
    collect(out, trunk);
    collect(out, projection);
    collect(out, prediction);
    return out;
}

std::vector<const Matrix*> EncoderParams::parameter_list() const {
    std::vector<const Matrix*> out;
    for (Matrix* m : const_cast<EncoderParams*>(this)->parameter_list()) out.push_back(m);
    return out;
}

std::vector<bool> EncoderParams::bias_flags() const {
    std::vector<bool> out;
    auto push = [&out](const std::vector<LinearLayer>& layers) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            out.push_back(false);
            out.push_back(true);
        }
    };
    push(trunk);
    push(projection);
    push(prediction);
    return out;
}

EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed) {
    if (config.passthrough) {
        EncoderParams params;
        params.config = config;
        return params;
    }
    if (config.input_dim == 0 || config.hidden_dim == 0 || config.embed_dim == 0 ||
        config.proj_hidden_dim == 0 || (config.prediction_head && config.pred_hidden_dim == 0)) {
        throw ConfigError("init_params: all dimensions must be positive");
    }
    Rng rng(stream_seed(seed, streams::kParamInit));
    EncoderParams params;
    params.config = config;
    std::size_t in = config.input_dim;
    for (std::size_t i = 0; i < config.trunk_layers; ++i) {
        params.trunk.push_back(init_layer(in, config.hidden_dim, rng));
        in = config.hidden_dim;
    }
    params.projection.push_back(init_layer(in, config.proj_hidden_dim, rng));
    params.projection.push_back(init_layer(config.proj_hidden_dim, config.proj_hidden_dim, rng));
    params.projection.push_back(init_layer(config.proj_hidden_dim, config.embed_dim, rng));
    if (config.prediction_head) {
        params.prediction.push_back(init_layer(config.embed_dim, config.pred_hidden_dim, rng));
        params.prediction.push_back(init_layer(config.pred_hidden_dim, config.embed_dim, rng));
    }
    return params;
}

Matrix encode_values(const EncoderParams& params, const Matrix& x) {
    if (x.cols() != params.config.input_dim) {
        throw ShapeError("encode_values: input has " + std::to_string(x.cols()) +
                         " columns, encoder expects " + std::to_string(params.config.input_dim));
    }
    if (params.config.passthrough) return x;
    Matrix h = x;
    for (const LinearLayer& layer : params.trunk) h = forward_layer_values(h, layer, true);
    for (std::size_t i = 0; i < params.projection.size(); ++i) {
        h = forward_layer_values(h, params.projection[i], i + 1 < params.projection.size());
    }
    return h;
}

Matrix first_projection_values(const EncoderParams& params, const Matrix& x) {
    if (params.config.passthrough) {
        throw ConfigError("first_projection_values: passthrough encoder has no projection head");
    }
    Matrix h = x;
    for (const LinearLayer& layer : params.trunk) h = forward_layer_values(h, layer, true);
    return forward_layer_values(h, params.projection[0], true);
}

EncoderGraph::EncoderGraph(ad::Tape& tape, const EncoderParams& params)
    : tape_(&tape), params_(&params) {
    auto bind = [this](const std::vector<LinearLayer>& layers, std::vector<BoundLayer>& bound) {
        for (const LinearLayer& l : layers) {
            BoundLayer b{tape_->leaf(l.weight, true), tape_->leaf(l.bias, true)};
            param_vars_.push_back(b.weight);
            param_vars_.push_back(b.bias);
            bound.push_back(b);
        }
    };
    bind(params.trunk, trunk_);
    bind(params.projection, projection_);
    bind(params.prediction, prediction_);
}

ad::Var EncoderGraph::run_stack(ad::Var h, const std::vector<BoundLayer>& layers,
                                bool relu_after_last) const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = ad::add_rowvec(ad::matmul(h, layers[i].weight), layers[i].bias);
        if (relu_after_last || i + 1 < layers.size()) h = ad::relu(h);
    }
    return h;
}

ad::Var EncoderGraph::encode(const Matrix& x) const {
    if (x.cols() != params_->config.input_dim) {
        throw ShapeError("encode: input has " + std::to_string(x.cols()) +
                         " columns, encoder expects " + std::to_string(params_->config.input_dim));
    }
    ad::Var h = tape_->constant(x);
    if (params_->config.passthrough) return h;
    h = run_stack(h, trunk_, true);
    h = run_stack(h, projection_, false);
    return h;
}

ad::Var EncoderGraph::predict_head(ad::Var z, bool enabled) const {
    if (!enabled) return z;
    if (prediction_.empty()) {
        throw ConfigError("predict_head: prediction head requested but not configured");
    }
    return run_stack(z, prediction_, false);
}

ad::Var EncoderGraph::encode_first_projection(const Matrix& x) const {
    if (params_->config.passthrough) {
        throw ConfigError("encode_first_projection: passthrough encoder has no projection head");
    }
    ad::Var h = tape_->constant(x);
    h = run_stack(h, trunk_, true);
    h = ad::relu(ad::add_rowvec(ad::matmul(h, projection_[0].weight), projection_[0].bias));
    return h;
}

std::vector<Matrix> EncoderGraph::gradients() const {
    std::vector<Matrix> out;
    out.reserve(param_vars_.size());
    for (ad::Var v : param_vars_) out.push_back(v.grad());
    return out;
}

}  // namespace paws
