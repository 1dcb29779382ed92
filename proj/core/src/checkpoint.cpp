#include "paws/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "paws/errors.hpp"

namespace paws {

namespace {

constexpr char kMagic[4] = {'P', 'A', 'W', 'S'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t read_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw FormatError("checkpoint: truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw FormatError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    write_u64(out, m.rows());
    write_u64(out, m.cols());
    for (double v : m.data()) write_f64(out, v);
}

Matrix read_matrix(std::istream& in) {
    const std::uint64_t rows = read_u64(in);
    const std::uint64_t cols = read_u64(in);
    if (rows > (1u << 24) || cols > (1u << 24)) {
        throw FormatError("checkpoint: implausible matrix shape " + std::to_string(rows) + "x" +
                          std::to_string(cols));
    }
    Matrix m(rows, cols);
    for (double& v : m.data()) v = std::bit_cast<double>(read_u64(in));
    return m;
}

std::vector<LinearLayer> read_layers(std::istream& in, std::size_t count) {
    std::vector<LinearLayer> layers;
    for (std::size_t i = 0; i < count; ++i) {
        LinearLayer l;
        l.weight = read_matrix(in);
        l.bias = read_matrix(in);
        if (l.bias.rows() != 1 || l.bias.cols() != l.weight.cols()) {
            throw FormatError("checkpoint: layer " + std::to_string(i) + " bias shape " +
                              shape_string(l.bias) + " does not match weight " +
                              shape_string(l.weight));
        }
        layers.push_back(std::move(l));
    }
    return layers;
}

void check_chain(const std::vector<LinearLayer>& layers, std::size_t in_dim, const char* what) {
    std::size_t dim = in_dim;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].weight.rows() != dim) {
            throw FormatError(std::string("checkpoint: ") + what + " layer " + std::to_string(i) +
                              " expects input " + std::to_string(layers[i].weight.rows()) +
                              ", chain provides " + std::to_string(dim));
        }
        dim = layers[i].weight.cols();
    }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params,
                     const OptimizerState* optimizer, std::uint64_t step_count) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("checkpoint: cannot open " + path.string() + " for writing");

    const auto param_list = params.parameter_list();
    const bool has_opt = optimizer != nullptr;
    if (has_opt && optimizer->velocity.size() != param_list.size()) {
        throw ShapeError("save_checkpoint: optimizer holds " +
                         std::to_string(optimizer->velocity.size()) + " buffers for " +
                         std::to_string(param_list.size()) + " parameters");
    }

    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(param_list.size() * (has_opt ? 2 : 1)));
    write_u32(out, static_cast<std::uint32_t>(params.trunk.size()));
    write_u32(out, static_cast<std::uint32_t>(params.projection.size()));
    write_u32(out, static_cast<std::uint32_t>(params.prediction.size()));
    write_u32(out, has_opt ? 1 : 0);
    write_u64(out, step_count);
    write_u64(out, params.config.input_dim);

    for (const Matrix* m : param_list) write_matrix(out, *m);
    if (has_opt) {
        for (const Matrix& v : optimizer->velocity) write_matrix(out, v);
    }
    if (!out) throw FormatError("checkpoint: write to " + path.string() + " failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("checkpoint: cannot open " + path.string());

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("checkpoint: bad magic in " + path.string());
    }
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw FormatError("checkpoint: unsupported format version " + std::to_string(version));
    }
    const std::uint32_t array_count = read_u32(in);
    const std::uint32_t trunk_count = read_u32(in);
    const std::uint32_t proj_count = read_u32(in);
    const std::uint32_t pred_count = read_u32(in);
    const std::uint32_t has_opt = read_u32(in);
    const std::uint64_t step_count = read_u64(in);
    const std::uint64_t input_dim = read_u64(in);

    const std::size_t layer_count = trunk_count + proj_count + pred_count;
    const std::size_t expected_arrays = 2 * layer_count * (has_opt ? 2 : 1);
    if (array_count != expected_arrays) {
        throw FormatError("checkpoint: array count " + std::to_string(array_count) +
                          " does not match layer structure");
    }
    if (proj_count != 0 && proj_count != 3) {
        throw FormatError("checkpoint: projection head must have 3 layers, found " +
                          std::to_string(proj_count));
    }
    if (pred_count != 0 && pred_count != 2) {
        throw FormatError("checkpoint: prediction head must have 2 layers, found " +
                          std::to_string(pred_count));
    }

    Checkpoint ck;
    ck.step_count = step_count;
    ck.params.trunk = read_layers(in, trunk_count);
    ck.params.projection = read_layers(in, proj_count);
    ck.params.prediction = read_layers(in, pred_count);

    EncoderConfig& cfg = ck.params.config;
    cfg.input_dim = input_dim;
    cfg.trunk_layers = trunk_count;
    cfg.passthrough = layer_count == 0;
    if (!cfg.passthrough) {
        check_chain(ck.params.trunk, input_dim, "trunk");
        const std::size_t trunk_out =
            trunk_count > 0 ? ck.params.trunk.back().weight.cols() : input_dim;
        check_chain(ck.params.projection, trunk_out, "projection");
        cfg.hidden_dim = trunk_count > 0 ? ck.params.trunk[0].weight.cols() : input_dim;
        cfg.proj_hidden_dim = ck.params.projection[0].weight.cols();
        cfg.embed_dim = ck.params.projection.back().weight.cols();
        cfg.prediction_head = pred_count > 0;
        if (pred_count > 0) {
            check_chain(ck.params.prediction, cfg.embed_dim, "prediction");
            if (ck.params.prediction.back().weight.cols() != cfg.embed_dim) {
                throw FormatError("checkpoint: prediction head output dim differs from embed dim");
            }
            cfg.pred_hidden_dim = ck.params.prediction[0].weight.cols();
        } else {
            cfg.pred_hidden_dim = cfg.embed_dim;
        }
    }

    if (has_opt) {
        std::vector<Matrix> velocity;
        for (std::size_t i = 0; i < 2 * layer_count; ++i) velocity.push_back(read_matrix(in));
        const auto param_list = ck.params.parameter_list();
        for (std::size_t i = 0; i < param_list.size(); ++i) {
            if (!param_list[i]->same_shape(velocity[i])) {
                throw FormatError("checkpoint: velocity " + std::to_string(i) +
                                  " shape does not match its parameter");
            }
        }
        ck.velocity = std::move(velocity);
    }
    return ck;
}

}  // namespace paws
