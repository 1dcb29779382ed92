#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "paws/encoder.hpp"
#include "paws/errors.hpp"
#include "paws/grad_check.hpp"

using namespace paws;
using namespace paws::testing;

namespace {

EncoderConfig tiny_config() {
    EncoderConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden_dim = 6;
    cfg.trunk_layers = 2;
    cfg.proj_hidden_dim = 6;
    cfg.embed_dim = 4;
    return cfg;
}

}  // namespace

TEST_CASE("init_params is deterministic per seed and Glorot-bounded") {
    const EncoderConfig cfg = tiny_config();
    const EncoderParams a = init_params(cfg, 11);
    const EncoderParams b = init_params(cfg, 11);
    const EncoderParams c = init_params(cfg, 12);

    const auto pa = a.parameter_list();
    const auto pb = b.parameter_list();
    const auto pc = c.parameter_list();
    bool all_equal_ab = true, any_diff_ac = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (max_abs_diff(*pa[i], *pb[i]) != 0.0) all_equal_ab = false;
        if (max_abs_diff(*pa[i], *pc[i]) != 0.0) any_diff_ac = true;
    }
    CHECK(all_equal_ab);
    CHECK(any_diff_ac);

    for (const LinearLayer& l : a.trunk) {
        const double bound =
            std::sqrt(6.0 / static_cast<double>(l.weight.rows() + l.weight.cols()));
        CHECK(max_abs(l.weight) <= bound);
        CHECK(max_abs(l.bias) == 0.0);
    }
    CHECK(a.projection.size() == 3);
    CHECK(a.prediction.empty());
}

TEST_CASE("zero parameters collapse every input to zero rows") {
    EncoderParams params = init_params(tiny_config(), 0);
    for (Matrix* m : params.parameter_list()) fill(*m, 0.0);
    Rng rng(3);
    const Matrix x = random_matrix(7, 5, rng);
    const Matrix z = encode_values(params, x);
    CHECK(max_abs(z) == 0.0);
}

TEST_CASE("identity layers reproduce positive inputs") {
    EncoderConfig cfg;
    cfg.input_dim = 2;
    cfg.hidden_dim = 2;
    cfg.trunk_layers = 1;
    cfg.proj_hidden_dim = 2;
    cfg.embed_dim = 2;
    EncoderParams params = init_params(cfg, 0);
    for (LinearLayer* l : {&params.trunk[0], &params.projection[0], &params.projection[1],
                           &params.projection[2]}) {
        l->weight = Matrix::identity(2);
        fill(l->bias, 0.0);
    }
    const Matrix x = Matrix::from_rows({{0.3, 1.7}, {2.0, 0.1}});
    CHECK(max_abs_diff(encode_values(params, x), x) == 0.0);
}

TEST_CASE("tape encode matches the value-level forward bitwise") {
    const EncoderParams params = init_params(tiny_config(), 5);
    Rng rng(5);
    const Matrix x = random_matrix(6, 5, rng);
    ad::Tape tape;
    EncoderGraph enc(tape, params);
    CHECK(max_abs_diff(enc.encode(x).value(), encode_values(params, x)) == 0.0);
    CHECK(max_abs_diff(enc.encode_first_projection(x).value(),
                       first_projection_values(params, x)) == 0.0);
}

TEST_CASE("encode rejects wrong input width") {
    const EncoderParams params = init_params(tiny_config(), 1);
    CHECK_THROWS_AS(encode_values(params, Matrix(2, 4)), ShapeError);
    ad::Tape tape;
    EncoderGraph enc(tape, params);
    CHECK_THROWS_AS(enc.encode(Matrix(2, 4)), ShapeError);
}

TEST_CASE("gradients of mean(encode(x)) pass the finite-difference check") {
    EncoderConfig cfg = tiny_config();
    cfg.trunk_layers = 1;  // keep the FD sweep quick
    EncoderParams params = init_params(cfg, 9);
    Rng rng(9);
    // nonzero biases keep ReLU preactivations off exact kinks for the oracle
    for (Matrix* m : params.parameter_list()) {
        if (m->rows() == 1) {
            for (double& v : m->data()) v = 0.05 + 0.2 * rng.uniform();
        }
    }
    const Matrix x = random_matrix(4, 5, rng);

    std::vector<Matrix> leaves;
    for (const Matrix* m : std::as_const(params).parameter_list()) leaves.push_back(*m);
    const auto build = [&cfg, &x](ad::Tape& tape, const std::vector<ad::Var>& p) {
        ad::Var h = tape.constant(x);
        std::size_t i = 0;
        for (std::size_t t = 0; t < cfg.trunk_layers; ++t, i += 2) {
            h = ad::relu(ad::add_rowvec(ad::matmul(h, p[i]), p[i + 1]));
        }
        for (std::size_t l = 0; l < 3; ++l, i += 2) {
            h = ad::add_rowvec(ad::matmul(h, p[i]), p[i + 1]);
            if (l < 2) h = ad::relu(h);
        }
        return ad::mean_all(h);
    };
    const auto report = ad::grad_check(build, leaves, 1e-5, 1e-4);
    CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("prediction head: pass-through, constant output, config error") {
    EncoderConfig cfg = tiny_config();
    cfg.prediction_head = true;
    cfg.pred_hidden_dim = 4;
    const EncoderParams with_head = init_params(cfg, 2);
    CHECK(with_head.prediction.size() == 2);

    Rng rng(2);
    const Matrix x = random_matrix(3, 5, rng);
    ad::Tape tape;
    EncoderGraph enc(tape, with_head);
    ad::Var z = enc.encode(x);

    // disabled: the very same node comes back
    ad::Var same = enc.predict_head(z, false);
    CHECK(max_abs_diff(same.value(), z.value()) == 0.0);

    // enabled: output shape [n x d], generally different values
    ad::Var q = enc.predict_head(z, true);
    CHECK(q.rows() == z.rows());
    CHECK(q.cols() == z.cols());
    CHECK(max_abs_diff(q.value(), z.value()) > 0.0);

    // zero final layer: constant rows
    EncoderParams zeroed = with_head;
    fill(zeroed.prediction[1].weight, 0.0);
    fill(zeroed.prediction[1].bias, 0.0);
    ad::Tape tape2;
    EncoderGraph enc2(tape2, zeroed);
    const Matrix qv = enc2.predict_head(enc2.encode(x), true).value();
    CHECK(max_abs(qv) == 0.0);

    // head requested but absent
    const EncoderParams no_head = init_params(tiny_config(), 2);
    ad::Tape tape3;
    EncoderGraph enc3(tape3, no_head);
    CHECK_THROWS_AS(enc3.predict_head(enc3.encode(x), true), ConfigError);
}

TEST_CASE("passthrough encoder returns raw inputs") {
    EncoderConfig cfg;
    cfg.input_dim = 3;
    cfg.passthrough = true;
    const EncoderParams params = init_params(cfg, 0);
    CHECK(params.parameter_list().empty());
    const Matrix x = Matrix::from_rows({{1, 2, 3}});
    CHECK(max_abs_diff(encode_values(params, x), x) == 0.0);
    CHECK(params.embed_dim() == 3);
}

TEST_CASE("init_params rejects degenerate dimensions") {
    EncoderConfig cfg = tiny_config();
    cfg.hidden_dim = 0;
    CHECK_THROWS_AS(init_params(cfg, 0), ConfigError);
}
