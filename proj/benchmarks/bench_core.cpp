#include <benchmark/benchmark.h>

#include "paws/encoder.hpp"
#include "paws/eval.hpp"
#include "paws/matrix.hpp"
#include "paws/objective.hpp"
#include "paws/rng.hpp"
#include "paws/tape.hpp"

namespace {

paws::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    paws::Rng rng(seed);
    paws::Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

void BM_matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const paws::Matrix a = random_matrix(n, n, 1);
    const paws::Matrix b = random_matrix(n, n, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(paws::matmul(a, b));
    }
    state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_encoder_forward(benchmark::State& state) {
    paws::EncoderConfig cfg;
    const paws::EncoderParams params = paws::init_params(cfg, 0);
    const paws::Matrix x = random_matrix(64, cfg.input_dim, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(paws::encode_values(params, x));
    }
}
BENCHMARK(BM_encoder_forward);

void BM_encoder_forward_backward(benchmark::State& state) {
    paws::EncoderConfig cfg;
    const paws::EncoderParams params = paws::init_params(cfg, 0);
    const paws::Matrix x = random_matrix(64, cfg.input_dim, 4);
    for (auto _ : state) {
        paws::ad::Tape tape;
        paws::EncoderGraph enc(tape, params);
        paws::ad::Var loss = paws::ad::mean_all(enc.encode(x));
        tape.backward(loss);
        benchmark::DoNotOptimize(enc.gradients());
    }
}
BENCHMARK(BM_encoder_forward_backward);

void BM_multicrop_loss_step(benchmark::State& state) {
    paws::EncoderConfig cfg;
    const paws::EncoderParams params = paws::init_params(cfg, 0);
    const paws::Matrix batch = random_matrix(64, cfg.input_dim, 5);
    const paws::Matrix support_x = random_matrix(32, cfg.input_dim, 6);
    std::vector<int> support_labels(32);
    for (int i = 0; i < 32; ++i) support_labels[i] = i / 8;
    const paws::Matrix y_s = paws::smooth_one_hot(support_labels, 4, 0.1);

    for (auto _ : state) {
        paws::ad::Tape tape;
        paws::EncoderGraph enc(tape, params);
        paws::SupportBatch support;
        support.z_s = enc.encode(support_x);
        support.y_s = y_s;
        support.classes_present = 4;
        support.per_class_count = 8;
        std::array<paws::ad::Var, 2> globals = {
            paws::similarity_classifier(enc.encode(batch), support, 0.1).p,
            paws::similarity_classifier(enc.encode(batch), support, 0.1).p};
        std::vector<paws::ad::Var> locals;
        for (int l = 0; l < 6; ++l) {
            locals.push_back(paws::similarity_classifier(enc.encode(batch), support, 0.1).p);
        }
        paws::LossOptions options;
        auto loss = paws::paws_loss_multicrop(globals, locals, options);
        tape.backward(loss.total);
        benchmark::DoNotOptimize(enc.gradients());
    }
}
BENCHMARK(BM_multicrop_loss_step);

void BM_soft_nn_eval(benchmark::State& state) {
    const paws::Matrix queries = random_matrix(1000, 32, 7);
    const paws::Matrix support = random_matrix(40, 32, 8);
    std::vector<int> labels(40);
    for (int i = 0; i < 40; ++i) labels[i] = i % 4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(paws::soft_nn_classify(queries, support, labels, 4, 0.1));
    }
}
BENCHMARK(BM_soft_nn_eval);

}  // namespace

BENCHMARK_MAIN();
