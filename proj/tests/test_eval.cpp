#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle_helpers.hpp"
#include "paws/encoder.hpp"
#include "paws/errors.hpp"
#include "paws/eval.hpp"

using namespace paws;
using namespace paws::testing;

namespace {

// Independent soft nearest-neighbor oracle: per-query loops, own cosine and
// softmax arithmetic, same tie rule (lowest class index).
std::vector<int> soft_nn_reference(const Matrix& queries, const Matrix& support,
                                   const std::vector<int>& labels, std::size_t num_classes,
                                   double tau) {
    std::vector<int> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        double qn = 0.0;
        for (std::size_t c = 0; c < queries.cols(); ++c) qn += queries(i, c) * queries(i, c);
        qn = std::max(std::sqrt(qn), 1e-12);
        std::vector<double> logits(support.rows());
        double top = -1e300;
        for (std::size_t j = 0; j < support.rows(); ++j) {
            double sn = 0.0, dot = 0.0;
            for (std::size_t c = 0; c < queries.cols(); ++c) {
                sn += support(j, c) * support(j, c);
                dot += queries(i, c) * support(j, c);
            }
            sn = std::max(std::sqrt(sn), 1e-12);
            logits[j] = dot / (qn * sn * tau);
            top = std::max(top, logits[j]);
        }
        double denom = 0.0;
        for (double& l : logits) {
            l = std::exp(l - top);
            denom += l;
        }
        std::vector<double> probs(num_classes, 0.0);
        for (std::size_t j = 0; j < support.rows(); ++j) {
            probs[static_cast<std::size_t>(labels[j])] += logits[j] / denom;
        }
        int best = 0;
        for (std::size_t k = 1; k < num_classes; ++k) {
            if (probs[k] > probs[best]) best = static_cast<int>(k);
        }
        out[i] = best;
    }
    return out;
}

}  // namespace

TEST_CASE("soft-NN classifier agrees with the independent oracle on every point") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix queries = random_matrix(40, 6, rng);
        const Matrix support = random_matrix(12, 6, rng);
        std::vector<int> labels(12);
        for (int j = 0; j < 12; ++j) labels[j] = j % 3;
        const auto result = soft_nn_classify(queries, support, labels, 3, 0.1);
        const auto expected = soft_nn_reference(queries, support, labels, 3, 0.1);
        CHECK(result.predicted == expected);
    }
}

TEST_CASE("a query sitting on a support point takes its class at small tau") {
    Rng rng(5);
    const Matrix support = random_matrix(8, 4, rng);
    std::vector<int> labels = {0, 1, 2, 3, 0, 1, 2, 3};
    Matrix query(1, 4);
    for (std::size_t c = 0; c < 4; ++c) query(0, c) = support(5, c);
    const auto result = soft_nn_classify(query, support, labels, 4, 0.01);
    CHECK(result.predicted[0] == 1);
}

TEST_CASE("exact probability ties resolve to the lowest class index") {
    // query equidistant from two support points of different classes
    const Matrix support = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
    const Matrix query = Matrix::from_rows({{1.0, 1.0}});
    const auto result = soft_nn_classify(query, support, {1, 0}, 3, 0.1);
    CHECK(result.probabilities(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(result.probabilities(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(result.probabilities(0, 2) == 0.0);
    CHECK(result.predicted[0] == 0);
}

TEST_CASE("eval_nn with a passthrough encoder equals raw-feature soft-NN") {
    Rng rng(7);
    const Matrix pool_inputs = random_matrix(20, 5, rng);
    const Matrix test_inputs = random_matrix(30, 5, rng);
    std::vector<int> pool_labels(20);
    std::vector<int> test_labels(30);
    for (int i = 0; i < 20; ++i) pool_labels[i] = i % 4;
    for (int i = 0; i < 30; ++i) test_labels[i] = i % 4;

    EncoderConfig cfg;
    cfg.input_dim = 5;
    cfg.passthrough = true;
    const EncoderParams params = init_params(cfg, 0);
    const double via_eval =
        eval_nn(params, pool_inputs, pool_labels, 4, test_inputs, test_labels, 0.1);
    const auto raw = soft_nn_classify(test_inputs, pool_inputs, pool_labels, 4, 0.1);
    CHECK(via_eval == doctest::Approx(accuracy(raw.predicted, test_labels)).epsilon(1e-15));
}

TEST_CASE("eval_nn rejects dimension mismatches as format errors") {
    EncoderConfig cfg;
    cfg.input_dim = 5;
    cfg.passthrough = true;
    const EncoderParams params = init_params(cfg, 0);
    const Matrix pool(4, 5);
    const Matrix test(4, 6);
    CHECK_THROWS_AS(eval_nn(params, pool, {0, 1, 0, 1}, 2, test, {0, 1, 0, 1}, 0.1), FormatError);
}

TEST_CASE("hard 1-NN baseline and accuracy helpers") {
    const Matrix reference = Matrix::from_rows({{0, 0}, {10, 10}});
    const Matrix queries = Matrix::from_rows({{1, 1}, {9, 9}, {4, 4}});
    const auto predicted = nearest_neighbor_classify(queries, reference, {0, 1});
    CHECK(predicted == std::vector<int>{0, 1, 0});
    CHECK(accuracy({0, 1, 0}, {0, 1, 1}) == doctest::Approx(2.0 / 3));
    CHECK_THROWS_AS(accuracy({0}, {0, 1}), ShapeError);
}
