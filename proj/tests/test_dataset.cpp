#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

#include "paws/dataset.hpp"
#include "paws/errors.hpp"

using namespace paws;

namespace {

// Brute-force 1-NN, written locally so the dataset check does not lean on the
// production classifier.
double one_nn_accuracy(const Matrix& train, const std::vector<int>& train_labels,
                       const Matrix& test, const std::vector<int>& test_labels) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_label = -1;
        for (std::size_t j = 0; j < train.rows(); ++j) {
            double d = 0.0;
            for (std::size_t c = 0; c < test.cols(); ++c) {
                const double diff = test(i, c) - train(j, c);
                d += diff * diff;
            }
            if (d < best) {
                best = d;
                best_label = train_labels[j];
            }
        }
        if (best_label == test_labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test.rows());
}

}  // namespace

TEST_CASE("well-separated blobs are almost perfectly 1-NN classifiable") {
    const Dataset data = make_blobs(4, 100, 16, 10.0, 0);
    CHECK(data.train_inputs.rows() == 320);
    CHECK(data.test_inputs.rows() == 80);
    const double acc = one_nn_accuracy(data.train_inputs, data.train_labels, data.test_inputs,
                                       data.test_labels);
    CHECK(acc > 0.99);
}

TEST_CASE("zero separation gives chance-level 1-NN accuracy") {
    const Dataset data = make_blobs(4, 100, 16, 0.0, 1);
    const double acc = one_nn_accuracy(data.train_inputs, data.train_labels, data.test_inputs,
                                       data.test_labels);
    CHECK(acc < 0.45);  // 1/K = 0.25 plus sampling noise
}

TEST_CASE("datasets are deterministic per seed") {
    const Dataset a = make_blobs(3, 50, 8, 5.0, 7);
    const Dataset b = make_blobs(3, 50, 8, 5.0, 7);
    const Dataset c = make_blobs(3, 50, 8, 5.0, 8);
    CHECK(max_abs_diff(a.train_inputs, b.train_inputs) == 0.0);
    CHECK(max_abs_diff(a.test_inputs, b.test_inputs) == 0.0);
    CHECK(a.train_labels == b.train_labels);
    CHECK(max_abs_diff(a.train_inputs, c.train_inputs) > 0.0);
}

TEST_CASE("split is stratified 80/20 per class") {
    const Dataset data = make_blobs(4, 50, 8, 6.0, 3);
    std::map<int, int> train_counts, test_counts;
    for (int l : data.train_labels) ++train_counts[l];
    for (int l : data.test_labels) ++test_counts[l];
    for (int c = 0; c < 4; ++c) {
        CHECK(train_counts[c] == 40);
        CHECK(test_counts[c] == 10);
    }
}

TEST_CASE("infeasible direction geometry is rejected") {
    CHECK_THROWS_AS(make_blobs(3, 10, 1, 5.0, 0), ConfigError);
    CHECK_THROWS_AS(make_blobs(1, 10, 4, 5.0, 0), ConfigError);
}

TEST_CASE("labeled pool selection is balanced and reproducible") {
    const Dataset data = make_blobs(4, 1250, 16, 6.0, 0);
    CHECK(data.train_inputs.rows() == 4000);
    const LabeledPool pool = select_labeled_pool(data, 40, 0);
    CHECK(pool.size() == 40);
    for (const auto& members : pool.class_indices) CHECK(members.size() == 10);
    // source_rows point back at the train split
    for (std::size_t i = 0; i < pool.size(); ++i) {
        CHECK(pool.labels[i] == data.train_labels[pool.source_rows[i]]);
        for (std::size_t j = 0; j < data.input_dim; ++j) {
            CHECK(pool.inputs(i, j) == data.train_inputs(pool.source_rows[i], j));
        }
    }
    const LabeledPool again = select_labeled_pool(data, 40, 0);
    CHECK(pool.source_rows == again.source_rows);

    // fractional budget
    const LabeledPool frac = select_labeled_pool(data, 0.01, 0);
    CHECK(frac.size() == 40);

    CHECK_THROWS_AS(select_labeled_pool(data, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(select_labeled_pool(data, 5000, 0), ConfigError);
}

TEST_CASE("tiny grid dataset is deterministic and separable at low noise") {
    const Dataset a = make_tiny_grid(4, 40, 5, 0.1, 2);
    const Dataset b = make_tiny_grid(4, 40, 5, 0.1, 2);
    CHECK(a.input_dim == 25);
    CHECK(max_abs_diff(a.train_inputs, b.train_inputs) == 0.0);
    const double acc = one_nn_accuracy(a.train_inputs, a.train_labels, a.test_inputs,
                                       a.test_labels);
    CHECK(acc > 0.95);
}
