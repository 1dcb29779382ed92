#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oracle_helpers.hpp"
#include "paws/errors.hpp"
#include "paws/support_sampler.hpp"

using namespace paws;
using namespace paws::testing;

namespace {

LabeledPool small_pool(std::size_t classes, std::size_t per_class, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t total = classes * per_class;
    Matrix inputs = random_matrix(total, 6, rng);
    std::vector<int> labels(total);
    for (std::size_t i = 0; i < total; ++i) labels[i] = static_cast<int>(i % classes);
    return make_labeled_pool(std::move(inputs), std::move(labels), classes);
}

}  // namespace

TEST_CASE("exhaustive draw is a balanced permutation of the pool") {
    const LabeledPool pool = small_pool(4, 5, 1);
    Rng rng(2);
    const SupportDraw draw = sample_support(pool, 4, 5, rng);
    CHECK(draw.indices.size() == 20);
    std::set<std::size_t> unique(draw.indices.begin(), draw.indices.end());
    CHECK(unique.size() == 20);

    std::map<int, int> counts;
    for (std::size_t idx : draw.indices) ++counts[pool.labels[idx]];
    for (const auto& [cls, count] : counts) CHECK(count == 5);
}

TEST_CASE("every draw holds exactly s distinct indices per sampled class") {
    const LabeledPool pool = small_pool(5, 8, 3);
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const SupportDraw draw = sample_support(pool, 3, 4, rng);
        CHECK(draw.indices.size() == 12);
        CHECK(draw.sampled_classes.size() == 3);
        std::set<std::size_t> unique(draw.indices.begin(), draw.indices.end());
        CHECK(unique.size() == 12);
        std::map<int, int> counts;
        for (std::size_t idx : draw.indices) ++counts[pool.labels[idx]];
        CHECK(counts.size() == 3);
        for (const auto& [cls, count] : counts) CHECK(count == 4);
    }
}

TEST_CASE("class frequencies are uniform over many draws with C < K") {
    const LabeledPool pool = small_pool(4, 6, 5);
    Rng rng(6);
    std::vector<int> appearances(4, 0);
    const int draws = 10000;
    for (int trial = 0; trial < draws; ++trial) {
        const SupportDraw draw = sample_support(pool, 2, 2, rng);
        for (int cls : draw.sampled_classes) ++appearances[static_cast<std::size_t>(cls)];
    }
    for (int count : appearances) {
        CHECK(std::abs(count / static_cast<double>(draws) - 0.5) <= 0.02);
    }
}

TEST_CASE("sample_support names the class that is too small") {
    Rng rng(7);
    Matrix inputs = random_matrix(5, 3, rng);
    // class 1 has 2 members, class 0 has 3
    LabeledPool pool = make_labeled_pool(std::move(inputs), {0, 0, 0, 1, 1}, 2);
    CHECK_THROWS_WITH_AS(sample_support(pool, 2, 3, rng), doctest::Contains("class 1"),
                         ConfigError);
    CHECK_THROWS_AS(sample_support(pool, 3, 1, rng), ConfigError);
    CHECK_THROWS_AS(sample_support(pool, 0, 1, rng), ConfigError);
}

TEST_CASE("same sampler seed reproduces the draw sequence") {
    const LabeledPool pool = small_pool(4, 6, 8);
    Rng a(9), b(9);
    for (int trial = 0; trial < 10; ++trial) {
        const SupportDraw da = sample_support(pool, 3, 2, a);
        const SupportDraw db = sample_support(pool, 3, 2, b);
        CHECK(da.indices == db.indices);
        CHECK(da.sampled_classes == db.sampled_classes);
    }
}

TEST_CASE("encode_labels smoothing and row sums") {
    const LabeledPool pool = small_pool(4, 3, 10);
    Rng rng(11);
    const SupportDraw draw = sample_support(pool, 4, 2, rng);

    const Matrix hard = encode_labels(draw, pool, 4, 0.0);
    for (std::size_t i = 0; i < hard.rows(); ++i) {
        const int cls = pool.labels[draw.indices[i]];
        CHECK(hard(i, static_cast<std::size_t>(cls)) == 1.0);
    }

    const Matrix soft = encode_labels(draw, pool, 4, 0.1);
    for (std::size_t i = 0; i < soft.rows(); ++i) {
        const int cls = pool.labels[draw.indices[i]];
        double sum = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            sum += soft(i, j);
            if (j == static_cast<std::size_t>(cls)) {
                CHECK(soft(i, j) == doctest::Approx(0.925).epsilon(1e-15));
            } else {
                CHECK(soft(i, j) == doctest::Approx(0.025).epsilon(1e-15));
            }
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(encode_labels(draw, pool, 4, 1.0), DomainError);
}

TEST_CASE("support_views: identity augmentation keeps inputs, v = 2 doubles them") {
    const LabeledPool pool = small_pool(3, 4, 12);
    Rng rng(13);
    const SupportDraw draw = sample_support(pool, 3, 2, rng);

    AugmentConfig identity;  // sigma 0, jitter (1,1)
    Rng view_rng(14);
    const SupportViews v1 = support_views(pool, draw, identity, 1, 0.0, view_rng);
    CHECK(v1.inputs.rows() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < pool.inputs.cols(); ++j) {
            CHECK(v1.inputs(i, j) == pool.inputs(draw.indices[i], j));
        }
    }

    Rng view_rng2(14);
    const SupportViews v2 = support_views(pool, draw, identity, 2, 0.1, view_rng2);
    CHECK(v2.inputs.rows() == 12);
    CHECK(v2.labels.rows() == 12);
    // labels repeat in matching order across the two view blocks
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(v2.labels(i, j) == v2.labels(6 + i, j));
        }
    }
    // per-class balance became v * s
    std::map<int, int> counts;
    for (std::size_t i = 0; i < 12; ++i) {
        ++counts[pool.labels[draw.indices[i % 6]]];
    }
    for (const auto& [cls, count] : counts) CHECK(count == 4);
}
