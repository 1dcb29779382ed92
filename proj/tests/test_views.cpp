#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "paws/errors.hpp"
#include "paws/views.hpp"

using namespace paws;
using namespace paws::testing;

TEST_CASE("identity augmentation reproduces the source exactly") {
    Rng data_rng(1);
    const Matrix x = random_matrix(5, 8, data_rng);
    AugmentConfig identity;
    Rng rng(2);
    const ViewBatch batch = generate_views(x, identity, 2, 3, rng);
    CHECK(batch.global_views.size() == 2);
    CHECK(batch.local_views.size() == 3);
    for (const Matrix& v : batch.global_views) CHECK(max_abs_diff(v, x) == 0.0);
    // identity config still masks nothing only when mask_fraction is 0
    AugmentConfig no_mask = identity;
    no_mask.mask_fraction_local = 0.0;
    Rng rng2(2);
    const ViewBatch clean = generate_views(x, no_mask, 2, 3, rng2);
    for (const Matrix& v : clean.local_views) CHECK(max_abs_diff(v, x) == 0.0);
}

TEST_CASE("local views zero exactly the configured fraction of coordinates") {
    Rng data_rng(3);
    const Matrix x = random_positive_matrix(6, 16, data_rng);
    AugmentConfig cfg;
    cfg.mask_fraction_local = 0.5;
    Rng rng(4);
    const ViewBatch batch = generate_views(x, cfg, 2, 4, rng);
    for (const Matrix& v : batch.local_views) {
        for (std::size_t i = 0; i < v.rows(); ++i) {
            int zeros = 0;
            for (std::size_t j = 0; j < v.cols(); ++j) {
                if (v(i, j) == 0.0) ++zeros;
            }
            CHECK(zeros == 8);
        }
    }
}

TEST_CASE("same seed gives an identical ViewBatch") {
    Rng data_rng(5);
    const Matrix x = random_matrix(7, 10, data_rng);
    AugmentConfig cfg;
    cfg.noise_sigma = 0.3;
    cfg.scale_jitter_low = 0.8;
    cfg.scale_jitter_high = 1.2;
    Rng r1(6), r2(6);
    const ViewBatch a = generate_views(x, cfg, 2, 6, r1);
    const ViewBatch b = generate_views(x, cfg, 2, 6, r2);
    for (std::size_t k = 0; k < a.global_views.size(); ++k) {
        CHECK(max_abs_diff(a.global_views[k], b.global_views[k]) == 0.0);
    }
    for (std::size_t k = 0; k < a.local_views.size(); ++k) {
        CHECK(max_abs_diff(a.local_views[k], b.local_views[k]) == 0.0);
    }
}

TEST_CASE("rows never mix: view row i depends only on source row i") {
    Rng data_rng(7);
    Matrix x = random_matrix(4, 6, data_rng);
    AugmentConfig cfg;
    cfg.noise_sigma = 0.2;
    cfg.scale_jitter_low = 0.9;
    cfg.scale_jitter_high = 1.1;

    Rng r1(8);
    const ViewBatch before = generate_views(x, cfg, 2, 2, r1);
    x(2, 3) += 100.0;  // poke one row
    Rng r2(8);
    const ViewBatch after = generate_views(x, cfg, 2, 2, r2);
    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t i = 0; i < 4; ++i) {
            if (i == 2) continue;
            for (std::size_t j = 0; j < 6; ++j) {
                CHECK(before.global_views[k](i, j) == after.global_views[k](i, j));
                CHECK(before.local_views[k](i, j) == after.local_views[k](i, j));
            }
        }
    }
}

TEST_CASE("pair structure: globals are mutual targets, locals target both globals") {
    Rng data_rng(9);
    const Matrix x = random_matrix(3, 4, data_rng);
    AugmentConfig cfg;
    Rng rng(10);

    const ViewBatch two = generate_views(x, cfg, 2, 0, rng);
    const auto pairs2 = pair_structure(two);
    CHECK(pairs2.size() == 2);
    CHECK(pairs2[0] == std::vector<std::size_t>{1});
    CHECK(pairs2[1] == std::vector<std::size_t>{0});

    const ViewBatch multi = generate_views(x, cfg, 2, 6, rng);
    const auto pairs = pair_structure(multi);
    CHECK(pairs.size() == 8);
    for (std::size_t l = 2; l < 8; ++l) {
        CHECK(pairs[l] == std::vector<std::size_t>{0, 1});
    }
    // locals never appear in any target list
    for (const auto& targets : pairs) {
        for (std::size_t t : targets) CHECK(t < 2);
    }

    ViewBatch three = multi;
    three.global_views.push_back(three.global_views[0]);
    CHECK_THROWS_AS(pair_structure(three), ConfigError);
}

TEST_CASE("grid mode keeps a contiguous window and zeroes the rest") {
    AugmentConfig cfg;
    cfg.grid_rows = 4;
    cfg.grid_cols = 4;
    cfg.window_fraction = 0.5;
    Matrix x(2, 16, 1.0);
    Rng rng(11);
    const Matrix local = augment_local(x, cfg, rng);
    for (std::size_t i = 0; i < 2; ++i) {
        // exactly a 2x2 window survives
        int nonzero = 0;
        for (std::size_t j = 0; j < 16; ++j) {
            if (local(i, j) != 0.0) ++nonzero;
        }
        CHECK(nonzero == 4);
        // and it is contiguous: find the top-left surviving cell
        std::size_t first = 0;
        while (first < 16 && local(i, first) == 0.0) ++first;
        const std::size_t top = first / 4, left = first % 4;
        for (std::size_t gr = 0; gr < 4; ++gr) {
            for (std::size_t gc = 0; gc < 4; ++gc) {
                const bool inside = gr >= top && gr < top + 2 && gc >= left && gc < left + 2;
                CHECK((local(i, gr * 4 + gc) != 0.0) == inside);
            }
        }
    }
}

TEST_CASE("invalid augment configs are rejected") {
    AugmentConfig cfg;
    cfg.scale_jitter_low = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = AugmentConfig{};
    cfg.mask_fraction_local = 1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = AugmentConfig{};
    Rng rng(12);
    const Matrix x(2, 4, 1.0);
    CHECK_THROWS_AS(generate_views(x, cfg, 1, 0, rng), DomainError);
}
