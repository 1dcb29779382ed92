#include <doctest.h>

#include <cmath>

#include "paws/matrix.hpp"
#include "paws/rng.hpp"

using namespace paws;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

// Triple-loop reference, deliberately independent of the production loop order.
Matrix matmul_reference(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < a.cols(); ++l) s += a(i, l) * b(l, j);
            out(i, j) = s;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("matmul identity and reference agreement") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix r = matmul(a, Matrix::identity(2));
    CHECK(max_abs_diff(r, a) == 0.0);

    Rng rng(7);
    const Matrix x = random_matrix(5, 7, rng);
    const Matrix y = random_matrix(7, 3, rng);
    CHECK(max_abs_diff(matmul(x, y), matmul_reference(x, y)) < 1e-12);
    CHECK(max_abs_diff(matmul_nt(x, transpose(y)), matmul_reference(x, y)) < 1e-12);
    CHECK(max_abs_diff(matmul_tn(transpose(x), y), matmul_reference(x, y)) < 1e-12);
}

TEST_CASE("matmul orthogonal row/column vectors") {
    const Matrix a = Matrix::from_rows({{1, 0}});
    const Matrix b = Matrix::from_rows({{0}, {1}});
    const Matrix r = matmul(a, b);
    CHECK(r.rows() == 1);
    CHECK(r.cols() == 1);
    CHECK(r(0, 0) == 0.0);
}

TEST_CASE("matmul shape errors name both shapes") {
    const Matrix a(2, 3);
    const Matrix b(2, 3);
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), ShapeError);
}

TEST_CASE("row_l2_normalize basics") {
    const Matrix a = Matrix::from_rows({{3, 4}});
    const Matrix n = row_l2_normalize(a);
    CHECK(n(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(n(0, 1) == doctest::Approx(0.8).epsilon(1e-12));

    // already unit norm: unchanged
    const Matrix u = Matrix::from_rows({{0.6, 0.8}});
    CHECK(max_abs_diff(row_l2_normalize(u), u) < 1e-15);

    // zero row stays zero under the epsilon guard
    const Matrix z(1, 4);
    CHECK(max_abs(row_l2_normalize(z)) == 0.0);
}

TEST_CASE("softmax_rows properties") {
    Rng rng(3);
    const Matrix x = random_matrix(6, 5, rng);
    const Matrix p = softmax_rows(x, 0.37);
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) {
            CHECK(p(i, j) > 0.0);
            s += p(i, j);
        }
        CHECK(std::abs(s - 1.0) < 1e-12);
    }

    // constant row -> uniform for any temperature
    const Matrix c(2, 3, 4.2);
    const Matrix u = softmax_rows(c, 0.1);
    for (double v : u.data()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-14));

    // direct formula check
    const Matrix row = Matrix::from_rows({{1, 0}});
    const Matrix q = softmax_rows(row, 1.0);
    const double e = std::exp(1.0);
    CHECK(q(0, 0) == doctest::Approx(e / (e + 1)).epsilon(1e-12));
    CHECK(q(0, 1) == doctest::Approx(1 / (e + 1)).epsilon(1e-12));

    CHECK_THROWS_AS(softmax_rows(row, 0.0), DomainError);
    CHECK_THROWS_AS(softmax_rows(row, -1.0), DomainError);
}

TEST_CASE("softmax_rows is stable for extreme inputs") {
    const Matrix big = Matrix::from_rows({{1e6, -1e6, 0.0}});
    const Matrix p = softmax_rows(big, 0.1);
    CHECK(all_finite(p));
    CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mean_of_rows and entropy") {
    const Matrix m = Matrix::from_rows({{1, 3}, {3, 5}});
    const Matrix avg = mean_of_rows(m);
    CHECK(avg(0, 0) == doctest::Approx(2.0));
    CHECK(avg(0, 1) == doctest::Approx(4.0));

    const Matrix uniform = Matrix::row_vector({0.25, 0.25, 0.25, 0.25});
    CHECK(entropy(uniform) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
    const Matrix onehot = Matrix::row_vector({1.0, 0.0});
    CHECK(entropy(onehot) == 0.0);
}

TEST_CASE("elementwise helpers") {
    Rng rng(11);
    const Matrix a = random_matrix(3, 4, rng);
    const Matrix b = random_matrix(3, 4, rng);
    CHECK(max_abs_diff(subtract(add(a, b), b), a) < 1e-12);
    const Matrix h = hadamard(a, b);
    CHECK(h(1, 2) == doctest::Approx(a(1, 2) * b(1, 2)));
    CHECK(frobenius_norm(Matrix(2, 2, 0.5)) == doctest::Approx(1.0));
}
