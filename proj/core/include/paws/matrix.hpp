#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "paws/errors.hpp"

namespace paws {

/// Dense row-major matrix of 64-bit floats. The universal value type of the
/// library: parameters, representations, labels and gradients are all Matrix.
/// Values are cheap to move and safe to share across threads once built.
class Matrix {
   public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);
    static Matrix row_vector(std::initializer_list<double> entries);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Throws ShapeError naming both shapes when they differ. `what` names the operation.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);
std::string shape_string(const Matrix& m);

// ---- plain value-level math (shared by autodiff ops, evaluation and tests) ----

Matrix matmul(const Matrix& a, const Matrix& b);
// a * transpose(b) without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// transpose(a) * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
void add_in_place(Matrix& target, const Matrix& delta);
void add_scaled_in_place(Matrix& target, const Matrix& delta, double c);
void fill(Matrix& m, double value);

// Each row divided by max(l2norm(row), epsilon).
Matrix row_l2_normalize(const Matrix& a, double epsilon = 1e-12);
// Row-wise softmax with temperature, computed with max-subtraction.
Matrix softmax_rows(const Matrix& a, double temperature);

double sum(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double mean(const Matrix& a);
bool all_finite(const Matrix& a);

// Mean of all rows: [n x c] -> [1 x c].
Matrix mean_of_rows(const Matrix& a);

// Shannon entropy -sum p log p of a single distribution stored as [1 x K],
// with 0 log 0 treated as 0.
double entropy(const Matrix& distribution);

}  // namespace paws
