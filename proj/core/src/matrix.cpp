#include "paws/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace paws {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix out(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw ShapeError("from_rows: ragged initializer, row " + std::to_string(i) + " has " +
                             std::to_string(row.size()) + " entries, expected " + std::to_string(c));
        }
        std::copy(row.begin(), row.end(), out.row_ptr(i));
        ++i;
    }
    return out;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

Matrix Matrix::row_vector(std::initializer_list<double> entries) {
    Matrix out(1, entries.size());
    std::copy(entries.begin(), entries.end(), out.row_ptr(0));
    return out;
}

std::string shape_string(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions disagree, " + shape_string(a) + " times " +
                         shape_string(b));
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* orow = out.row_ptr(i);
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            const double* brow = b.row_ptr(l);
            for (std::size_t j = 0; j < m; ++j) orow[j] += ail * brow[j];
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_nt: inner dimensions disagree, " + shape_string(a) +
                         " times transpose of " + shape_string(b));
    }
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row_ptr(j);
            double s = 0.0;
            for (std::size_t l = 0; l < a.cols(); ++l) s += arow[l] * brow[l];
            out(i, j) = s;
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_tn: inner dimensions disagree, transpose of " + shape_string(a) +
                         " times " + shape_string(b));
    }
    Matrix out(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        const double* brow = b.row_ptr(i);
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double ail = arow[l];
            if (ail == 0.0) continue;
            double* orow = out.row_ptr(l);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += ail * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "subtract");
    Matrix out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bd[i];
    return out;
}

Matrix scale(const Matrix& a, double c) {
    Matrix out = a;
    for (double& v : out.data()) v *= c;
    return out;
}

void add_in_place(Matrix& target, const Matrix& delta) {
    require_same_shape(target, delta, "add_in_place");
    auto t = target.data();
    auto d = delta.data();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += d[i];
}

void add_scaled_in_place(Matrix& target, const Matrix& delta, double c) {
    require_same_shape(target, delta, "add_scaled_in_place");
    auto t = target.data();
    auto d = delta.data();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += c * d[i];
}

void fill(Matrix& m, double value) {
    for (double& v : m.data()) v = value;
}

Matrix row_l2_normalize(const Matrix& a, double epsilon) {
    Matrix out = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        const double* r = a.row_ptr(i);
        for (std::size_t j = 0; j < a.cols(); ++j) s += r[j] * r[j];
        const double norm = std::max(std::sqrt(s), epsilon);
        double* o = out.row_ptr(i);
        for (std::size_t j = 0; j < a.cols(); ++j) o[j] /= norm;
    }
    return out;
}

Matrix softmax_rows(const Matrix& a, double temperature) {
    if (temperature <= 0.0) {
        throw DomainError("softmax_rows: temperature must be positive, got " +
                          std::to_string(temperature));
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* r = a.row_ptr(i);
        double top = r[0];
        for (std::size_t j = 1; j < a.cols(); ++j) top = std::max(top, r[j]);
        double* o = out.row_ptr(i);
        double denom = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            o[j] = std::exp((r[j] - top) / temperature);
            denom += o[j];
        }
        for (std::size_t j = 0; j < a.cols(); ++j) o[j] /= denom;
    }
    return out;
}

double sum(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v;
    return s;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < ad.size(); ++i) m = std::max(m, std::abs(ad[i] - bd[i]));
    return m;
}

double mean(const Matrix& a) {
    return a.size() == 0 ? 0.0 : sum(a) / static_cast<double>(a.size());
}

bool all_finite(const Matrix& a) {
    for (double v : a.data())
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix mean_of_rows(const Matrix& a) {
    Matrix out(1, a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* r = a.row_ptr(i);
        for (std::size_t j = 0; j < a.cols(); ++j) out(0, j) += r[j];
    }
    const double inv = a.rows() == 0 ? 0.0 : 1.0 / static_cast<double>(a.rows());
    for (double& v : out.data()) v *= inv;
    return out;
}

double entropy(const Matrix& distribution) {
    double h = 0.0;
    for (double p : distribution.data()) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

}  // namespace paws
