#include "paws/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "paws/errors.hpp"

namespace paws {

double nt_xent(const Matrix& view_a, const Matrix& view_b, double tau) {
    require_same_shape(view_a, view_b, "nt_xent");
    if (tau <= 0.0) throw DomainError("nt_xent: tau must be positive");
    const std::size_t n = view_a.rows();
    if (n == 0) return 0.0;

    Matrix all(2 * n, view_a.cols());
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(view_a.row_ptr(i), view_a.row_ptr(i) + view_a.cols(), all.row_ptr(i));
        std::copy(view_b.row_ptr(i), view_b.row_ptr(i) + view_b.cols(), all.row_ptr(n + i));
    }
    const Matrix zn = row_l2_normalize(all);
    const Matrix sim = matmul_nt(zn, zn);

    double total = 0.0;
    for (std::size_t i = 0; i < 2 * n; ++i) {
        const std::size_t pos = i < n ? i + n : i - n;
        const double* s = sim.row_ptr(i);
        // log-sum-exp over the 2n - 1 non-self entries, max-stabilized
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < 2 * n; ++j) {
            if (j != i) top = std::max(top, s[j] / tau);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < 2 * n; ++j) {
            if (j != i) denom += std::exp(s[j] / tau - top);
        }
        total += -(s[pos] / tau - top - std::log(denom));
    }
    return total / static_cast<double>(2 * n);
}

double support_contrastive(const Matrix& support, const std::vector<int>& labels, double tau) {
    if (support.rows() != labels.size()) {
        throw ShapeError("support_contrastive: " + std::to_string(support.rows()) + " rows vs " +
                         std::to_string(labels.size()) + " labels");
    }
    if (tau <= 0.0) throw DomainError("support_contrastive: tau must be positive");
    const std::size_t m = support.rows();
    const Matrix zn = row_l2_normalize(support);
    const Matrix sim = matmul_nt(zn, zn);

    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double* s = sim.row_ptr(i);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) top = std::max(top, s[j] / tau);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) denom += std::exp(s[j] / tau - top);
        }
        double row_loss = 0.0;
        std::size_t positives = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i || labels[j] != labels[i]) continue;
            ++positives;
            row_loss += -(s[j] / tau - top - std::log(denom));
        }
        if (positives > 0) {
            total += row_loss / static_cast<double>(positives);
            ++counted;
        }
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

}  // namespace paws
