#include "paws/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "paws/errors.hpp"
#include "paws/rng.hpp"

namespace paws {

namespace {

// Random unit directions with pairwise cosine <= cos(45 deg).
std::vector<std::vector<double>> separated_directions(std::size_t count, std::size_t dim, Rng& rng) {
    constexpr double kMaxCosine = 0.70710678118654752;  // 45 degrees
    constexpr std::size_t kMaxAttempts = 2000;
    std::vector<std::vector<double>> dirs;
    std::size_t attempts = 0;
    while (dirs.size() < count) {
        if (++attempts > kMaxAttempts) {
            throw ConfigError("make_blobs: cannot place " + std::to_string(count) +
                              " directions with pairwise angle >= 45 degrees in dimension " +
                              std::to_string(dim));
        }
        std::vector<double> d(dim);
        double norm = 0.0;
        for (double& v : d) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-9) continue;
        for (double& v : d) v /= norm;
        bool ok = true;
        for (const auto& existing : dirs) {
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) dot += d[j] * existing[j];
            if (dot > kMaxCosine) {
                ok = false;
                break;
            }
        }
        if (ok) dirs.push_back(std::move(d));
    }
    return dirs;
}

// Per-class 80/20 split with a seeded shuffle inside each class.
Dataset split_dataset(const Matrix& inputs, const std::vector<int>& labels,
                      std::size_t num_classes, std::size_t dim, Rng& rng) {
    std::vector<std::vector<std::size_t>> per_class(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        per_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (auto& rows : per_class) {
        rng.shuffle(rows);
        const std::size_t train_count = rows.size() * 4 / 5;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            (i < train_count ? train_rows : test_rows).push_back(rows[i]);
        }
    }
    // Interleave classes deterministically rather than keeping class blocks.
    Rng order_rng(rng.next_u64());
    order_rng.shuffle(train_rows);
    order_rng.shuffle(test_rows);

    Dataset out;
    out.num_classes = num_classes;
    out.input_dim = dim;
    out.train_inputs = Matrix(train_rows.size(), dim);
    out.test_inputs = Matrix(test_rows.size(), dim);
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
        const double* src = inputs.row_ptr(train_rows[i]);
        std::copy(src, src + dim, out.train_inputs.row_ptr(i));
        out.train_labels.push_back(labels[train_rows[i]]);
    }
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
        const double* src = inputs.row_ptr(test_rows[i]);
        std::copy(src, src + dim, out.test_inputs.row_ptr(i));
        out.test_labels.push_back(labels[test_rows[i]]);
    }
    return out;
}

}  // namespace

Dataset make_blobs(std::size_t classes, std::size_t per_class, std::size_t dim, double separation,
                   std::uint64_t seed) {
    if (classes < 2) throw ConfigError("make_blobs: need at least 2 classes");
    if (per_class == 0 || dim == 0) throw ConfigError("make_blobs: per_class and dim must be positive");
    Rng rng(stream_seed(seed, streams::kDataset));
    const auto dirs = separated_directions(classes, dim, rng);

    const std::size_t total = classes * per_class;
    Matrix inputs(total, dim);
    std::vector<int> labels(total);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            double* r = inputs.row_ptr(row);
            for (std::size_t j = 0; j < dim; ++j) {
                r[j] = separation * dirs[c][j] + rng.normal();
            }
            labels[row] = static_cast<int>(c);
        }
    }
    return split_dataset(inputs, labels, classes, dim, rng);
}

Dataset make_tiny_grid(std::size_t classes, std::size_t per_class, std::size_t grid, double noise,
                       std::uint64_t seed) {
    if (classes < 2) throw ConfigError("make_tiny_grid: need at least 2 classes");
    if (per_class == 0 || grid == 0) {
        throw ConfigError("make_tiny_grid: per_class and grid must be positive");
    }
    Rng rng(stream_seed(seed, streams::kDataset, 1));
    const std::size_t dim = grid * grid;

    // One fixed binary prototype pattern per class.
    std::vector<std::vector<double>> prototypes(classes, std::vector<double>(dim));
    for (auto& proto : prototypes) {
        for (double& v : proto) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }

    const std::size_t total = classes * per_class;
    Matrix inputs(total, dim);
    std::vector<int> labels(total);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            double* r = inputs.row_ptr(row);
            for (std::size_t j = 0; j < dim; ++j) r[j] = prototypes[c][j] + rng.normal(0.0, noise);
            labels[row] = static_cast<int>(c);
        }
    }
    return split_dataset(inputs, labels, classes, dim, rng);
}

LabeledPool select_labeled_pool(const Dataset& data, double budget, std::uint64_t seed) {
    const std::size_t train_count = data.train_labels.size();
    std::size_t count;
    if (budget <= 0.0) {
        throw ConfigError("select_labeled_pool: label budget must be positive");
    } else if (budget < 1.0) {
        count = static_cast<std::size_t>(std::llround(budget * static_cast<double>(train_count)));
    } else {
        count = static_cast<std::size_t>(std::llround(budget));
    }
    if (count == 0 || count > train_count) {
        throw ConfigError("select_labeled_pool: budget resolves to " + std::to_string(count) +
                          " of " + std::to_string(train_count) + " train samples");
    }

    std::vector<std::vector<std::size_t>> per_class(data.num_classes);
    for (std::size_t i = 0; i < train_count; ++i) {
        per_class[static_cast<std::size_t>(data.train_labels[i])].push_back(i);
    }
    Rng rng(stream_seed(seed, streams::kLabelPick));
    for (auto& rows : per_class) rng.shuffle(rows);

    // Even split across classes; the remainder goes to the lowest class ids.
    const std::size_t base = count / data.num_classes;
    std::size_t remainder = count % data.num_classes;
    std::vector<std::size_t> chosen;
    for (std::size_t c = 0; c < data.num_classes; ++c) {
        std::size_t want = base + (remainder > 0 ? 1 : 0);
        if (remainder > 0) --remainder;
        if (want > per_class[c].size()) {
            throw ConfigError("select_labeled_pool: class " + std::to_string(c) + " has only " +
                              std::to_string(per_class[c].size()) + " train samples, need " +
                              std::to_string(want));
        }
        chosen.insert(chosen.end(), per_class[c].begin(), per_class[c].begin() + want);
    }
    std::sort(chosen.begin(), chosen.end());

    Matrix inputs(chosen.size(), data.input_dim);
    std::vector<int> labels(chosen.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const double* src = data.train_inputs.row_ptr(chosen[i]);
        std::copy(src, src + data.input_dim, inputs.row_ptr(i));
        labels[i] = data.train_labels[chosen[i]];
    }
    return make_labeled_pool(std::move(inputs), std::move(labels), data.num_classes,
                             std::move(chosen));
}

}  // namespace paws
