#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace paws {

/// One row per training step. Diagnostic losses are computed on detached
/// values and never contribute gradients.
struct MetricsRow {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double lr = 0.0;
    double paws_consistency = 0.0;
    double me_max_entropy = 0.0;
    double instance_discrimination_loss = 0.0;
    double support_classification_loss = 0.0;
    double mean_target_confidence = 0.0;
    std::optional<double> nn_accuracy;  // periodic; empty field otherwise
};

/// CSV writer: header row, floats with 17 significant digits, one row per
/// step with no gaps. Sole owner of its file.
class MetricsWriter {
   public:
    explicit MetricsWriter(const std::filesystem::path& path);
    void append(const MetricsRow& row);
    static std::string header();
    static std::string format_row(const MetricsRow& row);

   private:
    std::ofstream out_;
};

/// Parse a metrics.csv written by MetricsWriter (used by resume tests and
/// offline analysis).
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

}  // namespace paws
