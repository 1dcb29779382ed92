#include "paws/metrics.hpp"

#include <charconv>
#include <cstdio>

#include "paws/errors.hpp"

namespace paws {

namespace {

std::string f17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_field(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw FormatError("metrics: bad numeric field '" + s + "'");
    return v;
}

}  // namespace

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
    if (!out_) throw FormatError("metrics: cannot open " + path.string() + " for writing");
    out_ << header() << "\n";
}

std::string MetricsWriter::header() {
    return "epoch,step,lr,paws_consistency,me_max_entropy,instance_discrimination_loss,"
           "support_classification_loss,mean_target_confidence,nn_accuracy";
}

std::string MetricsWriter::format_row(const MetricsRow& row) {
    std::string out = std::to_string(row.epoch) + "," + std::to_string(row.step) + "," +
                      f17(row.lr) + "," + f17(row.paws_consistency) + "," +
                      f17(row.me_max_entropy) + "," + f17(row.instance_discrimination_loss) + "," +
                      f17(row.support_classification_loss) + "," +
                      f17(row.mean_target_confidence) + ",";
    if (row.nn_accuracy.has_value()) out += f17(*row.nn_accuracy);
    return out;
}

void MetricsWriter::append(const MetricsRow& row) {
    out_ << format_row(row) << "\n";
    out_.flush();
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("metrics: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("metrics: empty file " + path.string());
    if (line != MetricsWriter::header()) {
        throw FormatError("metrics: unexpected header in " + path.string());
    }

    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        if (fields.size() != 9) {
            throw FormatError("metrics: row with " + std::to_string(fields.size()) + " fields");
        }
        MetricsRow row;
        row.epoch = static_cast<std::size_t>(parse_field(fields[0]));
        row.step = static_cast<std::size_t>(parse_field(fields[1]));
        row.lr = parse_field(fields[2]);
        row.paws_consistency = parse_field(fields[3]);
        row.me_max_entropy = parse_field(fields[4]);
        row.instance_discrimination_loss = parse_field(fields[5]);
        row.support_classification_loss = parse_field(fields[6]);
        row.mean_target_confidence = parse_field(fields[7]);
        if (!fields[8].empty()) row.nn_accuracy = parse_field(fields[8]);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace paws
