#include "paws/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "paws/errors.hpp"

namespace paws {

namespace {

// Shortest round-trip formatting: parse(emit(x)) == x and emit is idempotent.
std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& key) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ValidationError("config: key '" + key + "' expects a number, got '" + s + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ValidationError("config: key '" + key + "' expects a nonnegative integer, got '" + s +
                              "'");
    }
    return v;
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ValidationError("config: key '" + key + "' expects true or false, got '" + s + "'");
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    std::size_t end = s.find_last_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    return s.substr(begin, end - begin + 1);
}

struct Entry {
    std::string key;
    std::function<std::string(const TrainConfig&)> get;
    std::function<void(TrainConfig&, const std::string&)> set;
};

#define PAWS_DOUBLE_KEY(name, field)                                              \
    Entry{name, [](const TrainConfig& c) { return format_double(c.field); },      \
          [](TrainConfig& c, const std::string& s) { c.field = parse_double(s, name); }}
#define PAWS_SIZE_KEY(name, field)                                                 \
    Entry{name, [](const TrainConfig& c) { return std::to_string(c.field); },      \
          [](TrainConfig& c, const std::string& s) {                               \
              c.field = static_cast<std::size_t>(parse_u64(s, name));              \
          }}
#define PAWS_U64_KEY(name, field)                                                  \
    Entry{name, [](const TrainConfig& c) { return std::to_string(c.field); },      \
          [](TrainConfig& c, const std::string& s) { c.field = parse_u64(s, name); }}
#define PAWS_BOOL_KEY(name, field)                                                 \
    Entry{name, [](const TrainConfig& c) { return c.field ? "true" : "false"; },   \
          [](TrainConfig& c, const std::string& s) { c.field = parse_bool(s, name); }}
#define PAWS_STRING_KEY(name, field)                                \
    Entry{name, [](const TrainConfig& c) { return c.field; },       \
          [](TrainConfig& c, const std::string& s) { c.field = s; }}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        PAWS_STRING_KEY("dataset.kind", dataset_kind),
        PAWS_SIZE_KEY("dataset.classes", dataset_classes),
        PAWS_SIZE_KEY("dataset.per_class", dataset_per_class),
        PAWS_SIZE_KEY("dataset.dim", dataset_dim),
        PAWS_DOUBLE_KEY("dataset.separation", dataset_separation),
        PAWS_SIZE_KEY("dataset.grid", dataset_grid),
        PAWS_DOUBLE_KEY("dataset.grid_noise", dataset_grid_noise),
        PAWS_U64_KEY("dataset.seed", dataset_seed),
        PAWS_DOUBLE_KEY("labels.budget", label_budget),
        PAWS_DOUBLE_KEY("paws.tau", tau),
        PAWS_DOUBLE_KEY("paws.sharpen_temperature", sharpen_temperature),
        PAWS_DOUBLE_KEY("paws.label_smoothing", label_smoothing),
        PAWS_BOOL_KEY("paws.me_max", me_max),
        PAWS_STRING_KEY("paws.me_max_variant", me_max_variant),
        PAWS_DOUBLE_KEY("paws.entropy_min_weight", entropy_min_weight),
        PAWS_BOOL_KEY("paws.labeled_anchor_targets", labeled_anchor_targets),
        PAWS_SIZE_KEY("views.global", global_views),
        PAWS_SIZE_KEY("views.local", local_views),
        PAWS_DOUBLE_KEY("views.noise_scale", view_noise_scale),
        PAWS_DOUBLE_KEY("views.jitter_low", view_jitter_low),
        PAWS_DOUBLE_KEY("views.jitter_high", view_jitter_high),
        PAWS_DOUBLE_KEY("views.mask_fraction", view_mask_fraction),
        PAWS_DOUBLE_KEY("views.window_fraction", view_window_fraction),
        PAWS_SIZE_KEY("support.classes", support_classes),
        PAWS_SIZE_KEY("support.per_class", support_per_class),
        PAWS_SIZE_KEY("support.views", support_views_per_sample),
        PAWS_SIZE_KEY("train.batch_size", batch_size),
        PAWS_SIZE_KEY("train.epochs", epochs),
        PAWS_U64_KEY("train.seed", train_seed),
        PAWS_SIZE_KEY("encoder.hidden_dim", encoder_hidden_dim),
        PAWS_SIZE_KEY("encoder.trunk_layers", encoder_trunk_layers),
        PAWS_SIZE_KEY("encoder.proj_hidden_dim", encoder_proj_hidden_dim),
        PAWS_SIZE_KEY("encoder.embed_dim", encoder_embed_dim),
        PAWS_BOOL_KEY("encoder.prediction_head", prediction_head),
        PAWS_SIZE_KEY("encoder.pred_hidden_dim", encoder_pred_hidden_dim),
        PAWS_BOOL_KEY("encoder.passthrough", encoder_passthrough),
        PAWS_DOUBLE_KEY("opt.momentum", momentum),
        PAWS_DOUBLE_KEY("opt.weight_decay", weight_decay),
        PAWS_DOUBLE_KEY("opt.lr_start", lr_start),
        PAWS_DOUBLE_KEY("opt.lr_peak", lr_peak),
        PAWS_DOUBLE_KEY("opt.lr_final", lr_final),
        PAWS_DOUBLE_KEY("opt.warmup_fraction", warmup_fraction),
        Entry{"finetune.lr_grid",
              [](const TrainConfig& c) {
                  std::string out;
                  for (std::size_t i = 0; i < c.finetune_lr_grid.size(); ++i) {
                      if (i) out += ",";
                      out += format_double(c.finetune_lr_grid[i]);
                  }
                  return out;
              },
              [](TrainConfig& c, const std::string& s) {
                  c.finetune_lr_grid.clear();
                  for (const std::string& part : split_commas(s)) {
                      c.finetune_lr_grid.push_back(parse_double(trim(part), "finetune.lr_grid"));
                  }
              }},
        Entry{"finetune.epochs_grid",
              [](const TrainConfig& c) {
                  std::string out;
                  for (std::size_t i = 0; i < c.finetune_epochs_grid.size(); ++i) {
                      if (i) out += ",";
                      out += std::to_string(c.finetune_epochs_grid[i]);
                  }
                  return out;
              },
              [](TrainConfig& c, const std::string& s) {
                  c.finetune_epochs_grid.clear();
                  for (const std::string& part : split_commas(s)) {
                      c.finetune_epochs_grid.push_back(
                          static_cast<std::size_t>(parse_u64(trim(part), "finetune.epochs_grid")));
                  }
              }},
        PAWS_DOUBLE_KEY("finetune.val_fraction", finetune_val_fraction),
        PAWS_DOUBLE_KEY("finetune.momentum", finetune_momentum),
        PAWS_SIZE_KEY("eval.nn_every_epochs", nn_eval_every_epochs),
        PAWS_SIZE_KEY("io.checkpoint_every_epochs", checkpoint_every_epochs),
        PAWS_BOOL_KEY("io.diagnostics", diagnostics),
    };
    return entries;
}

#undef PAWS_DOUBLE_KEY
#undef PAWS_SIZE_KEY
#undef PAWS_U64_KEY
#undef PAWS_BOOL_KEY
#undef PAWS_STRING_KEY

const Entry& find_entry(const std::string& key) {
    for (const Entry& e : registry()) {
        if (e.key == key) return e;
    }
    throw ValidationError("config: unknown key '" + key + "'");
}

}  // namespace

void TrainConfig::validate() const {
    if (dataset_kind != "blobs" && dataset_kind != "grid") {
        throw ConfigError("config: dataset.kind must be blobs or grid, got '" + dataset_kind + "'");
    }
    if (tau <= 0.0) throw DomainError("config: paws.tau must be positive");
    if (sharpen_temperature <= 0.0) {
        throw DomainError("config: paws.sharpen_temperature must be positive");
    }
    if (label_smoothing < 0.0 || label_smoothing >= 1.0) {
        throw DomainError("config: paws.label_smoothing must lie in [0, 1)");
    }
    if (me_max_variant != "differentiable_rho" && me_max_variant != "detached") {
        throw ConfigError("config: paws.me_max_variant must be differentiable_rho or detached");
    }
    if (entropy_min_weight < 0.0) {
        throw DomainError("config: paws.entropy_min_weight must be nonnegative");
    }
    if (global_views != 2) {
        throw ConfigError("config: the objective is defined for exactly 2 global views");
    }
    if (label_budget <= 0.0) throw ConfigError("config: labels.budget must be positive");
    if (batch_size == 0) throw ConfigError("config: train.batch_size must be positive");
    if (support_classes == 0 || support_per_class == 0 || support_views_per_sample == 0) {
        throw ConfigError("config: support composition must be positive");
    }
    if (label_budget >= 1.0 &&
        label_budget < static_cast<double>(support_classes * support_per_class)) {
        throw ConfigError("config: labels.budget smaller than one support batch (" +
                          std::to_string(support_classes * support_per_class) + ")");
    }
    if (momentum < 0.0 || momentum >= 1.0) throw DomainError("config: opt.momentum must lie in [0, 1)");
    if (weight_decay < 0.0) throw DomainError("config: opt.weight_decay must be nonnegative");
    if (warmup_fraction < 0.0 || warmup_fraction > 1.0) {
        throw DomainError("config: opt.warmup_fraction must lie in [0, 1]");
    }
    if (view_jitter_low <= 0.0 || view_jitter_low > view_jitter_high) {
        throw DomainError("config: require 0 < views.jitter_low <= views.jitter_high");
    }
    if (view_mask_fraction < 0.0 || view_mask_fraction >= 1.0) {
        throw DomainError("config: views.mask_fraction must lie in [0, 1)");
    }
    if (finetune_lr_grid.empty() || finetune_epochs_grid.empty()) {
        throw ConfigError("config: fine-tune grids must not be empty");
    }
    if (finetune_val_fraction <= 0.0 || finetune_val_fraction >= 1.0) {
        throw DomainError("config: finetune.val_fraction must lie in (0, 1)");
    }
}

TrainConfig parse_config_text(const std::string& text) {
    TrainConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config: line " + std::to_string(line_no) +
                                  " is not 'key = value': '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        find_entry(key).set(config, value);
    }
    return config;
}

TrainConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("config: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(TrainConfig& config, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ValidationError("config: override must be key=value, got '" + assignment + "'");
    }
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    find_entry(key).set(config, value);
}

std::string emit_config(const TrainConfig& config) {
    std::string out;
    for (const Entry& e : registry()) {
        out += e.key;
        out += " = ";
        out += e.get(config);
        out += "\n";
    }
    return out;
}

void write_config_file(const std::filesystem::path& path, const TrainConfig& config) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("config: cannot open " + path.string() + " for writing");
    out << emit_config(config);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const Entry& e : registry()) out.push_back(e.key);
    return out;
}

}  // namespace paws
