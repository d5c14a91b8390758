#pragma once

#include <charconv>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aucm/dataset.hpp"
#include "aucm/error.hpp"
#include "aucm/losses.hpp"
#include "aucm/scorer.hpp"
#include "aucm/training.hpp"

namespace aucm {

/// Everything a training run needs: TrainConfig, the architecture, data paths.
struct RunConfig {
  TrainConfig train;
  ArchKind arch = ArchKind::Linear;
  std::vector<std::size_t> hidden;
  std::string train_path;
  std::string val_path;
};

/// `key = value` lines; `#` starts a comment; blank lines ignored.
/// Duplicate keys are errors.
inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("config line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw ParseError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ParseError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return v;
}

inline std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    auto comma = value.find(',', start);
    if (comma == std::string::npos) comma = value.size();
    out.push_back(parse_number<std::size_t>(key, std::string(trim(std::string_view(value).substr(start, comma - start)))));
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"loss",   "margin", "epochs", "batch_size", "lr_primal", "lr_dual",
                                             "seed",   "arch",   "hidden", "train",      "val"};
  return keys;
}

/// Applies parsed key/values on top of `base`. Unknown keys are errors.
inline RunConfig apply_config(const std::map<std::string, std::string>& kv, RunConfig base = {}) {
  for (const auto& [key, value] : kv) {
    if (key == "loss") {
      try {
        base.train.loss.type = parse_loss_type(value);
      } catch (const InvalidInput& e) {
        throw ParseError("config key 'loss': " + std::string(e.what()));
      }
    } else if (key == "margin") {
      base.train.loss.margin = detail::parse_number<double>(key, value);
    } else if (key == "epochs") {
      base.train.epochs = detail::parse_number<std::size_t>(key, value);
    } else if (key == "batch_size") {
      base.train.batch_size = detail::parse_number<std::size_t>(key, value);
    } else if (key == "lr_primal") {
      base.train.lr_primal = detail::parse_number<double>(key, value);
    } else if (key == "lr_dual") {
      base.train.lr_dual = detail::parse_number<double>(key, value);
    } else if (key == "seed") {
      base.train.seed = detail::parse_number<std::uint64_t>(key, value);
    } else if (key == "arch") {
      if (value == "linear") {
        base.arch = ArchKind::Linear;
      } else if (value == "mlp") {
        base.arch = ArchKind::Mlp;
      } else {
        throw ParseError("config key 'arch': expected linear or mlp, got '" + value + "'");
      }
    } else if (key == "hidden") {
      base.hidden = detail::parse_size_list(key, value);
    } else if (key == "train") {
      base.train_path = value;
    } else if (key == "val") {
      base.val_path = value;
    } else {
      throw ParseError("unknown config key '" + key + "'");
    }
  }
  return base;
}

inline RunConfig load_run_config(const std::string& path, RunConfig base = {}) {
  return apply_config(parse_key_values(read_text_file(path)), std::move(base));
}

inline Architecture make_architecture(const RunConfig& rc, std::size_t input_dim) {
  Architecture arch{rc.arch, input_dim, rc.arch == ArchKind::Mlp ? rc.hidden : std::vector<std::size_t>{}};
  arch.validate();
  return arch;
}

}  // namespace aucm
