#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aucm/error.hpp"
#include "aucm/matrix.hpp"
#include "aucm/rng.hpp"

namespace aucm {

/// Feature matrix plus binary labels (0 negative, 1 positive).
struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  std::size_t count_positive() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  }
  std::size_t count_negative() const { return size() - count_positive(); }
  bool has_both_classes() const {
    const auto pos = count_positive();
    return pos > 0 && pos < size();
  }

  LabeledDataset subset(std::span<const std::size_t> idx) const {
    LabeledDataset out{features.select_rows(idx), {}};
    out.labels.reserve(idx.size());
    for (auto i : idx) out.labels.push_back(labels[i]);
    return out;
  }

  bool operator==(const LabeledDataset&) const = default;
};

/// Checks shape, finiteness and label domain. Throws InvalidInput.
inline void validate(const LabeledDataset& ds) {
  if (ds.features.rows() != ds.labels.size()) {
    throw InvalidInput("feature rows (" + std::to_string(ds.features.rows()) +
                       ") != label count (" + std::to_string(ds.labels.size()) + ")");
  }
  if (ds.size() < 2) throw InvalidInput("dataset needs at least 2 samples");
  if (ds.dim() < 1) throw InvalidInput("dataset needs at least 1 feature");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != 0 && ds.labels[i] != 1) {
      throw InvalidInput("label at row " + std::to_string(i + 1) + " is not 0/1");
    }
    for (double v : ds.features.row(i)) {
      if (!std::isfinite(v)) {
        throw InvalidInput("non-finite feature at row " + std::to_string(i + 1));
      }
    }
  }
}

inline void require_both_classes(const LabeledDataset& ds, std::string_view what) {
  if (!ds.has_both_classes()) {
    throw SingleClassError(std::string(what) + " must contain both classes (has " +
                           std::to_string(ds.count_positive()) + " positive, " +
                           std::to_string(ds.count_negative()) + " negative)");
  }
}

// ---------------------------------------------------------------------------
// Synthetic generation

struct SynthConfig {
  std::size_t n_total = 2000;
  double imbalance_ratio = 6.39;  ///< negatives per positive
  std::size_t dim = 8;
  double class_separation = 1.5;  ///< norm of the positive-class mean
  std::uint64_t seed = 0;
};

/// Positive count implied by the ratio: max(1, round(n / (1 + ratio))).
inline std::size_t positive_count(const SynthConfig& cfg) {
  const double raw = static_cast<double>(cfg.n_total) / (1.0 + cfg.imbalance_ratio);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(raw)));
}

/// Negatives ~ N(0, I); positives ~ N(mu, I) with mu = sep/sqrt(d) * (1,...,1).
/// Labels are placed in a seeded random order; features are then drawn row by row.
inline LabeledDataset gen_synthetic(const SynthConfig& cfg) {
  if (cfg.n_total < 4) throw InvalidInput("n_total must be >= 4");
  if (cfg.dim < 1) throw InvalidInput("dimension must be >= 1");
  if (!(cfg.imbalance_ratio > 0.0) || !std::isfinite(cfg.imbalance_ratio)) {
    throw InvalidInput("imbalance_ratio must be a finite value > 0");
  }
  if (!(cfg.class_separation >= 0.0) || !std::isfinite(cfg.class_separation)) {
    throw InvalidInput("class_separation must be a finite value >= 0");
  }
  const std::size_t n_pos = positive_count(cfg);
  if (n_pos >= cfg.n_total) {
    throw InvalidInput("configuration yields zero negatives (ratio too small)");
  }

  LabeledDataset ds{Matrix(cfg.n_total, cfg.dim), std::vector<int>(cfg.n_total, 0)};
  std::fill_n(ds.labels.begin(), n_pos, 1);
  Rng label_rng(derive_seed(cfg.seed, "synth-labels"));
  label_rng.shuffle(std::span<int>(ds.labels));

  const double offset = cfg.class_separation / std::sqrt(static_cast<double>(cfg.dim));
  Rng feature_rng(derive_seed(cfg.seed, "synth-features"));
  for (std::size_t i = 0; i < cfg.n_total; ++i) {
    const double shift = ds.labels[i] == 1 ? offset : 0.0;
    for (double& v : ds.features.row(i)) v = shift + feature_rng.normal();
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string format_shortest(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace detail

/// Canonical CSV text: header `f0,...,f{d-1},label`, LF line endings, shortest
/// round-trip decimal for every feature.
inline std::string to_csv(const LabeledDataset& ds) {
  std::string out;
  for (std::size_t j = 0; j < ds.dim(); ++j) out += "f" + std::to_string(j) + ",";
  out += "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features.row(i)) {
      out += detail::format_shortest(v);
      out += ',';
    }
    out += ds.labels[i] == 1 ? "1\n" : "0\n";
  }
  return out;
}

/// Parses CSV text. Row numbers in errors count data rows from 1 (the header
/// is line 1, so data row k sits on line k+1).
inline LabeledDataset parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty CSV: missing header");

  const auto header = detail::split_fields(lines.front());
  if (header.size() < 2 || detail::trim(header.back()) != "label") {
    throw ParseError("CSV header must be f0,...,f{d-1},label");
  }
  const std::size_t d = header.size() - 1;
  const std::size_t n = lines.size() - 1;

  std::vector<double> values;
  values.reserve(n * d);
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t r = 1; r <= n; ++r) {
    const std::string where = "row " + std::to_string(r) + " (line " + std::to_string(r + 1) + ")";
    const auto fields = detail::split_fields(lines[r]);
    if (fields.size() != d + 1) {
      throw ParseError(where + ": expected " + std::to_string(d + 1) + " columns, found " +
                       std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      if (!detail::parse_double(fields[j], v)) {
        throw ParseError(where + ": malformed number in column " + std::to_string(j + 1));
      }
      if (!std::isfinite(v)) {
        throw ParseError(where + ": non-finite value in column " + std::to_string(j + 1));
      }
      values.push_back(v);
    }
    const auto label = detail::trim(fields[d]);
    if (label == "0") {
      labels.push_back(0);
    } else if (label == "1") {
      labels.push_back(1);
    } else {
      throw ParseError(where + ": label must be 0 or 1, got '" + std::string(label) + "'");
    }
  }
  LabeledDataset ds{Matrix(n, d, std::move(values)), std::move(labels)};
  validate(ds);
  return ds;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

inline LabeledDataset load_csv(const std::string& path) {
  try {
    return parse_csv(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void save_csv(const LabeledDataset& ds, const std::string& path) {
  write_text_file(path, to_csv(ds));
}

/// FNV-1a 64 of a byte string, as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

/// Content hash of a dataset: hash of its canonical CSV text, so a file
/// written by save_csv hashes to the same value.
inline std::string content_hash(const LabeledDataset& ds) { return fnv1a_hex(to_csv(ds)); }

// ---------------------------------------------------------------------------
// Stratified split

struct SplitSpec {
  double train_frac = 0.7;
  double val_frac = 0.15;
  double test_frac = 0.15;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

struct DataSplits {
  LabeledDataset train, val, test;
  SplitIndices indices;
};

/// Per-class counts for one class: floor(frac * n) per split, then the
/// remainder handed out one at a time in train -> val -> test order.
inline std::array<std::size_t, 3> stratum_counts(std::size_t n, const SplitSpec& spec) {
  const std::array<double, 3> fr{spec.train_frac, spec.val_frac, spec.test_frac};
  std::array<std::size_t, 3> counts{};
  std::size_t used = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    // 1e-9 absorbs representation error such as 0.15 * 100 = 14.999...
    counts[k] = static_cast<std::size_t>(std::floor(fr[k] * static_cast<double>(n) + 1e-9));
    used += counts[k];
  }
  for (std::size_t k = 0; used < n; k = (k + 1) % 3, ++used) ++counts[k];
  return counts;
}

inline DataSplits stratified_split(const LabeledDataset& ds, const SplitSpec& spec) {
  for (double f : {spec.train_frac, spec.val_frac, spec.test_frac}) {
    if (!(f > 0.0 && f < 1.0)) throw InvalidInput("split fractions must lie in (0,1)");
  }
  if (std::abs(spec.train_frac + spec.val_frac + spec.test_frac - 1.0) > 1e-9) {
    throw InvalidInput("split fractions must sum to 1");
  }
  if (ds.labels.size() != ds.features.rows()) throw InvalidInput("malformed dataset");

  SplitIndices idx;
  std::array<std::vector<std::size_t>*, 3> parts{&idx.train, &idx.val, &idx.test};
  static constexpr std::array<const char*, 3> part_names{"train", "val", "test"};
  for (int cls : {1, 0}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == cls) members.push_back(i);
    }
    const auto counts = stratum_counts(members.size(), spec);
    for (std::size_t k = 0; k < 3; ++k) {
      if (counts[k] == 0) {
        throw InvalidInput(std::string("class ") + std::to_string(cls) + " has " +
                           std::to_string(members.size()) +
                           " members, too few to populate the " + part_names[k] + " split");
      }
    }
    Rng rng(derive_seed(spec.seed, "split", static_cast<std::uint64_t>(cls)));
    rng.shuffle(std::span<std::size_t>(members));
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      parts[k]->insert(parts[k]->end(), members.begin() + static_cast<std::ptrdiff_t>(pos),
                       members.begin() + static_cast<std::ptrdiff_t>(pos + counts[k]));
      pos += counts[k];
    }
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());

  DataSplits out{ds.subset(idx.train), ds.subset(idx.val), ds.subset(idx.test), {}};
  out.indices = std::move(idx);
  return out;
}

}  // namespace aucm
