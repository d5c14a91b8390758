#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aucm/dataset.hpp"
#include "aucm/error.hpp"
#include "aucm/matrix.hpp"
#include "aucm/rng.hpp"

namespace aucm {

enum class ArchKind { Linear, Mlp };

/// LINEAR(d) or MLP(d, hidden...) with tanh hidden units and a linear output.
struct Architecture {
  ArchKind kind = ArchKind::Linear;
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden;

  static Architecture linear(std::size_t d) { return {ArchKind::Linear, d, {}}; }
  static Architecture mlp(std::size_t d, std::vector<std::size_t> hidden) {
    return {ArchKind::Mlp, d, std::move(hidden)};
  }

  /// Layer widths from input to the scalar output.
  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w{input_dim};
    if (kind == ArchKind::Mlp) w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(1);
    return w;
  }

  std::size_t parameter_count() const {
    const auto w = widths();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) n += w[l] * w[l + 1] + w[l + 1];
    return n;
  }

  void validate() const {
    if (input_dim == 0) throw InvalidInput("architecture input dimension must be >= 1");
    if (kind == ArchKind::Mlp) {
      if (hidden.empty()) throw InvalidInput("MLP needs at least one hidden layer");
      for (auto h : hidden) {
        if (h == 0) throw InvalidInput("hidden layer size must be >= 1");
      }
    } else if (!hidden.empty()) {
      throw InvalidInput("linear architecture takes no hidden layers");
    }
  }

  bool operator==(const Architecture&) const = default;
};

/// Score function h(x) with a flat parameter vector. Per layer the layout is
/// the weight matrix (out x in, row-major) followed by the out biases.
struct ScorerModel {
  Architecture arch;
  std::vector<double> params;

  bool operator==(const ScorerModel&) const = default;
};

struct GradientBundle {
  std::vector<double> d_params;
  std::optional<Matrix> d_inputs;
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
inline ScorerModel init_scorer(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  ScorerModel model{arch, std::vector<double>(arch.parameter_count(), 0.0)};
  Rng rng(derive_seed(seed, "scorer-init"));
  const auto w = arch.widths();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w[l]));
    for (std::size_t k = 0; k < w[l] * w[l + 1]; ++k) model.params[off + k] = rng.uniform(-bound, bound);
    off += w[l] * w[l + 1] + w[l + 1];
  }
  return model;
}

namespace detail {

inline void check_model(const ScorerModel& model) {
  if (model.params.size() != model.arch.parameter_count()) {
    throw InvalidInput("parameter vector length " + std::to_string(model.params.size()) +
                       " does not match architecture (" +
                       std::to_string(model.arch.parameter_count()) + ")");
  }
}

inline void check_features(const ScorerModel& model, const Matrix& x) {
  if (x.cols() != model.arch.input_dim) {
    throw InvalidInput("feature dimension " + std::to_string(x.cols()) +
                       " does not match model input dimension " +
                       std::to_string(model.arch.input_dim));
  }
}

/// Forward pass for one sample, keeping every layer's output. acts[0] is the
/// input; hidden layers hold post-tanh values; the last entry is the score.
inline void forward_one(const ScorerModel& model, const std::vector<std::size_t>& widths,
                        std::span<const double> x, std::vector<std::vector<double>>& acts) {
  acts.resize(widths.size());
  acts[0].assign(x.begin(), x.end());
  std::size_t off = 0;
  const std::size_t last = widths.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    const double* weights = model.params.data() + off;
    const double* bias = weights + in * out;
    auto& next = acts[l + 1];
    next.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double z = bias[o];
      for (std::size_t i = 0; i < in; ++i) z += weights[o * in + i] * acts[l][i];
      next[o] = (l + 1 == last) ? z : std::tanh(z);
    }
    off += in * out + out;
  }
}

}  // namespace detail

inline std::vector<double> forward(const ScorerModel& model, const Matrix& features) {
  detail::check_model(model);
  detail::check_features(model, features);
  const auto widths = model.arch.widths();
  std::vector<double> scores(features.rows());
  std::vector<std::vector<double>> acts;
  for (std::size_t n = 0; n < features.rows(); ++n) {
    detail::forward_one(model, widths, features.row(n), acts);
    scores[n] = acts.back()[0];
  }
  return scores;
}

/// Gradient of sum_i upstream[i] * h(x_i) with respect to the parameters
/// (and, when requested, the inputs).
inline GradientBundle backward(const ScorerModel& model, const Matrix& features,
                               std::span<const double> upstream, bool input_grad = false) {
  detail::check_model(model);
  detail::check_features(model, features);
  if (upstream.size() != features.rows()) {
    throw InvalidInput("upstream length " + std::to_string(upstream.size()) +
                       " != sample count " + std::to_string(features.rows()));
  }
  const auto widths = model.arch.widths();
  const std::size_t layers = widths.size() - 1;
  std::vector<std::size_t> offsets(layers);
  for (std::size_t l = 0, off = 0; l < layers; ++l) {
    offsets[l] = off;
    off += widths[l] * widths[l + 1] + widths[l + 1];
  }

  GradientBundle grad{std::vector<double>(model.params.size(), 0.0), std::nullopt};
  if (input_grad) grad.d_inputs = Matrix(features.rows(), features.cols());

  std::vector<std::vector<double>> acts;
  std::vector<double> delta, prev_delta;
  for (std::size_t n = 0; n < features.rows(); ++n) {
    if (upstream[n] == 0.0 && !input_grad) continue;
    detail::forward_one(model, widths, features.row(n), acts);
    delta.assign(1, upstream[n]);  // d/dz of the output layer
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = widths[l];
      const std::size_t out = widths[l + 1];
      const double* weights = model.params.data() + offsets[l];
      double* d_weights = grad.d_params.data() + offsets[l];
      double* d_bias = d_weights + in * out;
      for (std::size_t o = 0; o < out; ++o) {
        d_bias[o] += delta[o];
        for (std::size_t i = 0; i < in; ++i) d_weights[o * in + i] += delta[o] * acts[l][i];
      }
      if (l == 0 && !input_grad) break;
      prev_delta.assign(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t i = 0; i < in; ++i) prev_delta[i] += weights[o * in + i] * delta[o];
      }
      if (l > 0) {
        for (std::size_t i = 0; i < in; ++i) prev_delta[i] *= 1.0 - acts[l][i] * acts[l][i];
      }
      delta.swap(prev_delta);
    }
    if (input_grad) std::copy(delta.begin(), delta.end(), grad.d_inputs->row(n).begin());
  }
  return grad;
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Checkpoint text format
//
//   aucm-checkpoint 1
//   arch linear|mlp
//   input_dim <d>
//   hidden <h1,h2,...>|-
//   params <count>
//   <one parameter per line, 17 significant digits>

inline std::string format_17g(double v) {
  std::array<char, 40> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline std::string serialize_checkpoint(const ScorerModel& model) {
  detail::check_model(model);
  std::string out = "aucm-checkpoint 1\n";
  out += model.arch.kind == ArchKind::Linear ? "arch linear\n" : "arch mlp\n";
  out += "input_dim " + std::to_string(model.arch.input_dim) + "\n";
  out += "hidden ";
  if (model.arch.hidden.empty()) out += "-";
  for (std::size_t k = 0; k < model.arch.hidden.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(model.arch.hidden[k]);
  }
  out += "\nparams " + std::to_string(model.params.size()) + "\n";
  for (double p : model.params) out += format_17g(p) + "\n";
  return out;
}

inline ScorerModel parse_checkpoint(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto expect = [&](std::string_view key) {
    if (!std::getline(in, line)) throw ParseError("checkpoint truncated before '" + std::string(key) + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(std::string(key) + " ", 0) != 0) {
      throw ParseError("checkpoint: expected '" + std::string(key) + "', got '" + line + "'");
    }
    return line.substr(key.size() + 1);
  };
  auto to_size = [](const std::string& s) {
    std::size_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ParseError("checkpoint: bad integer '" + s + "'");
    }
    return v;
  };

  if (expect("aucm-checkpoint") != "1") throw ParseError("checkpoint: unsupported version");
  ScorerModel model;
  const auto kind = expect("arch");
  if (kind == "linear") {
    model.arch.kind = ArchKind::Linear;
  } else if (kind == "mlp") {
    model.arch.kind = ArchKind::Mlp;
  } else {
    throw ParseError("checkpoint: unknown arch '" + kind + "'");
  }
  model.arch.input_dim = to_size(expect("input_dim"));
  const auto hidden = expect("hidden");
  if (hidden != "-") {
    std::stringstream hs(hidden);
    std::string tok;
    while (std::getline(hs, tok, ',')) model.arch.hidden.push_back(to_size(tok));
  }
  try {
    model.arch.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  const auto count = to_size(expect("params"));
  if (count != model.arch.parameter_count()) {
    throw ParseError("checkpoint: parameter count does not match architecture");
  }
  model.params.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line)) throw ParseError("checkpoint: truncated parameter list");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    double v = 0.0;
    if (!detail::parse_double(line, v) || !std::isfinite(v)) {
      throw ParseError("checkpoint: bad parameter on value line " + std::to_string(k + 1));
    }
    model.params.push_back(v);
  }
  return model;
}

inline void save_checkpoint(const ScorerModel& model, const std::string& path) {
  write_text_file(path, serialize_checkpoint(model));
}

inline ScorerModel load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_text_file(path));
}

}  // namespace aucm
