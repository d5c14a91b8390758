#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "aucm/error.hpp"

namespace aucm {

/// Reward (alpha) and penalty (beta) relaxation exponents.
struct TrustConfig {
  double alpha_reward = 1.0;
  double beta_penalty = 1.0;

  void validate() const {
    if (!(alpha_reward > 0.0) || !(beta_penalty > 0.0) || !std::isfinite(alpha_reward) ||
        !std::isfinite(beta_penalty)) {
      throw InvalidInput("trust coefficients must be finite and > 0");
    }
  }
};

/// Anchors of the confidence map: s_min < threshold < s_max.
struct ConfidenceCalibration {
  double s_min = 0.0;
  double threshold = 0.0;
  double s_max = 0.0;

  bool operator==(const ConfidenceCalibration&) const = default;
};

/// Score extrema of the calibration split around threshold t. A side with no
/// extent is mirrored from the other side; if neither side has extent the
/// anchors become t -/+ 1.
inline ConfidenceCalibration fit_calibration(std::span<const double> val_scores, double threshold) {
  if (val_scores.empty()) throw InvalidInput("calibration needs at least one score");
  if (!std::isfinite(threshold)) throw InvalidInput("calibration threshold must be finite");
  const auto [lo, hi] = std::minmax_element(val_scores.begin(), val_scores.end());
  ConfidenceCalibration c{*lo, threshold, *hi};
  const bool low_missing = !(c.s_min < threshold);
  const bool high_missing = !(c.s_max > threshold);
  if (low_missing && high_missing) {
    c.s_min = threshold - 1.0;
    c.s_max = threshold + 1.0;
  } else if (low_missing) {
    c.s_min = threshold - (c.s_max - threshold);
  } else if (high_missing) {
    c.s_max = threshold + (threshold - c.s_min);
  }
  return c;
}

/// Piecewise-linear map to [0,1]: [s_min, t) -> [0, 0.5), [t, s_max] -> [0.5, 1],
/// clamped outside. Returns exactly 0.5 only when s == t.
inline double normalized_score(double s, const ConfidenceCalibration& c) {
  const double t = c.threshold;
  if (s >= t) return 0.5 + 0.5 * std::min(1.0, (s - t) / (c.s_max - t));
  const double p = 0.5 * std::max(0.0, (s - c.s_min) / (t - c.s_min));
  return p < 0.5 ? p : std::nextafter(0.5, 0.0);
}

struct TrustRecord {
  std::size_t index = 0;
  int predicted = 0;
  int truth = 0;
  double confidence = 0.0;
  double qa_trust = 0.0;
};

/// Question-answer trust of one answer: C^alpha when right, (1 - C)^beta when wrong.
inline TrustRecord qa_trust(double p_hat, int truth, const TrustConfig& cfg, std::size_t index = 0) {
  TrustRecord r;
  r.index = index;
  r.truth = truth;
  r.predicted = p_hat >= 0.5 ? 1 : 0;
  r.confidence = r.predicted == 1 ? p_hat : 1.0 - p_hat;
  r.qa_trust = r.predicted == truth ? std::pow(r.confidence, cfg.alpha_reward)
                                    : std::pow(1.0 - r.confidence, cfg.beta_penalty);
  return r;
}

inline std::vector<TrustRecord> trust_records(std::span<const double> scores, std::span<const int> labels,
                                              const ConfidenceCalibration& calib,
                                              const TrustConfig& cfg) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
  cfg.validate();
  std::vector<TrustRecord> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.push_back(qa_trust(normalized_score(scores[i], calib), labels[i], cfg, i));
  }
  return out;
}

/// Mean qa_trust over records whose truth equals `cls`, summed in index order.
inline double class_trust(std::span<const TrustRecord> records, int cls) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.truth != cls) continue;
    sum += r.qa_trust;
    ++n;
  }
  if (n == 0) {
    throw SingleClassError(cls == 1 ? "trust score needs at least one positive test sample"
                                    : "trust score needs at least one negative test sample");
  }
  return sum / static_cast<double>(n);
}

inline double overall_trust(std::span<const TrustRecord> records) {
  if (records.empty()) throw InvalidInput("no trust records");
  double sum = 0.0;
  for (const auto& r : records) sum += r.qa_trust;
  return sum / static_cast<double>(records.size());
}

inline double positive_class_trust(std::span<const double> test_scores, std::span<const int> test_labels,
                                   const ConfidenceCalibration& calib, const TrustConfig& cfg) {
  const auto records = trust_records(test_scores, test_labels, calib, cfg);
  return class_trust(records, 1);
}

}  // namespace aucm
