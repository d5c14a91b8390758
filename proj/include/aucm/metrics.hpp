#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "aucm/error.hpp"

namespace aucm {

/// Integer pair counts behind the AUC: wins = #(pos > neg), ties = #(pos == neg).
struct AucCounts {
  std::uint64_t wins = 0;
  std::uint64_t ties = 0;
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;

  double auc() const {
    return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
  }
};

namespace detail {

inline void check_lengths(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
}

inline std::vector<std::size_t> ascending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });
  return order;
}

}  // namespace detail

/// Mann-Whitney counts in O(n log n): sweep tied groups in ascending score
/// order, counting negatives strictly below each group.
inline AucCounts auc_counts(std::span<const double> scores, std::span<const int> labels) {
  detail::check_lengths(scores, labels);
  AucCounts c;
  for (int y : labels) (y == 1 ? c.n_pos : c.n_neg)++;
  if (c.n_pos == 0 || c.n_neg == 0) throw SingleClassError("AUC needs both classes");

  const auto order = detail::ascending_order(scores);
  std::uint64_t neg_below = 0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t end = g;
    std::uint64_t gp = 0, gn = 0;
    while (end < order.size() && scores[order[end]] == scores[order[g]]) {
      (labels[order[end]] == 1 ? gp : gn)++;
      ++end;
    }
    c.wins += gp * neg_below;
    c.ties += gp * gn;
    neg_below += gn;
    g = end;
  }
  return c;
}

inline double exact_auc(std::span<const double> scores, std::span<const int> labels) {
  return auc_counts(scores, labels).auc();
}

/// (fpr, tpr) points, one per distinct threshold from +inf down to the
/// minimum score; starts at (0,0) and ends at (1,1).
inline std::vector<std::pair<double, double>> roc_points(std::span<const double> scores,
                                                         std::span<const int> labels) {
  const auto c = auc_counts(scores, labels);
  auto order = detail::ascending_order(scores);
  std::reverse(order.begin(), order.end());
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t g = 0; g < order.size();) {
    const double s = scores[order[g]];
    while (g < order.size() && scores[order[g]] == s) {
      (labels[order[g]] == 1 ? tp : fp)++;
      ++g;
    }
    pts.emplace_back(static_cast<double>(fp) / static_cast<double>(c.n_neg),
                     static_cast<double>(tp) / static_cast<double>(c.n_pos));
  }
  return pts;
}

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Predict positive iff score >= threshold.
inline ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels,
                                 double threshold) {
  detail::check_lengths(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) {
      (pred ? c.tp : c.fn)++;
    } else {
      (pred ? c.fp : c.tn)++;
    }
  }
  return c;
}

/// Per-class precision/sensitivity and positive-class F1. A 0/0 ratio is
/// reported as 0 with its degenerate flag set.
struct ClassMetrics {
  double precision_pos = 0.0;
  double precision_neg = 0.0;
  double sensitivity_pos = 0.0;
  double sensitivity_neg = 0.0;
  double f1_pos = 0.0;
  bool precision_pos_degenerate = false;
  bool precision_neg_degenerate = false;
  bool sensitivity_pos_degenerate = false;
  bool sensitivity_neg_degenerate = false;
  bool f1_pos_degenerate = false;
};

namespace detail {

inline double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
  degenerate = den == 0;
  return degenerate ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

/// F1 from counts, 2tp / (2tp + fp + fn); equals 2PR/(P+R) whenever defined,
/// and equal count ratios give bitwise-equal doubles.
inline double f1_from_counts(const ConfusionCounts& c) {
  const std::uint64_t den = 2 * c.tp + c.fp + c.fn;
  return den == 0 ? 0.0 : static_cast<double>(2 * c.tp) / static_cast<double>(den);
}

inline ClassMetrics class_metrics(const ConfusionCounts& c) {
  ClassMetrics m;
  m.precision_pos = detail::ratio(c.tp, c.tp + c.fp, m.precision_pos_degenerate);
  m.sensitivity_pos = detail::ratio(c.tp, c.tp + c.fn, m.sensitivity_pos_degenerate);
  m.precision_neg = detail::ratio(c.tn, c.tn + c.fn, m.precision_neg_degenerate);
  m.sensitivity_neg = detail::ratio(c.tn, c.tn + c.fp, m.sensitivity_neg_degenerate);
  m.f1_pos_degenerate = m.precision_pos_degenerate || m.sensitivity_pos_degenerate;
  m.f1_pos = f1_from_counts(c);
  return m;
}

struct ThresholdResult {
  double threshold = 0.0;
  double f1_at_threshold = 0.0;
  std::size_t candidates_evaluated = 0;
};

/// Candidates: min-1, midpoints of consecutive distinct sorted scores, max+1.
/// Returns the F1-maximizing candidate; the smallest one wins ties.
inline ThresholdResult select_threshold(std::span<const double> scores, std::span<const int> labels) {
  detail::check_lengths(scores, labels);
  std::uint64_t n_pos = 0;
  for (int y : labels) n_pos += (y == 1);
  if (n_pos == 0 || n_pos == labels.size()) {
    throw SingleClassError("threshold selection needs both classes in the validation split");
  }

  const auto order = detail::ascending_order(scores);
  // Sweep candidates upward. Before the first group everything is predicted
  // positive; crossing a group moves its members to the negative side.
  ConfusionCounts c{n_pos, labels.size() - n_pos, 0, 0};
  double lowest = scores[order.front()] - 1.0;
  if (!(lowest < scores[order.front()])) {
    lowest = std::nextafter(scores[order.front()], -std::numeric_limits<double>::infinity());
  }
  ThresholdResult best{lowest, f1_from_counts(c), 1};
  for (std::size_t g = 0; g < order.size();) {
    const double s = scores[order[g]];
    while (g < order.size() && scores[order[g]] == s) {
      if (labels[order[g]] == 1) {
        --c.tp;
        ++c.fn;
      } else {
        --c.fp;
        ++c.tn;
      }
      ++g;
    }
    double cand = g < order.size() ? s + (scores[order[g]] - s) / 2.0 : s + 1.0;
    // Adjacent doubles or huge magnitudes can round the candidate onto s.
    if (!(cand > s)) {
      cand = g < order.size() ? scores[order[g]]
                              : std::nextafter(s, std::numeric_limits<double>::infinity());
    }
    const double f1 = f1_from_counts(c);
    ++best.candidates_evaluated;
    if (f1 > best.f1_at_threshold) {
      best.threshold = cand;
      best.f1_at_threshold = f1;
    }
  }
  return best;
}

}  // namespace aucm
