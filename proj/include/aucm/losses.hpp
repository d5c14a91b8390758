#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "aucm/error.hpp"
#include "aucm/gradcheck.hpp"
#include "aucm/matrix.hpp"
#include "aucm/scorer.hpp"

namespace aucm {

enum class LossType { Ce, Pairwise, Aucm };

struct LossKind {
  LossType type = LossType::Aucm;
  double margin = 1.0;  ///< unused for Ce

  bool operator==(const LossKind&) const = default;
};

inline std::string to_string(LossType t) {
  switch (t) {
    case LossType::Ce: return "ce";
    case LossType::Pairwise: return "pairwise";
    case LossType::Aucm: return "aucm";
  }
  return "?";
}

inline LossType parse_loss_type(const std::string& s) {
  if (s == "ce") return LossType::Ce;
  if (s == "pairwise") return LossType::Pairwise;
  if (s == "aucm") return LossType::Aucm;
  throw InvalidInput("unknown loss '" + s + "' (expected ce, pairwise or aucm)");
}

/// Primal-dual auxiliaries of the min-max margin objective. `prevalence` is
/// the training split's positive fraction; it is reported, not optimized.
struct AucMarginState {
  double a = 0.0;
  double b = 0.0;
  double alpha_dual = 0.0;
  double margin = 1.0;
  double prevalence = 0.5;
};

namespace detail {

inline void check_scores(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty()) throw InvalidInput("empty score vector");
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
}

struct ClassSums {
  std::size_t n_pos = 0, n_neg = 0;
  double sum_pos = 0.0, sum_neg = 0.0;

  double mean_pos() const { return sum_pos / static_cast<double>(n_pos); }
  double mean_neg() const { return sum_neg / static_cast<double>(n_neg); }
};

inline ClassSums class_sums(std::span<const double> scores, std::span<const int> labels,
                            std::string_view who) {
  check_scores(scores, labels);
  ClassSums cs;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) {
      ++cs.n_pos;
      cs.sum_pos += scores[i];
    } else {
      ++cs.n_neg;
      cs.sum_neg += scores[i];
    }
  }
  if (cs.n_pos == 0 || cs.n_neg == 0) {
    throw SingleClassError(std::string(who) + ": batch must contain both classes");
  }
  return cs;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cross-entropy on raw scores

inline double softplus(double s) { return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))); }

inline double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

/// mean_i softplus(s_i) - y_i s_i, gradient (sigmoid(s) - y) / n.
inline LossEval ce_loss(std::span<const double> scores, std::span<const int> labels) {
  detail::check_scores(scores, labels);
  const double n = static_cast<double>(scores.size());
  LossEval out{0.0, std::vector<double>(scores.size())};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double y = labels[i] == 1 ? 1.0 : 0.0;
    out.value += softplus(scores[i]) - y * scores[i];
    out.d_scores[i] = (sigmoid(scores[i]) - y) / n;
  }
  out.value /= n;
  return out;
}

// ---------------------------------------------------------------------------
// Pairwise squared hinge

/// (1/(n+ n-)) sum over (pos i, neg j) of max(0, m - (s_i - s_j))^2.
inline LossEval pairwise_sq_hinge(std::span<const double> scores, std::span<const int> labels,
                                  double margin) {
  const auto cs = detail::class_sums(scores, labels, "pairwise_sq_hinge");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  const double scale = 1.0 / (static_cast<double>(cs.n_pos) * static_cast<double>(cs.n_neg));
  LossEval out{0.0, std::vector<double>(scores.size(), 0.0)};
  for (auto i : pos) {
    for (auto j : neg) {
      const double gap = margin - (scores[i] - scores[j]);
      if (gap <= 0.0) continue;
      out.value += gap * gap;
      out.d_scores[i] -= 2.0 * gap * scale;
      out.d_scores[j] += 2.0 * gap * scale;
    }
  }
  out.value *= scale;
  return out;
}

// ---------------------------------------------------------------------------
// AUC min-max margin objective
//
//   F = mean_pos (s - a)^2 + mean_neg (s - b)^2
//       + 2 alpha (m + mean_neg s - mean_pos s) - alpha^2
//
// minimized over (scorer, a, b) and maximized over alpha >= 0.

struct AucmGradient {
  double value = 0.0;
  std::vector<double> d_scores;
  double d_a = 0.0;
  double d_b = 0.0;
  double d_alpha = 0.0;
};

inline AucmGradient aucm_gradient(std::span<const double> scores, std::span<const int> labels,
                                  const AucMarginState& st) {
  const auto cs = detail::class_sums(scores, labels, "aucm_objective");
  const double np = static_cast<double>(cs.n_pos);
  const double nn = static_cast<double>(cs.n_neg);
  AucmGradient g;
  g.d_scores.resize(scores.size());
  double sq_pos = 0.0, sq_neg = 0.0, dev_pos = 0.0, dev_neg = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) {
      const double r = scores[i] - st.a;
      sq_pos += r * r;
      dev_pos += r;
      g.d_scores[i] = (2.0 * r - 2.0 * st.alpha_dual) / np;
    } else {
      const double r = scores[i] - st.b;
      sq_neg += r * r;
      dev_neg += r;
      g.d_scores[i] = (2.0 * r + 2.0 * st.alpha_dual) / nn;
    }
  }
  const double gap = st.margin + cs.mean_neg() - cs.mean_pos();
  g.value = sq_pos / np + sq_neg / nn + 2.0 * st.alpha_dual * gap - st.alpha_dual * st.alpha_dual;
  g.d_a = -2.0 * dev_pos / np;
  g.d_b = -2.0 * dev_neg / nn;
  g.d_alpha = 2.0 * gap - 2.0 * st.alpha_dual;
  return g;
}

inline double aucm_objective(std::span<const double> scores, std::span<const int> labels,
                             const AucMarginState& st) {
  if (st.alpha_dual < 0.0) throw InvalidInput("alpha_dual must be >= 0");
  return aucm_gradient(scores, labels, st).value;
}

struct AucmSaddle {
  double a = 0.0;
  double b = 0.0;
  double alpha = 0.0;
};

/// Closed-form inner solution for fixed scores: class means and the clamped gap.
inline AucmSaddle aucm_inner_optimum(std::span<const double> scores, std::span<const int> labels,
                                     double margin) {
  const auto cs = detail::class_sums(scores, labels, "aucm_inner_optimum");
  const double a = cs.mean_pos();
  const double b = cs.mean_neg();
  return {a, b, std::max(0.0, margin + b - a)};
}

/// min_{a,b} max_{alpha>=0} F for fixed scores:
/// (m + b* - a*)_+^2 + Var(s|pos) + Var(s|neg), population variances.
inline double aucm_saddle_value(std::span<const double> scores, std::span<const int> labels,
                                double margin) {
  const auto opt = aucm_inner_optimum(scores, labels, margin);
  double var_pos = 0.0, var_neg = 0.0;
  std::size_t np = 0, nn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) {
      var_pos += (scores[i] - opt.a) * (scores[i] - opt.a);
      ++np;
    } else {
      var_neg += (scores[i] - opt.b) * (scores[i] - opt.b);
      ++nn;
    }
  }
  return opt.alpha * opt.alpha + var_pos / static_cast<double>(np) + var_neg / static_cast<double>(nn);
}

/// Updates (a, b, alpha) for fixed scores: descent on a and b, projected
/// ascent on alpha. All gradients are taken at the pre-step state. Returns
/// the objective evaluation so callers can push d_scores into the scorer.
inline AucmGradient aucm_aux_step(AucMarginState& st, std::span<const double> scores,
                                  std::span<const int> labels, double lr_primal, double lr_dual) {
  if (!(lr_primal >= 0.0) || !(lr_dual >= 0.0)) throw InvalidInput("learning rates must be >= 0");
  auto g = aucm_gradient(scores, labels, st);
  st.a -= lr_primal * g.d_a;
  st.b -= lr_primal * g.d_b;
  st.alpha_dual = std::max(0.0, st.alpha_dual + lr_dual * g.d_alpha);
  return g;
}

/// One primal-dual step on a batch: forward, gradients of F at the current
/// point, then simultaneous update of scorer parameters, a, b and alpha.
/// Throws DivergenceError (epoch/batch -1) on any non-finite quantity; the
/// training loop rethrows with its own indices.
inline double pesg_step(ScorerModel& model, AucMarginState& st, const Matrix& features,
                        std::span<const int> labels, double lr_primal, double lr_dual) {
  const auto scores = forward(model, features);
  const AucMarginState before = st;
  const auto g = aucm_aux_step(st, scores, labels, lr_primal, lr_dual);
  const auto grad = backward(model, features, g.d_scores);
  if (!std::isfinite(g.value) || !all_finite(grad.d_params) || !std::isfinite(g.d_a) ||
      !std::isfinite(g.d_b) || !std::isfinite(g.d_alpha)) {
    st = before;
    throw DivergenceError("non-finite AUC-M objective or gradient (value " +
                              std::to_string(g.value) + ")",
                          -1, -1);
  }
  for (std::size_t k = 0; k < model.params.size(); ++k) model.params[k] -= lr_primal * grad.d_params[k];
  return g.value;
}

/// Score-level loss for CE and pairwise kinds, as used by the training loop
/// and the finite-difference harness.
inline ScoreLoss make_score_loss(const LossKind& kind) {
  switch (kind.type) {
    case LossType::Ce:
      return [](std::span<const double> s, std::span<const int> y) { return ce_loss(s, y); };
    case LossType::Pairwise:
      return [m = kind.margin](std::span<const double> s, std::span<const int> y) {
        return pairwise_sq_hinge(s, y, m);
      };
    case LossType::Aucm:
      break;
  }
  throw InvalidInput("AUC-M has auxiliary state; use aucm_gradient/pesg_step");
}

}  // namespace aucm
