#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "aucm/dataset.hpp"
#include "aucm/error.hpp"
#include "aucm/scorer.hpp"

namespace aucm {

/// Value and gradient of a loss with respect to per-sample scores.
struct LossEval {
  double value = 0.0;
  std::vector<double> d_scores;
};

using ScoreLoss = std::function<LossEval(std::span<const double> scores, std::span<const int> labels)>;

/// max_k |analytic_k - fd_k| / max(1e-8, |fd_k|) where fd is the central
/// difference of f at x with the given step.
inline double max_relative_error(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> x, std::span<const double> analytic,
                                 double step) {
  if (analytic.size() != x.size()) throw InvalidInput("gradient length mismatch");
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + step;
    const double up = f(probe);
    probe[k] = orig - step;
    const double down = f(probe);
    probe[k] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw InvalidInput("non-finite loss during finite-difference probe");
    }
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic[k] - fd) / std::max(1e-8, std::abs(fd)));
  }
  return worst;
}

/// Checks backward() composed with a score-level loss against central
/// differences over every model parameter.
inline double finite_diff_check(const ScorerModel& model, const ScoreLoss& loss,
                                const LabeledDataset& data, double step = 1e-5) {
  const auto scores = forward(model, data.features);
  const auto eval = loss(scores, data.labels);
  if (!std::isfinite(eval.value)) throw InvalidInput("non-finite loss at the check point");
  const auto grad = backward(model, data.features, eval.d_scores);

  ScorerModel probe = model;
  auto f = [&](std::span<const double> params) {
    probe.params.assign(params.begin(), params.end());
    return loss(forward(probe, data.features), data.labels).value;
  };
  return max_relative_error(f, model.params, grad.d_params, step);
}

}  // namespace aucm
