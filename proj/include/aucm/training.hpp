#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aucm/batching.hpp"
#include "aucm/dataset.hpp"
#include "aucm/error.hpp"
#include "aucm/losses.hpp"
#include "aucm/metrics.hpp"
#include "aucm/scorer.hpp"

namespace aucm {

struct TrainConfig {
  LossKind loss{};
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double lr_primal = 0.05;
  double lr_dual = 0.05;  ///< AUC-M only
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw InvalidInput("epochs must be >= 1");
    if (batch_size < 2) throw InvalidInput("batch_size must be >= 2");
    if (!(lr_primal >= 0.0) || !std::isfinite(lr_primal)) throw InvalidInput("lr_primal must be >= 0");
    if (!(lr_dual >= 0.0) || !std::isfinite(lr_dual)) throw InvalidInput("lr_dual must be >= 0");
    if (loss.type != LossType::Ce && !(loss.margin > 0.0)) throw InvalidInput("margin must be > 0");
  }
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double val_auc = 0.0;
  double a = 0.0;
  double b = 0.0;
  double alpha_dual = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  ///< 0-based

  bool operator==(const TrainHistory&) const = default;
};

struct TrainResult {
  ScorerModel best_model;
  ScorerModel final_model;
  TrainHistory history;
  AucMarginState final_state;
};

/// Accuracy with the sign rule: positive iff score >= 0.
inline double sign_accuracy(std::span<const double> scores, std::span<const int> labels) {
  const auto c = confusion(scores, labels, 0.0);
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// Minibatch training with stratified batches. AUC-M runs pesg_step on every
/// batch; CE and pairwise run plain gradient descent. The snapshot with the
/// highest validation sign-rule accuracy is kept (earliest epoch on ties).
inline TrainResult train(const LabeledDataset& train_ds, const LabeledDataset& val_ds,
                         const Architecture& arch, const TrainConfig& cfg) {
  cfg.validate();
  arch.validate();
  require_both_classes(train_ds, "training split");
  require_both_classes(val_ds, "validation split");
  if (train_ds.dim() != arch.input_dim || val_ds.dim() != arch.input_dim) {
    throw InvalidInput("dataset dimension does not match architecture input dimension");
  }

  TrainResult out;
  ScorerModel model = init_scorer(arch, cfg.seed);
  AucMarginState state;
  state.margin = cfg.loss.margin;
  state.prevalence = static_cast<double>(train_ds.count_positive()) / static_cast<double>(train_ds.size());

  const bool is_aucm = cfg.loss.type == LossType::Aucm;
  const ScoreLoss score_loss = is_aucm ? ScoreLoss{} : make_score_loss(cfg.loss);
  double best_acc = -1.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = stratified_batches(train_ds, cfg.batch_size, cfg.seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Matrix x = train_ds.features.select_rows(batches[bi]);
      std::vector<int> y;
      y.reserve(batches[bi].size());
      for (auto i : batches[bi]) y.push_back(train_ds.labels[i]);

      const std::string where = " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi);
      if (is_aucm) {
        try {
          loss_sum += pesg_step(model, state, x, y, cfg.lr_primal, cfg.lr_dual);
        } catch (const DivergenceError& e) {
          throw DivergenceError(e.what() + where, static_cast<int>(epoch), static_cast<int>(bi));
        }
      } else {
        const auto eval = score_loss(forward(model, x), y);
        const auto grad = backward(model, x, eval.d_scores);
        if (!std::isfinite(eval.value) || !all_finite(grad.d_params)) {
          throw DivergenceError("non-finite " + to_string(cfg.loss.type) + " loss or gradient" + where,
                                static_cast<int>(epoch), static_cast<int>(bi));
        }
        for (std::size_t k = 0; k < model.params.size(); ++k) {
          model.params[k] -= cfg.lr_primal * grad.d_params[k];
        }
        loss_sum += eval.value;
      }
    }

    const auto val_scores = forward(model, val_ds.features);
    if (!all_finite(val_scores)) {
      throw DivergenceError("non-finite validation scores after epoch " + std::to_string(epoch),
                            static_cast<int>(epoch), -1);
    }
    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(batches.size());
    rec.val_accuracy = sign_accuracy(val_scores, val_ds.labels);
    rec.val_auc = exact_auc(val_scores, val_ds.labels);
    rec.a = state.a;
    rec.b = state.b;
    rec.alpha_dual = state.alpha_dual;
    out.history.epochs.push_back(rec);

    if (rec.val_accuracy > best_acc) {
      best_acc = rec.val_accuracy;
      out.best_model = model;
      out.history.best_epoch = epoch;
    }
  }
  out.final_model = std::move(model);
  out.final_state = state;
  return out;
}

}  // namespace aucm
