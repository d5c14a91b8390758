#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aucm/dataset.hpp"
#include "aucm/metrics.hpp"
#include "aucm/scorer.hpp"
#include "aucm/training.hpp"
#include "aucm/trust.hpp"

namespace aucm {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

using Json = nlohmann::ordered_json;

struct DatasetFingerprint {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::string hash;
};

inline DatasetFingerprint fingerprint(const LabeledDataset& ds) {
  return {ds.size(), ds.dim(), ds.count_positive(), ds.count_negative(), content_hash(ds)};
}

struct EvalReport {
  DatasetFingerprint val_data;
  DatasetFingerprint test_data;
  double auc = 0.0;
  ThresholdResult threshold;
  ConfusionCounts counts;
  ClassMetrics metrics;
  std::vector<std::pair<double, double>> roc;
  TrustConfig trust_cfg;
  ConfidenceCalibration calibration;
  double positive_class_trust = 0.0;
  std::optional<double> negative_class_trust;
  double overall_trust = 0.0;
  std::vector<TrustRecord> records;
};

/// Threshold on validation scores, everything else on test scores.
inline EvalReport evaluate(const ScorerModel& model, const LabeledDataset& val, const LabeledDataset& test,
                           const TrustConfig& trust_cfg = {}) {
  trust_cfg.validate();
  require_both_classes(val, "validation split");
  if (test.count_positive() == 0) {
    throw SingleClassError("test split has no positive samples; positive-class trust is undefined");
  }
  require_both_classes(test, "test split");

  const auto val_scores = forward(model, val.features);
  const auto test_scores = forward(model, test.features);
  if (!all_finite(val_scores) || !all_finite(test_scores)) throw InvalidInput("model produced non-finite scores");

  EvalReport r;
  r.val_data = fingerprint(val);
  r.test_data = fingerprint(test);
  r.auc = exact_auc(test_scores, test.labels);
  r.threshold = select_threshold(val_scores, val.labels);
  r.counts = confusion(test_scores, test.labels, r.threshold.threshold);
  r.metrics = class_metrics(r.counts);
  r.roc = roc_points(test_scores, test.labels);
  r.trust_cfg = trust_cfg;
  r.calibration = fit_calibration(val_scores, r.threshold.threshold);
  r.records = trust_records(test_scores, test.labels, r.calibration, trust_cfg);
  r.positive_class_trust = class_trust(r.records, 1);
  if (test.count_negative() > 0) r.negative_class_trust = class_trust(r.records, 0);
  r.overall_trust = overall_trust(r.records);
  return r;
}

inline Json to_json(const DatasetFingerprint& f) {
  return Json{{"n", f.n}, {"d", f.d}, {"n_pos", f.n_pos}, {"n_neg", f.n_neg}, {"hash", f.hash}};
}

inline Json to_json(const TrainHistory& h) {
  Json epochs = Json::array();
  for (std::size_t k = 0; k < h.epochs.size(); ++k) {
    const auto& e = h.epochs[k];
    epochs.push_back(Json{{"epoch", k},
                          {"train_loss", e.train_loss},
                          {"val_accuracy", e.val_accuracy},
                          {"val_auc", e.val_auc},
                          {"a", e.a},
                          {"b", e.b},
                          {"alpha_dual", e.alpha_dual}});
  }
  return Json{{"best_epoch", h.best_epoch}, {"epochs", std::move(epochs)}};
}

inline TrainHistory history_from_json(const Json& j) {
  TrainHistory h;
  h.best_epoch = j.at("best_epoch").get<std::size_t>();
  for (const auto& e : j.at("epochs")) {
    h.epochs.push_back({e.at("train_loss").get<double>(), e.at("val_accuracy").get<double>(),
                        e.at("val_auc").get<double>(), e.at("a").get<double>(), e.at("b").get<double>(),
                        e.at("alpha_dual").get<double>()});
  }
  return h;
}

inline Json trust_json(const EvalReport& r) {
  Json records = Json::array();
  for (const auto& rec : r.records) {
    records.push_back(Json{{"idx", rec.index},
                           {"pred", rec.predicted},
                           {"truth", rec.truth},
                           {"confidence", rec.confidence},
                           {"qa_trust", rec.qa_trust}});
  }
  Json extras{{"note", "not part of the positive-class score; diagnostics only"},
              {"negative_class_trust", r.negative_class_trust ? Json(*r.negative_class_trust) : Json(nullptr)},
              {"overall_trust", r.overall_trust}};
  return Json{{"alpha", r.trust_cfg.alpha_reward},
              {"beta", r.trust_cfg.beta_penalty},
              {"threshold", r.calibration.threshold},
              {"positive_class_trust", r.positive_class_trust},
              {"calibration",
               {{"s_min", r.calibration.s_min}, {"threshold", r.calibration.threshold}, {"s_max", r.calibration.s_max}}},
              {"extras", std::move(extras)},
              {"records", std::move(records)}};
}

inline ConfidenceCalibration calibration_from_json(const Json& report) {
  const auto& c = report.at("trust").at("calibration");
  return {c.at("s_min").get<double>(), c.at("threshold").get<double>(), c.at("s_max").get<double>()};
}

/// Extra context echoed into the report so it pins down reproduction.
struct ReportContext {
  std::optional<std::uint64_t> seed;
  Json config = Json::object();
  std::optional<TrainHistory> history;
};

inline Json report_json(const EvalReport& r, const ReportContext& ctx = {}) {
  const auto& m = r.metrics;
  Json roc = Json::array();
  for (const auto& [fpr, tpr] : r.roc) roc.push_back(Json::array({fpr, tpr}));
  Json metrics{{"auc", r.auc},
               {"threshold", r.threshold.threshold},
               {"precision_pos", m.precision_pos},
               {"precision_neg", m.precision_neg},
               {"sensitivity_pos", m.sensitivity_pos},
               {"sensitivity_neg", m.sensitivity_neg},
               {"f1_pos", m.f1_pos},
               {"degenerate",
                {{"precision_pos", m.precision_pos_degenerate},
                 {"precision_neg", m.precision_neg_degenerate},
                 {"sensitivity_pos", m.sensitivity_pos_degenerate},
                 {"sensitivity_neg", m.sensitivity_neg_degenerate},
                 {"f1_pos", m.f1_pos_degenerate}}},
               {"val_f1_at_threshold", r.threshold.f1_at_threshold},
               {"threshold_candidates", r.threshold.candidates_evaluated},
               {"confusion", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
               {"roc", std::move(roc)}};

  Json j{{"schema_version", kReportSchemaVersion},
         {"tool_version", kToolVersion},
         {"seed", ctx.seed ? Json(*ctx.seed) : Json(nullptr)},
         {"config", ctx.config},
         {"data", {{"val", to_json(r.val_data)}, {"test", to_json(r.test_data)}}},
         {"metrics", std::move(metrics)},
         {"trust", trust_json(r)}};
  if (ctx.history) {
    j["history"] = Json{{"best_epoch", ctx.history->best_epoch}, {"epochs", ctx.history->epochs.size()}};
  }
  return j;
}

inline Json to_json(const TrainConfig& cfg, const Architecture& arch) {
  return Json{{"loss", to_string(cfg.loss.type)},
              {"margin", cfg.loss.margin},
              {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"lr_primal", cfg.lr_primal},
              {"lr_dual", cfg.lr_dual},
              {"seed", cfg.seed},
              {"arch", arch.kind == ArchKind::Linear ? "linear" : "mlp"},
              {"input_dim", arch.input_dim},
              {"hidden", arch.hidden}};
}

}  // namespace aucm
