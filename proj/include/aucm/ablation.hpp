#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "aucm/dataset.hpp"
#include "aucm/losses.hpp"
#include "aucm/report.hpp"
#include "aucm/training.hpp"
#include "aucm/trust.hpp"

namespace aucm {

/// Loss-function ablation: for each seed one dataset and split shared by all
/// arms; each arm trains from the same initial weights and is evaluated the
/// same way. The per-seed seed drives generation, splitting and training.
struct AblationConfig {
  SynthConfig synth{};
  SplitSpec split{};
  TrainConfig train{};
  ArchKind arch = ArchKind::Linear;
  std::vector<std::size_t> hidden;
  TrustConfig trust{};
  std::vector<std::uint64_t> seeds;
  std::vector<LossType> arms{LossType::Ce, LossType::Pairwise, LossType::Aucm};
  std::size_t jobs = 1;
};

struct ArmRun {
  std::uint64_t seed = 0;
  LossType arm = LossType::Ce;
  std::string train_hash;
  std::optional<EvalReport> report;
  std::optional<TrainHistory> history;
  std::string error;
};

struct AblationResult {
  AblationConfig config;
  std::vector<ArmRun> runs;  ///< seed-major, arms in config order
};

inline ArmRun run_arm(const AblationConfig& cfg, const DataSplits& splits, const std::string& train_hash,
                      std::uint64_t seed, LossType arm) {
  ArmRun run;
  run.seed = seed;
  run.arm = arm;
  run.train_hash = train_hash;
  try {
    TrainConfig tc = cfg.train;
    tc.loss.type = arm;
    tc.seed = seed;
    const Architecture arch{cfg.arch, splits.train.dim(),
                            cfg.arch == ArchKind::Mlp ? cfg.hidden : std::vector<std::size_t>{}};
    auto trained = train(splits.train, splits.val, arch, tc);
    run.report = evaluate(trained.best_model, splits.val, splits.test, cfg.trust);
    run.history = std::move(trained.history);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

inline AblationResult run_ablation(const AblationConfig& cfg) {
  if (cfg.seeds.size() < 2) throw InvalidInput("ablation needs at least 2 seeds");
  if (cfg.arms.empty()) throw InvalidInput("ablation needs at least one arm");

  struct SeedData {
    std::optional<DataSplits> splits;
    std::string hash;
    std::string error;
  };
  std::vector<SeedData> data(cfg.seeds.size());
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    try {
      SynthConfig sc = cfg.synth;
      sc.seed = cfg.seeds[s];
      SplitSpec sp = cfg.split;
      sp.seed = cfg.seeds[s];
      data[s].splits = stratified_split(gen_synthetic(sc), sp);
      data[s].hash = content_hash(data[s].splits->train);
    } catch (const std::exception& e) {
      data[s].error = e.what();
    }
  }

  AblationResult result{cfg, std::vector<ArmRun>(cfg.seeds.size() * cfg.arms.size())};
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < result.runs.size(); t = next++) {
      const std::size_t s = t / cfg.arms.size();
      const LossType arm = cfg.arms[t % cfg.arms.size()];
      if (!data[s].splits) {
        result.runs[t] = ArmRun{cfg.seeds[s], arm, "", std::nullopt, std::nullopt, data[s].error};
      } else {
        result.runs[t] = run_arm(cfg, *data[s].splits, data[s].hash, cfg.seeds[s], arm);
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, result.runs.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < jobs; ++k) pool.emplace_back(worker);
  }
  return result;
}

/// A seed is valid only if every arm on it succeeded.
inline std::vector<bool> valid_seeds(const AblationResult& r) {
  const std::size_t arms = r.config.arms.size();
  std::vector<bool> ok(r.config.seeds.size(), true);
  for (std::size_t t = 0; t < r.runs.size(); ++t) {
    if (!r.runs[t].report) ok[t / arms] = false;
  }
  return ok;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation (n - 1); 0 for n < 2
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

/// Metric values per arm over valid seeds, in seed order.
inline std::vector<double> arm_metric(const AblationResult& r, LossType arm,
                                      double (*get)(const EvalReport&)) {
  const auto ok = valid_seeds(r);
  const std::size_t arms = r.config.arms.size();
  std::vector<double> out;
  for (std::size_t t = 0; t < r.runs.size(); ++t) {
    if (ok[t / arms] && r.runs[t].arm == arm) out.push_back(get(*r.runs[t].report));
  }
  return out;
}

inline double metric_auc(const EvalReport& e) { return e.auc; }
inline double metric_f1(const EvalReport& e) { return e.metrics.f1_pos; }
inline double metric_trust(const EvalReport& e) { return e.positive_class_trust; }

/// Number of valid seeds on which `winner` scores strictly above `loser`.
inline std::size_t win_count(const AblationResult& r, LossType winner, LossType loser,
                             double (*get)(const EvalReport&)) {
  const auto w = arm_metric(r, winner, get);
  const auto l = arm_metric(r, loser, get);
  std::size_t wins = 0;
  for (std::size_t k = 0; k < w.size(); ++k) wins += w[k] > l[k];
  return wins;
}

inline std::string report_file_name(std::uint64_t seed, LossType arm) {
  return "report_seed" + std::to_string(seed) + "_" + to_string(arm) + ".json";
}

inline Json summary_json(const AblationResult& r, bool with_report_files) {
  const auto& cfg = r.config;
  const auto ok = valid_seeds(r);
  const std::size_t arms = cfg.arms.size();

  Json arm_names = Json::array();
  for (auto a : cfg.arms) arm_names.push_back(to_string(a));

  Json runs = Json::array();
  Json invalid = Json::array();
  for (std::size_t t = 0; t < r.runs.size(); ++t) {
    const auto& run = r.runs[t];
    Json j{{"seed", run.seed}, {"arm", to_string(run.arm)}, {"ok", run.report.has_value()},
           {"train_hash", run.train_hash}};
    if (run.report) {
      j["val_hash"] = run.report->val_data.hash;
      j["test_hash"] = run.report->test_data.hash;
      j["auc"] = run.report->auc;
      j["f1_pos"] = run.report->metrics.f1_pos;
      j["positive_class_trust"] = run.report->positive_class_trust;
      j["best_epoch"] = run.history->best_epoch;
      j["report"] = with_report_files ? Json(report_file_name(run.seed, run.arm)) : Json(nullptr);
    } else {
      j["error"] = run.error;
    }
    runs.push_back(std::move(j));
  }
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    if (ok[s]) continue;
    Json errors = Json::array();
    for (std::size_t k = 0; k < arms; ++k) {
      const auto& run = r.runs[s * arms + k];
      if (!run.report) errors.push_back(Json{{"arm", to_string(run.arm)}, {"error", run.error}});
    }
    invalid.push_back(Json{{"seed", cfg.seeds[s]}, {"errors", std::move(errors)}});
  }

  const std::pair<const char*, double (*)(const EvalReport&)> metrics[] = {
      {"auc", metric_auc}, {"f1_pos", metric_f1}, {"positive_class_trust", metric_trust}};
  Json per_arm = Json::object();
  for (auto a : cfg.arms) {
    Json block{{"valid_seeds", arm_metric(r, a, metric_auc).size()}};
    for (const auto& [name, get] : metrics) {
      const auto ms = mean_std(arm_metric(r, a, get));
      block[name] = Json{{"mean", ms.mean}, {"std", ms.std}};
    }
    per_arm[to_string(a)] = std::move(block);
  }
  Json wins = Json::object();
  for (const auto& [name, get] : metrics) {
    Json table = Json::object();
    for (auto a : cfg.arms) {
      for (auto b : cfg.arms) {
        if (a != b) table[to_string(a) + ">" + to_string(b)] = win_count(r, a, b, get);
      }
    }
    wins[name] = std::move(table);
  }

  Json config{{"n_total", cfg.synth.n_total},
              {"imbalance_ratio", cfg.synth.imbalance_ratio},
              {"dim", cfg.synth.dim},
              {"class_separation", cfg.synth.class_separation},
              {"split", {cfg.split.train_frac, cfg.split.val_frac, cfg.split.test_frac}},
              {"train", to_json(cfg.train, Architecture{cfg.arch, cfg.synth.dim, cfg.hidden})},
              {"trust", {{"alpha", cfg.trust.alpha_reward}, {"beta", cfg.trust.beta_penalty}}}};
  config["train"].erase("loss");
  config["train"].erase("seed");

  return Json{{"schema_version", kReportSchemaVersion},
              {"tool_version", kToolVersion},
              {"design",
               "loss-function ablation: arms share per-seed synthetic data, splits, architecture and initial "
               "weights, and differ only in the training objective; no representation-learning stage is varied"},
              {"config", std::move(config)},
              {"seeds", cfg.seeds},
              {"arms", std::move(arm_names)},
              {"runs", std::move(runs)},
              {"invalid_seeds", std::move(invalid)},
              {"per_arm", std::move(per_arm)},
              {"wins", std::move(wins)}};
}

}  // namespace aucm
