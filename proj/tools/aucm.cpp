// aucm: generate imbalanced data, train scorers, evaluate trust, run ablations.
//
//   aucm gen     --out DIR [synthetic-data flags]
//   aucm train   --out DIR [--config FILE] [--train CSV --val CSV] [training flags]
//   aucm eval    --checkpoint FILE --val CSV --test CSV [--history FILE] [--out FILE]
//   aucm ablate  [--seed S --seeds N --arms ce,aucm] [--out DIR]
//   aucm version
//
// Machine-readable output goes to stdout, diagnostics to stderr.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aucm/aucm.hpp"

namespace fs = std::filesystem;
using aucm::Json;

namespace {

struct GenOptions {
  aucm::SynthConfig synth;
  aucm::SplitSpec split;
  std::string out;
};

struct TrainOptions {
  std::string config_path;
  std::string out;
  std::optional<std::string> train_path, val_path, loss, arch, hidden;
  std::optional<double> margin, lr_primal, lr_dual;
  std::optional<std::size_t> epochs, batch_size;
  std::optional<std::uint64_t> seed;
};

struct EvalOptions {
  std::string checkpoint, val, test, history, out;
  std::optional<std::uint64_t> seed;
  double alpha = 1.0;
  double beta = 1.0;
};

struct AblateOptions {
  aucm::SynthConfig synth;
  aucm::SplitSpec split;
  aucm::TrainConfig train;
  std::string arch = "linear";
  std::string hidden;
  std::uint64_t seed = 1;
  std::size_t seeds = 10;
  std::string arms = "ce,pairwise,aucm";
  std::size_t jobs = 1;
  double alpha = 1.0;
  double beta = 1.0;
  std::string out;
};

void emit(const Json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    aucm::write_text_file(path, text);
  }
}

void add_synth_flags(CLI::App* cmd, aucm::SynthConfig& synth, aucm::SplitSpec& split) {
  cmd->add_option("--n-total", synth.n_total, "Total sample count")->capture_default_str();
  cmd->add_option("--ratio", synth.imbalance_ratio, "Negatives per positive")->capture_default_str();
  cmd->add_option("--dim", synth.dim, "Feature dimension")->capture_default_str();
  cmd->add_option("--separation", synth.class_separation, "Distance between class means")->capture_default_str();
  cmd->add_option("--train-frac", split.train_frac)->capture_default_str();
  cmd->add_option("--val-frac", split.val_frac)->capture_default_str();
  cmd->add_option("--test-frac", split.test_frac)->capture_default_str();
}

int run_gen(GenOptions opt, std::uint64_t seed) {
  opt.synth.seed = seed;
  opt.split.seed = seed;
  const auto ds = aucm::gen_synthetic(opt.synth);
  const auto splits = aucm::stratified_split(ds, opt.split);
  fs::create_directories(opt.out);

  Json files = Json::object();
  for (const auto& [name, part] : {std::pair{"train", &splits.train}, std::pair{"val", &splits.val},
                                   std::pair{"test", &splits.test}}) {
    const std::string text = aucm::to_csv(*part);
    aucm::write_text_file((fs::path(opt.out) / (std::string(name) + ".csv")).string(), text);
    files[name] = Json{{"file", std::string(name) + ".csv"},
                       {"n", part->size()},
                       {"n_pos", part->count_positive()},
                       {"n_neg", part->count_negative()},
                       {"hash", aucm::fnv1a_hex(text)}};
  }
  Json manifest{{"schema_version", aucm::kReportSchemaVersion},
                {"tool_version", aucm::kToolVersion},
                {"seed", seed},
                {"synth",
                 {{"n_total", opt.synth.n_total},
                  {"imbalance_ratio", opt.synth.imbalance_ratio},
                  {"dim", opt.synth.dim},
                  {"class_separation", opt.synth.class_separation},
                  {"n_pos", ds.count_positive()},
                  {"n_neg", ds.count_negative()},
                  {"hash", aucm::content_hash(ds)}}},
                {"split", {opt.split.train_frac, opt.split.val_frac, opt.split.test_frac}},
                {"files", std::move(files)}};
  emit(manifest, (fs::path(opt.out) / "manifest.json").string());
  emit(manifest, "");
  return 0;
}

int run_train(const TrainOptions& opt) {
  aucm::RunConfig rc;
  if (!opt.config_path.empty()) rc = aucm::load_run_config(opt.config_path);
  // Flags win over the config file; they go through the same key parser.
  std::map<std::string, std::string> overrides;
  auto put = [&](const char* key, const auto& v) {
    if (!v) return;
    std::ostringstream ss;
    ss << *v;
    overrides[key] = ss.str();
  };
  put("train", opt.train_path);
  put("val", opt.val_path);
  put("loss", opt.loss);
  put("arch", opt.arch);
  put("hidden", opt.hidden);
  put("epochs", opt.epochs);
  put("batch_size", opt.batch_size);
  put("seed", opt.seed);
  if (opt.margin) overrides["margin"] = aucm::format_17g(*opt.margin);
  if (opt.lr_primal) overrides["lr_primal"] = aucm::format_17g(*opt.lr_primal);
  if (opt.lr_dual) overrides["lr_dual"] = aucm::format_17g(*opt.lr_dual);
  rc = aucm::apply_config(overrides, rc);
  if (rc.train_path.empty() || rc.val_path.empty()) {
    throw aucm::InvalidInput("training needs 'train' and 'val' data paths (config keys or --train/--val)");
  }

  const auto train_ds = aucm::load_csv(rc.train_path);
  const auto val_ds = aucm::load_csv(rc.val_path);
  const auto arch = aucm::make_architecture(rc, train_ds.dim());
  const auto result = aucm::train(train_ds, val_ds, arch, rc.train);

  fs::create_directories(opt.out);
  aucm::save_checkpoint(result.best_model, (fs::path(opt.out) / "best.ckpt").string());
  aucm::save_checkpoint(result.final_model, (fs::path(opt.out) / "final.ckpt").string());

  Json config = aucm::to_json(rc.train, arch);
  config["train_hash"] = aucm::content_hash(train_ds);
  config["val_hash"] = aucm::content_hash(val_ds);
  Json history{{"schema_version", aucm::kReportSchemaVersion},
               {"tool_version", aucm::kToolVersion},
               {"seed", rc.train.seed},
               {"config", config},
               {"history", aucm::to_json(result.history)}};
  emit(history, (fs::path(opt.out) / "history.json").string());

  const auto& best = result.history.epochs[result.history.best_epoch];
  emit(Json{{"best_epoch", result.history.best_epoch},
            {"epochs", result.history.epochs.size()},
            {"best_val_accuracy", best.val_accuracy},
            {"best_val_auc", best.val_auc},
            {"final_alpha_dual", result.final_state.alpha_dual},
            {"files", {"best.ckpt", "final.ckpt", "history.json"}}},
       "");
  return 0;
}

int run_eval(const EvalOptions& opt) {
  const auto model = aucm::load_checkpoint(opt.checkpoint);
  const auto val = aucm::load_csv(opt.val);
  const auto test = aucm::load_csv(opt.test);
  const auto report = aucm::evaluate(model, val, test, {opt.alpha, opt.beta});

  aucm::ReportContext ctx;
  ctx.seed = opt.seed;
  ctx.config["checkpoint_hash"] = aucm::fnv1a_hex(aucm::serialize_checkpoint(model));
  if (!opt.history.empty()) {
    const auto h = Json::parse(aucm::read_text_file(opt.history));
    ctx.history = aucm::history_from_json(h.at("history"));
    ctx.config["training"] = h.at("config");
    if (!ctx.seed && h.contains("seed")) ctx.seed = h.at("seed").get<std::uint64_t>();
  }
  emit(aucm::report_json(report, ctx), opt.out);
  return 0;
}

int run_ablate(const AblateOptions& opt) {
  aucm::AblationConfig cfg;
  cfg.synth = opt.synth;
  cfg.split = opt.split;
  cfg.train = opt.train;
  cfg.trust = {opt.alpha, opt.beta};
  cfg.jobs = opt.jobs;
  aucm::RunConfig rc = aucm::apply_config({{"arch", opt.arch}});
  if (!opt.hidden.empty()) rc = aucm::apply_config({{"hidden", opt.hidden}}, rc);
  cfg.arch = rc.arch;
  cfg.hidden = rc.hidden;
  cfg.arms.clear();
  std::stringstream arms(opt.arms);
  for (std::string tok; std::getline(arms, tok, ',');) cfg.arms.push_back(aucm::parse_loss_type(tok));
  for (std::size_t k = 0; k < opt.seeds; ++k) cfg.seeds.push_back(opt.seed + k);

  const auto result = aucm::run_ablation(cfg);
  const bool write_files = !opt.out.empty();
  if (write_files) {
    fs::create_directories(opt.out);
    for (const auto& run : result.runs) {
      if (!run.report) continue;
      aucm::TrainConfig tc = cfg.train;
      tc.loss.type = run.arm;
      tc.seed = run.seed;
      aucm::ReportContext ctx;
      ctx.seed = run.seed;
      ctx.config = aucm::to_json(tc, aucm::Architecture{cfg.arch, cfg.synth.dim, cfg.hidden});
      ctx.config["train_hash"] = run.train_hash;
      ctx.history = run.history;
      emit(aucm::report_json(*run.report, ctx),
           (fs::path(opt.out) / aucm::report_file_name(run.seed, run.arm)).string());
    }
  }
  const Json summary = aucm::summary_json(result, write_files);
  if (write_files) emit(summary, (fs::path(opt.out) / "summary.json").string());
  emit(summary, "");

  for (const auto& inv : summary.at("invalid_seeds")) {
    std::cerr << "seed " << inv.at("seed") << " invalid: " << inv.at("errors").dump() << "\n";
  }
  return summary.at("invalid_seeds").empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AUC min-max margin training and question-answer trust evaluation"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic imbalanced dataset and split it");
  add_synth_flags(gen_cmd, gen.synth, gen.split);
  gen_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a scorer; writes checkpoints and history");
  train_cmd->add_option("--config", tr.config_path, "key = value config file");
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_option("--train", tr.train_path, "Training CSV");
  train_cmd->add_option("--val", tr.val_path, "Validation CSV");
  train_cmd->add_option("--loss", tr.loss, "ce | pairwise | aucm");
  train_cmd->add_option("--margin", tr.margin);
  train_cmd->add_option("--epochs", tr.epochs);
  train_cmd->add_option("--batch-size", tr.batch_size);
  train_cmd->add_option("--lr-primal", tr.lr_primal);
  train_cmd->add_option("--lr-dual", tr.lr_dual);
  train_cmd->add_option("--arch", tr.arch, "linear | mlp");
  train_cmd->add_option("--hidden", tr.hidden, "Hidden sizes, e.g. 16,8");
  train_cmd->add_option("--seed", tr.seed);

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint: metrics on test, trust on test positives");
  eval_cmd->add_option("--checkpoint", ev.checkpoint)->required();
  eval_cmd->add_option("--val", ev.val, "Validation CSV (threshold + calibration)")->required();
  eval_cmd->add_option("--test", ev.test, "Test CSV")->required();
  eval_cmd->add_option("--history", ev.history, "history.json from train, echoed into the report");
  eval_cmd->add_option("--alpha", ev.alpha, "Trust reward exponent")->capture_default_str();
  eval_cmd->add_option("--beta", ev.beta, "Trust penalty exponent")->capture_default_str();
  eval_cmd->add_option("--seed", ev.seed, "Seed to record in the report");
  eval_cmd->add_option("--out", ev.out, "Write the report here instead of stdout");

  AblateOptions ab;
  auto* ablate_cmd = app.add_subcommand("ablate", "Loss-function ablation over seeds on shared splits");
  add_synth_flags(ablate_cmd, ab.synth, ab.split);
  ablate_cmd->add_option("--seed", ab.seed, "First seed")->capture_default_str();
  ablate_cmd->add_option("--seeds", ab.seeds, "Number of consecutive seeds")->capture_default_str();
  ablate_cmd->add_option("--arms", ab.arms, "Comma-separated losses")->capture_default_str();
  ablate_cmd->add_option("--margin", ab.train.loss.margin)->capture_default_str();
  ablate_cmd->add_option("--epochs", ab.train.epochs)->capture_default_str();
  ablate_cmd->add_option("--batch-size", ab.train.batch_size)->capture_default_str();
  ablate_cmd->add_option("--lr-primal", ab.train.lr_primal)->capture_default_str();
  ablate_cmd->add_option("--lr-dual", ab.train.lr_dual)->capture_default_str();
  ablate_cmd->add_option("--arch", ab.arch)->capture_default_str();
  ablate_cmd->add_option("--hidden", ab.hidden);
  ablate_cmd->add_option("--alpha", ab.alpha)->capture_default_str();
  ablate_cmd->add_option("--beta", ab.beta)->capture_default_str();
  ablate_cmd->add_option("--jobs", ab.jobs, "Parallel runs")->capture_default_str();
  ablate_cmd->add_option("--out", ab.out, "Directory for per-run reports and summary.json");

  app.add_subcommand("version", "Print the tool version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return run_gen(gen, seed);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(ev);
    if (*ablate_cmd) return run_ablate(ab);
    std::cout << aucm::kToolVersion << "\n";
    return 0;
  } catch (const aucm::DivergenceError& e) {
    std::cerr << "error: training diverged (epoch " << e.epoch() << ", batch " << e.batch() << "): " << e.what()
              << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
