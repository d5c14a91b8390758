#include <gtest/gtest.h>

#include <map>
#include <set>

#include "aucm/batching.hpp"
#include "aucm/config.hpp"
#include "aucm/training.hpp"

using namespace aucm;

namespace {

std::vector<int> make_labels(std::size_t pos, std::size_t neg) {
  std::vector<int> y(pos, 1);
  y.resize(pos + neg, 0);
  return y;
}

DataSplits default_splits(double sep, std::uint64_t seed, std::size_t n = 2000) {
  return stratified_split(gen_synthetic({n, 6.39, 8, sep, seed}), {0.7, 0.15, 0.15, seed});
}

}  // namespace

TEST(StratifiedBatches, EvenClassesSplitEvenly) {
  const auto y = make_labels(6, 6);
  const auto batches = stratified_batches(std::span<const int>(y), 4, 1, 0);
  ASSERT_EQ(batches.size(), 3u);
  std::multiset<std::size_t> seen;
  for (const auto& b : batches) {
    std::size_t pos = 0;
    for (auto i : b) pos += y[i];
    EXPECT_EQ(pos, 2u);
    EXPECT_EQ(b.size(), 4u);
    seen.insert(b.begin(), b.end());
  }
  EXPECT_EQ(seen.size(), 12u);
  EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), 12u);
}

TEST(StratifiedBatches, ScarcePositivesStillInEveryBatch) {
  const auto y = make_labels(2, 12);
  const auto batches = stratified_batches(std::span<const int>(y), 7, 3, 0);
  ASSERT_EQ(batches.size(), 2u);
  for (const auto& b : batches) {
    std::size_t pos = 0;
    for (auto i : b) pos += y[i];
    EXPECT_GE(pos, 1u);
  }
}

TEST(StratifiedBatches, OversamplingBoundsReuse) {
  // 2 positives over ceil(32/4) = 8 batches: one positive per batch, each
  // positive used at most ceil(8/2) = 4 times; negatives used exactly once.
  const auto y = make_labels(2, 30);
  for (std::uint64_t epoch = 0; epoch < 20; ++epoch) {
    const auto batches = stratified_batches(std::span<const int>(y), 4, 11, epoch);
    ASSERT_EQ(batches.size(), 8u);
    std::map<std::size_t, int> uses;
    for (const auto& b : batches) {
      std::size_t pos = 0;
      for (auto i : b) {
        pos += y[i];
        ++uses[i];
      }
      EXPECT_EQ(pos, 1u);
    }
    for (const auto& [i, count] : uses) EXPECT_LE(count, y[i] ? 4 : 1);
    EXPECT_EQ(uses.size(), 32u);
  }
}

TEST(StratifiedBatches, DeterministicPerSeedAndEpoch) {
  const auto y = make_labels(20, 80);
  const auto a = stratified_batches(std::span<const int>(y), 16, 5, 3);
  EXPECT_EQ(a, stratified_batches(std::span<const int>(y), 16, 5, 3));
  EXPECT_NE(a, stratified_batches(std::span<const int>(y), 16, 5, 4));
  EXPECT_NE(a, stratified_batches(std::span<const int>(y), 16, 6, 3));
}

TEST(StratifiedBatches, Errors) {
  const auto y = make_labels(3, 3);
  EXPECT_THROW(stratified_batches(std::span<const int>(y), 1, 0, 0), InvalidInput);
  const auto one_class = make_labels(0, 5);
  EXPECT_THROW(stratified_batches(std::span<const int>(one_class), 2, 0, 0), SingleClassError);
}

TEST(StratifiedBatches, BothClassesProperty) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t pos = 1 + rng.below(40);
    const std::size_t neg = 1 + rng.below(200);
    const std::size_t bs = 2 + rng.below(70);
    auto y = make_labels(pos, neg);
    rng.shuffle(std::span<int>(y));
    const auto batches = stratified_batches(std::span<const int>(y), bs, rng.next_u64(), trial);
    std::set<std::size_t> covered;
    for (const auto& b : batches) {
      std::size_t p = 0;
      for (auto i : b) p += y[i];
      ASSERT_GE(p, 1u);
      ASSERT_LT(p, b.size());
      covered.insert(b.begin(), b.end());
    }
    ASSERT_EQ(covered.size(), y.size());  // every sample used each epoch
  }
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  const auto sp = default_splits(1.5, 1, 400);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.lr_primal = 0.0;
  cfg.lr_dual = 0.0;
  for (auto type : {LossType::Ce, LossType::Pairwise, LossType::Aucm}) {
    cfg.loss.type = type;
    const auto r = train(sp.train, sp.val, Architecture::linear(8), cfg);
    EXPECT_EQ(r.final_model, init_scorer(Architecture::linear(8), cfg.seed));
  }
}

TEST(Train, SeparableDataReachesHighAccuracy) {
  const auto sp = default_splits(4.0, 2);
  TrainConfig cfg;
  cfg.loss.type = LossType::Ce;
  const auto r = train(sp.train, sp.val, Architecture::linear(8), cfg);
  EXPECT_GE(r.history.epochs[r.history.best_epoch].val_accuracy, 0.98);
}

TEST(Train, BitIdenticalHistory) {
  const auto sp = default_splits(1.5, 3, 600);
  TrainConfig cfg;
  cfg.epochs = 15;
  for (auto type : {LossType::Ce, LossType::Pairwise, LossType::Aucm}) {
    cfg.loss.type = type;
    const auto a = train(sp.train, sp.val, Architecture::mlp(8, {4}), cfg);
    const auto b = train(sp.train, sp.val, Architecture::mlp(8, {4}), cfg);
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(a.best_model, b.best_model);
    EXPECT_EQ(a.history.epochs.size(), 15u);
  }
}

TEST(Train, CheckpointDominatesFinal) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto sp = default_splits(1.5, seed, 800);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.seed = seed;
    const auto r = train(sp.train, sp.val, Architecture::linear(8), cfg);
    const double best = sign_accuracy(forward(r.best_model, sp.val.features), sp.val.labels);
    const double last = sign_accuracy(forward(r.final_model, sp.val.features), sp.val.labels);
    EXPECT_GE(best, last);
    EXPECT_EQ(best, r.history.epochs[r.history.best_epoch].val_accuracy);
    for (std::size_t e = 0; e < r.history.best_epoch; ++e) {
      EXPECT_LT(r.history.epochs[e].val_accuracy, best);  // earliest maximizer
    }
  }
}

TEST(Train, AlphaDualRecordedNonNegative) {
  const auto sp = default_splits(1.5, 5, 600);
  TrainConfig cfg;
  cfg.epochs = 40;
  const auto r = train(sp.train, sp.val, Architecture::linear(8), cfg);
  double max_alpha = 0.0;
  for (const auto& e : r.history.epochs) {
    EXPECT_GE(e.alpha_dual, 0.0);
    max_alpha = std::max(max_alpha, e.alpha_dual);
  }
  EXPECT_GT(max_alpha, 0.0);
  EXPECT_NEAR(r.final_state.prevalence, 0.135, 0.01);
}

TEST(Train, FullBatchConvexLossIsMonotone) {
  const auto sp = default_splits(1.5, 6, 300);
  TrainConfig cfg;
  cfg.loss.type = LossType::Ce;
  cfg.epochs = 100;
  cfg.batch_size = sp.train.size();
  cfg.lr_primal = 1e-3;
  const auto r = train(sp.train, sp.val, Architecture::linear(8), cfg);
  for (std::size_t e = 1; e < r.history.epochs.size(); ++e) {
    EXPECT_LE(r.history.epochs[e].train_loss, r.history.epochs[e - 1].train_loss);
  }
}

TEST(Train, DivergenceNamesEpochAndBatch) {
  const auto sp = default_splits(1.5, 7, 300);
  TrainConfig cfg;
  cfg.loss.type = LossType::Pairwise;
  cfg.lr_primal = 1e300;
  try {
    train(sp.train, sp.val, Architecture::linear(8), cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.epoch(), 0);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
  cfg.loss.type = LossType::Aucm;
  cfg.lr_dual = 1e300;
  EXPECT_THROW(train(sp.train, sp.val, Architecture::linear(8), cfg), DivergenceError);
}

TEST(Train, RejectsBadInputs) {
  const auto sp = default_splits(1.5, 8, 300);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(sp.train, sp.val, Architecture::linear(8), cfg), InvalidInput);
  cfg.epochs = 1;
  cfg.batch_size = 1;
  EXPECT_THROW(train(sp.train, sp.val, Architecture::linear(8), cfg), InvalidInput);
  cfg.batch_size = 8;
  EXPECT_THROW(train(sp.train, sp.val, Architecture::linear(3), cfg), InvalidInput);
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < sp.val.size(); ++i) {
    if (sp.val.labels[i] == 0) neg.push_back(i);
  }
  const auto negatives_only = sp.val.subset(neg);
  ASSERT_EQ(negatives_only.count_positive(), 0u);
  EXPECT_THROW(train(sp.train, negatives_only, Architecture::linear(8), cfg), SingleClassError);
}

TEST(Config, ParsesKeyValues) {
  const auto kv = parse_key_values("# comment\nloss = pairwise\r\n\n margin=0.5  # trailing\nhidden = 8, 4\n");
  const auto rc = apply_config(kv);
  EXPECT_EQ(rc.train.loss.type, LossType::Pairwise);
  EXPECT_EQ(rc.train.loss.margin, 0.5);
  EXPECT_EQ(rc.hidden, (std::vector<std::size_t>{8, 4}));
}

TEST(Config, AllKeysAccepted) {
  const auto rc = apply_config(parse_key_values(
      "loss=ce\nmargin=2\nepochs=3\nbatch_size=5\nlr_primal=0.5\nlr_dual=0.25\nseed=9\narch=mlp\nhidden=3\n"
      "train=a.csv\nval=b.csv\n"));
  EXPECT_EQ(rc.train.epochs, 3u);
  EXPECT_EQ(rc.train.batch_size, 5u);
  EXPECT_EQ(rc.train.lr_dual, 0.25);
  EXPECT_EQ(rc.train.seed, 9u);
  EXPECT_EQ(rc.arch, ArchKind::Mlp);
  EXPECT_EQ(rc.train_path, "a.csv");
  EXPECT_EQ(rc.val_path, "b.csv");
  EXPECT_EQ(config_keys().size(), 11u);
}

TEST(Config, Errors) {
  try {
    apply_config(parse_key_values("epochs = 3\nlearning_rate = 0.1\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
  }
  EXPECT_THROW(parse_key_values("epochs 3\n"), ParseError);
  EXPECT_THROW(parse_key_values("epochs = 3\nepochs = 4\n"), ParseError);
  EXPECT_THROW(apply_config(parse_key_values("epochs = three\n")), ParseError);
  EXPECT_THROW(apply_config(parse_key_values("loss = focal\n")), ParseError);
  EXPECT_THROW(apply_config(parse_key_values("arch = cnn\n")), ParseError);
}
