#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "aucm/gradcheck.hpp"
#include "aucm/losses.hpp"
#include "aucm/scorer.hpp"
#include "oracles.hpp"

using namespace aucm;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

}  // namespace

TEST(Scorer, ParameterCounts) {
  EXPECT_EQ(init_scorer(Architecture::linear(3), 1).params.size(), 4u);
  EXPECT_EQ(init_scorer(Architecture::mlp(2, {4}), 1).params.size(), 17u);
  EXPECT_EQ(Architecture::mlp(3, {5, 2}).parameter_count(), 3u * 5 + 5 + 5 * 2 + 2 + 2 + 1);
}

TEST(Scorer, InitDeterministicWithBoundedWeightsAndZeroBias) {
  const auto arch = Architecture::mlp(4, {3});
  const auto a = init_scorer(arch, 99);
  EXPECT_EQ(a, init_scorer(arch, 99));
  EXPECT_NE(a, init_scorer(arch, 100));
  // layer 0: 12 weights in [-1/2, 1/2], 3 zero biases; layer 1: 3 weights in [-1/sqrt3, 1/sqrt3], 1 bias.
  for (int k = 0; k < 12; ++k) EXPECT_LE(std::abs(a.params[k]), 0.5);
  for (int k = 12; k < 15; ++k) EXPECT_EQ(a.params[k], 0.0);
  for (int k = 15; k < 18; ++k) EXPECT_LE(std::abs(a.params[k]), 1.0 / std::sqrt(3.0));
  EXPECT_EQ(a.params[18], 0.0);
}

TEST(Scorer, RejectsBadArchitectures) {
  EXPECT_THROW(init_scorer(Architecture::mlp(2, {0}), 1), InvalidInput);
  EXPECT_THROW(init_scorer(Architecture::mlp(2, {}), 1), InvalidInput);
  EXPECT_THROW(init_scorer(Architecture::linear(0), 1), InvalidInput);
}

TEST(Scorer, LinearForwardByHand) {
  ScorerModel m{Architecture::linear(2), {1.0, -1.0, 0.0}};
  EXPECT_EQ(forward(m, Matrix(1, 2, {2.0, 3.0})), (std::vector<double>{-1.0}));
}

TEST(Scorer, ZeroParametersGiveZeroScores) {
  ScorerModel m{Architecture::mlp(3, {4}), std::vector<double>(21, 0.0)};
  for (double s : forward(m, random_matrix(5, 3, 1))) EXPECT_EQ(s, 0.0);
}

TEST(Scorer, MlpWithZeroOutputWeightsIsConstant) {
  auto m = init_scorer(Architecture::mlp(3, {4}), 5);
  // output layer: 4 weights then 1 bias at the end
  std::fill(m.params.end() - 5, m.params.end() - 1, 0.0);
  m.params.back() = 0.75;
  for (double s : forward(m, random_matrix(6, 3, 2))) EXPECT_EQ(s, 0.75);
}

TEST(Scorer, DimensionMismatch) {
  const auto m = init_scorer(Architecture::linear(3), 1);
  EXPECT_THROW(forward(m, Matrix(2, 2)), InvalidInput);
  EXPECT_THROW(backward(m, Matrix(2, 3), std::vector<double>{1.0}), InvalidInput);
}

TEST(Scorer, LinearBackwardIsInput) {
  const auto m = init_scorer(Architecture::linear(3), 1);
  const Matrix x(1, 3, {0.5, -2.0, 4.0});
  const auto g = backward(m, x, std::vector<double>{1.0});
  EXPECT_EQ(g.d_params, (std::vector<double>{0.5, -2.0, 4.0, 1.0}));
  const auto zero = backward(m, x, std::vector<double>{0.0});
  for (double v : zero.d_params) EXPECT_EQ(v, 0.0);
}

TEST(Scorer, MlpBackwardMatchesCentralDifferences) {
  const auto x = random_matrix(7, 3, 3);
  std::vector<double> upstream{0.3, -1.2, 0.8, 0.05, -0.4, 1.1, -0.7};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = init_scorer(Architecture::mlp(3, {5}), seed);
    for (std::size_t k = 0; k < m.params.size(); ++k) m.params[k] += 0.1 * std::sin(static_cast<double>(k + seed));
    const auto g = backward(m, x, upstream);
    auto f = [&](const std::vector<double>& p) {
      ScorerModel probe{m.arch, p};
      const auto s = forward(probe, x);
      return std::inner_product(s.begin(), s.end(), upstream.begin(), 0.0);
    };
    EXPECT_LT(oracle::max_rel_error(g.d_params, oracle::central_gradient(f, m.params, 1e-5)), 1e-5);
  }
}

TEST(Scorer, InputGradientMatchesCentralDifferences) {
  const auto m = init_scorer(Architecture::mlp(3, {4, 2}), 8);
  auto x = random_matrix(3, 3, 9);
  const std::vector<double> upstream{1.0, -0.5, 2.0};
  const auto g = backward(m, x, upstream, true);
  ASSERT_TRUE(g.d_inputs.has_value());
  std::vector<double> flat(x.data().begin(), x.data().end());
  auto f = [&](const std::vector<double>& v) {
    const auto s = forward(m, Matrix(3, 3, v));
    return std::inner_product(s.begin(), s.end(), upstream.begin(), 0.0);
  };
  const auto fd = oracle::central_gradient(f, flat, 1e-5);
  std::vector<double> analytic(g.d_inputs->data().begin(), g.d_inputs->data().end());
  EXPECT_LT(oracle::max_rel_error(analytic, fd), 1e-5);
}

TEST(Scorer, ForwardIsPermutationEquivariant) {
  const auto m = init_scorer(Architecture::mlp(4, {6}), 12);
  const auto x = random_matrix(20, 4, 13);
  const auto s = forward(m, x);
  std::vector<std::size_t> perm(20);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(4);
  rng.shuffle(std::span<std::size_t>(perm));
  const auto sp = forward(m, x.select_rows(perm));
  for (std::size_t k = 0; k < perm.size(); ++k) EXPECT_EQ(sp[k], s[perm[k]]);
}

TEST(FiniteDiffCheck, QuadraticToyLoss) {
  // L = sum_i (s_i - 1)^2 / 2 on a linear scorer is quadratic in the parameters.
  ScoreLoss quad = [](std::span<const double> s, std::span<const int>) {
    LossEval e{0.0, std::vector<double>(s.size())};
    for (std::size_t i = 0; i < s.size(); ++i) {
      e.value += 0.5 * (s[i] - 1.0) * (s[i] - 1.0);
      e.d_scores[i] = s[i] - 1.0;
    }
    return e;
  };
  const LabeledDataset ds{random_matrix(10, 3, 1), {1, 0, 1, 0, 1, 0, 1, 0, 1, 0}};
  EXPECT_LT(finite_diff_check(init_scorer(Architecture::linear(3), 2), quad, ds, 1e-5), 1e-8);
}

TEST(FiniteDiffCheck, CrossEntropyLinear) {
  const LabeledDataset ds{random_matrix(12, 4, 5), {1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0}};
  EXPECT_LT(finite_diff_check(init_scorer(Architecture::linear(4), 3), make_score_loss({LossType::Ce, 1.0}), ds), 1e-5);
}

TEST(FiniteDiffCheck, RejectsNonFiniteLoss) {
  ScoreLoss broken = [](std::span<const double> s, std::span<const int>) {
    return LossEval{std::nan(""), std::vector<double>(s.size(), 0.0)};
  };
  const LabeledDataset ds{random_matrix(3, 2, 1), {1, 0, 1}};
  EXPECT_THROW(finite_diff_check(init_scorer(Architecture::linear(2), 1), broken, ds), InvalidInput);
}

TEST(Checkpoint, RoundTripIsExact) {
  auto m = init_scorer(Architecture::mlp(3, {4, 2}), 77);
  m.params[0] = 0.1 + 0.2;  // not exactly representable at fewer digits
  m.params[1] = -1e-300;
  const auto text = serialize_checkpoint(m);
  EXPECT_EQ(parse_checkpoint(text), m);
  EXPECT_EQ(serialize_checkpoint(parse_checkpoint(text)), text);
  const auto lin = init_scorer(Architecture::linear(5), 1);
  EXPECT_EQ(parse_checkpoint(serialize_checkpoint(lin)), lin);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  const auto text = serialize_checkpoint(init_scorer(Architecture::linear(2), 1));
  EXPECT_THROW(parse_checkpoint("garbage\n"), ParseError);
  EXPECT_THROW(parse_checkpoint(text.substr(0, text.rfind('\n', text.size() - 2) + 1)), ParseError);
  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find(" 1\n"), 3, " 9\n");
  EXPECT_THROW(parse_checkpoint(wrong_version), ParseError);
}
