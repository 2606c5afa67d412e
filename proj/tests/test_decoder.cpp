// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "posecast/decoder.hpp"
#include "posecast/error.hpp"
#include "support.hpp"

namespace posecast {
namespace {

using testing::random_matrix;
using testing::random_pose;
using testing::random_sequence;

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.d_model = 16;
  cfg.n_heads = 2;
  cfg.n_layers = 2;
  cfg.feedforward_width = 24;
  cfg.context_width = 6;
  cfg.horizon = 10;
  return cfg;
}

// Gives the zero-initialized head random weights so outputs depend on the input rows.
void randomize_head(PoseDecoder& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto* p : model.parameters())
    if (p->name.rfind("decoder.head", 0) == 0) p->value = random_matrix(p->value.rows(), p->value.cols(), rng, 0.3);
}

ContextFeatures random_context(int rows, int cols, std::mt19937_64& rng) {
  return ContextFeatures(random_matrix(rows, cols, rng));
}

TEST(Inputs, PlaceholderLayout) {
  std::mt19937_64 rng(1);
  const Pose p0 = random_pose(13, rng);
  const std::vector<double> token(26, 0.25);
  const auto one = build_input_placeholder(p0, 1, token);
  ASSERT_EQ(one.horizon(), 1);
  for (int i = 0; i < 26; ++i) EXPECT_EQ(one.rows(0, i), p0[i]);

  const auto in = build_input_placeholder(p0, 45, token);
  ASSERT_EQ(in.horizon(), 45);
  for (int t = 1; t < 45; ++t)
    for (int i = 0; i < 26; ++i) EXPECT_EQ(in.rows(t, i), 0.25);
  EXPECT_THROW(build_input_placeholder(p0, 0, token), ContractError);
}

TEST(Inputs, TrainingAndInferencePathsAgree) {
  PoseDecoder model(small_config(), 3);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> horizon(1, 60);
  for (int trial = 0; trial < 100; ++trial) {
    const Pose p0 = random_pose(13, rng);
    const int T = horizon(rng);
    const auto train_side = build_input_placeholder(p0, T, model.prd_token());
    const auto infer_side = model.placeholder_input(p0, T);
    EXPECT_EQ(train_side.mode, infer_side.mode);
    EXPECT_TRUE((train_side.rows.array() == infer_side.rows.array()).all());
  }
}

TEST(Inputs, NextTokenTeacherForcing) {
  std::mt19937_64 rng(3);
  const Pose p0 = random_pose(13, rng);
  const auto gt = random_sequence(13, 7, rng);
  const auto in = build_input_ntp(p0, gt);
  ASSERT_EQ(in.horizon(), 7);
  for (int t = 0; t < 7; ++t)
    for (int i = 0; i < 26; ++i) EXPECT_EQ(in.rows(t, i), t == 0 ? p0[i] : gt[t - 1][i]);

  const auto single = build_input_ntp(p0, gt, 1);
  EXPECT_TRUE((single.rows.array() == build_input_placeholder(p0, 1, std::vector<double>(26, 9.0)).rows.array()).all());
  const auto constant = build_input_ntp(p0, PoseSequence(std::vector<Pose>(5, p0)));
  for (int t = 1; t < 5; ++t) EXPECT_TRUE((constant.rows.row(t).array() == constant.rows.row(0).array()).all());
}

TEST(Decoder, ZeroHeadRepeatsInitialPose) {
  PoseDecoder model(small_config(), 4);
  std::mt19937_64 rng(4);
  const Pose p0 = random_pose(13, rng);
  const auto seq = model.generate(p0, random_context(1, 6, rng), 10);
  ASSERT_EQ(seq.horizon(), 10u);
  for (const auto& f : seq.frames()) EXPECT_EQ(f, p0);
}

TEST(Decoder, SingleForwardAndAutoregressiveCounts) {
  PoseDecoder model(small_config(), 5);
  std::mt19937_64 rng(5);
  const Pose p0 = random_pose(13, rng);
  const auto ctx = random_context(1, 6, rng);
  for (int T : {1, 10, 45}) {
    model.reset_forward_calls();
    model.generate(p0, ctx, T);
    EXPECT_EQ(model.forward_calls(), 1u) << T;
    model.reset_forward_calls();
    model.generate_autoregressive(p0, ctx, T);
    EXPECT_EQ(model.forward_calls(), static_cast<std::uint64_t>(T)) << T;
  }
}

TEST(Decoder, DeterministicGeneration) {
  PoseDecoder a(small_config(), 6), b(small_config(), 6);
  randomize_head(a, 1);
  randomize_head(b, 1);
  std::mt19937_64 rng(6);
  const Pose p0 = random_pose(13, rng);
  const auto ctx = random_context(2, 6, rng);
  EXPECT_EQ(a.generate(p0, ctx, 12), b.generate(p0, ctx, 12));
  EXPECT_EQ(a.generate(p0, ctx, 12), a.generate(p0, ctx, 12));
}

TEST(Decoder, PositionalEncodingDistinguishesPlaceholderRows) {
  auto cfg = small_config();
  cfg.attention = AttentionMode::full;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Pose p0 = random_pose(13, rng);
    const auto ctx = random_context(1, 6, rng);
    cfg.positional_encoding = false;
    PoseDecoder off(cfg, 10 + trial);
    randomize_head(off, trial);
    const auto d_off = off.forward(off.placeholder_input(p0, 10), ctx);
    double worst = 0.0;
    for (std::size_t t = 2; t < 10; ++t)
      for (std::size_t i = 0; i < 26; ++i) worst = std::max(worst, std::abs(d_off(t, i) - d_off(1, i)));
    EXPECT_LT(worst, 1e-9);

    cfg.positional_encoding = true;
    PoseDecoder on(cfg, 10 + trial);
    randomize_head(on, trial);
    const auto d_on = on.forward(on.placeholder_input(p0, 10), ctx);
    double spread = 0.0;
    for (std::size_t t = 2; t < 10; ++t)
      for (std::size_t i = 0; i < 26; ++i) spread = std::max(spread, std::abs(d_on(t, i) - d_on(1, i)));
    EXPECT_GT(spread, 1e-6);
  }
}

TEST(Decoder, ContextRowOrderMatters) {
  PoseDecoder model(small_config(), 8);
  randomize_head(model, 2);
  std::mt19937_64 rng(8);
  const Pose p0 = random_pose(13, rng);
  const nn::Matrix m = random_matrix(3, 6, rng);
  nn::Matrix swapped = m;
  swapped.row(0).swap(swapped.row(2));
  const auto a = model.generate(p0, ContextFeatures(m), 6);
  const auto b = model.generate(p0, ContextFeatures(swapped), 6);
  EXPECT_NE(a, b);
}

TEST(Decoder, BatchDuplicationGivesIdenticalOutputs) {
  PoseDecoder model(small_config(), 9);
  randomize_head(model, 3);
  std::mt19937_64 rng(9);
  const std::vector<Pose> p0s = {random_pose(13, rng), random_pose(13, rng)};
  const std::vector<ContextFeatures> ctxs = {random_context(1, 6, rng), random_context(1, 6, rng)};
  const std::vector<Pose> dup = {p0s[0], p0s[1], p0s[0]};
  const std::vector<ContextFeatures> dup_ctx = {ctxs[0], ctxs[1], ctxs[0]};
  const auto out = model.generate(dup, dup_ctx, 8);
  const auto solo = model.generate(p0s[1], ctxs[1], 8);
  for (std::size_t t = 0; t < 8; ++t)
    for (std::size_t i = 0; i < 26; ++i) {
      EXPECT_EQ(out[0][t][i], out[2][t][i]);
      EXPECT_NEAR(out[1][t][i], solo[t][i], 1e-12);
    }
}

TEST(Decoder, CenteredInputIsTranslationEquivariant) {
  auto cfg = small_config();
  cfg.center_p0 = true;
  PoseDecoder model(cfg, 10);
  randomize_head(model, 4);
  std::mt19937_64 rng(10);
  const Pose p0 = random_pose(13, rng);
  const auto ctx = random_context(1, 6, rng);
  const auto base = model.generate(p0, ctx, 9);
  const auto moved = model.generate(translate(p0, 0.2, -0.15), ctx, 9);
  const auto expect = translate(base, 0.2, -0.15);
  for (std::size_t t = 0; t < 9; ++t)
    for (std::size_t i = 0; i < 26; ++i) EXPECT_NEAR(moved[t][i], expect[t][i], 1e-12);
}

TEST(Decoder, AutoregressiveFirstStepMatchesSingleForward) {
  PoseDecoder model(small_config(), 11);
  randomize_head(model, 5);
  std::mt19937_64 rng(11);
  const Pose p0 = random_pose(13, rng);
  const auto ctx = random_context(1, 6, rng);
  const auto ar = model.generate_autoregressive(p0, ctx, 6);
  const auto one = model.generate(p0, ctx, 1);
  for (std::size_t i = 0; i < 26; ++i) EXPECT_NEAR(ar[0][i], one[0][i], 1e-12);
}

TEST(Decoder, IdentityModelRolloutRepeatsInitialPose) {
  PoseDecoder model(small_config(), 12);
  std::mt19937_64 rng(12);
  const Pose p0 = random_pose(13, rng);
  const auto seq = model.generate_autoregressive(p0, random_context(1, 6, rng), 7);
  for (const auto& f : seq.frames()) EXPECT_EQ(f, p0);
}

TEST(Decoder, GradientsIncludePlaceholderToken) {
  auto cfg = small_config();
  cfg.d_model = 8;
  cfg.n_layers = 1;
  cfg.feedforward_width = 8;
  PoseDecoder model(cfg, 13);
  randomize_head(model, 6);
  std::mt19937_64 rng(13);
  const Pose p0 = random_pose(13, rng);
  const nn::Matrix ctx = random_matrix(2, 6, rng);
  nn::ParameterList params;
  for (auto* p : model.parameters())
    if (p->name == "decoder.prd_token" || p->name.rfind("decoder.pose_in", 0) == 0) params.push_back(p);
  ASSERT_EQ(params.size(), 3u);
  EXPECT_LT(testing::gradient_error(params,
                                    [&](nn::Tape& t) {
                                      const std::vector<DecoderInput> in = {model.placeholder_input(p0, 4),
                                                                            model.placeholder_input(p0, 4)};
                                      nn::Matrix both(4, 6);
                                      both << ctx, ctx;
                                      return model.forward(t, in, t.constant(both));
                                    }),
            1e-5);
}

TEST(Decoder, ShapeErrors) {
  PoseDecoder model(small_config(), 14);
  std::mt19937_64 rng(14);
  EXPECT_THROW(model.generate(random_pose(13, rng), random_context(1, 5, rng), 4), ShapeError);
  EXPECT_THROW(model.generate(random_pose(21, rng), random_context(1, 6, rng), 4), ContractError);
  auto bad = small_config();
  bad.n_heads = 3;
  EXPECT_THROW(PoseDecoder(bad, 1), ConfigError);
}

}  // namespace
}  // namespace posecast
