// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "posecast/baselines/lstm.hpp"
#include "posecast/baselines/nearest.hpp"
#include "posecast/baselines/vq.hpp"
#include "posecast/error.hpp"
#include "posecast/metrics.hpp"
#include "posecast/nn/optim.hpp"
#include "support.hpp"

namespace posecast::baselines {
namespace {

using testing::random_matrix;
using testing::random_pose;
using testing::random_sequence;

std::vector<Sample> random_db(int n, std::mt19937_64& rng) {
  std::vector<Sample> db;
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.id = "s" + std::to_string(i);
    s.p0 = random_pose(13, rng);
    s.future = random_sequence(13, 3, rng);
    db.push_back(std::move(s));
  }
  return db;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

TEST(NearestPose, MatchesLinearScan) {
  std::mt19937_64 rng(1);
  const auto db = random_db(50, rng);
  for (int q = 0; q < 100; ++q) {
    const Pose query = random_pose(13, rng);
    std::size_t best = 0;
    for (std::size_t i = 1; i < db.size(); ++i)
      if (sq_dist(query.coords(), db[i].p0.coords()) < sq_dist(query.coords(), db[best].p0.coords())) best = i;
    EXPECT_EQ(nearest_pose_index(query, db), best);
    EXPECT_EQ(nn_pose(query, db), db[best].future);
  }
}

TEST(NearestPose, ExactMatchAndTies) {
  std::mt19937_64 rng(2);
  auto db = random_db(10, rng);
  EXPECT_EQ(nn_pose(db[7].p0, db), db[7].future);
  db[3].p0 = translate(db[0].p0, 0.0, 0.0);
  db[5].p0 = db[0].p0;
  db[0].p0 = translate(db[0].p0, 5.0, 5.0);
  EXPECT_EQ(nearest_pose_index(db[3].p0, db), 3u);
  // Equidistant on opposite sides of the query.
  const Pose mid(std::vector<double>(26, 0.5));
  std::vector<double> right(26, 0.5), left(26, 0.5);
  right[0] = 0.75;
  left[0] = 0.25;
  db[2].p0 = Pose(right);
  db[8].p0 = Pose(left);
  for (auto i : {0, 1, 3, 4, 5, 6, 7, 9}) db[i].p0 = translate(mid, 3.0, 3.0);
  EXPECT_EQ(nearest_pose_index(mid, db), 2u);
  EXPECT_THROW(nn_pose(mid, std::span<const Sample>{}), ConfigError);
}

TEST(NearestFeature, MatchesLinearScanAndTies) {
  std::mt19937_64 rng(3);
  const auto db = random_db(50, rng);
  std::vector<ContextFeatures> feats;
  for (int i = 0; i < 50; ++i) feats.emplace_back(random_matrix(2, 4, rng));
  for (int q = 0; q < 50; ++q) {
    const ContextFeatures query(random_matrix(2, 4, rng));
    std::size_t best = 0;
    auto d = [&](std::size_t i) {
      return (feats[i].matrix() - query.matrix()).squaredNorm();
    };
    for (std::size_t i = 1; i < feats.size(); ++i)
      if (d(i) < d(best)) best = i;
    EXPECT_EQ(nearest_feature_index(query, feats), best);
    EXPECT_EQ(nn_feature(query, feats, db), db[best].future);
  }
  EXPECT_EQ(nn_feature(feats[11], feats, db), db[11].future);
  auto dup = feats;
  dup[30] = dup[4];
  EXPECT_EQ(nearest_feature_index(dup[4], dup), 4u);
  EXPECT_THROW(nearest_feature_index(feats[0], std::span<const ContextFeatures>{}), ConfigError);
}

LstmConfig lstm_config() {
  LstmConfig cfg;
  cfg.hidden = 16;
  cfg.context_width = 4;
  return cfg;
}

TEST(Lstm, StepCounterAndZeroHead) {
  LstmForecaster model(lstm_config(), 1);
  std::mt19937_64 rng(4);
  const Pose p0 = random_pose(13, rng);
  const ContextFeatures ctx(random_matrix(1, 4, rng));
  for (int T : {1, 7, 45}) {
    model.reset_steps();
    const auto seq = model.generate(p0, ctx, T);
    EXPECT_EQ(model.steps(), static_cast<std::uint64_t>(T));
    for (const auto& f : seq.frames()) EXPECT_EQ(f, p0);
  }
}

TEST(Lstm, TeacherForcedGradient) {
  auto cfg = lstm_config();
  cfg.hidden = 4;
  LstmForecaster model(cfg, 2);
  std::mt19937_64 rng(5);
  for (auto* p : model.parameters()) p->value = random_matrix(p->value.rows(), p->value.cols(), rng, 0.3);
  const std::vector<nn::Matrix> inputs = {random_matrix(3, 26, rng), random_matrix(3, 26, rng)};
  const nn::Matrix ctx = random_matrix(2, 4, rng);
  EXPECT_LT(testing::gradient_error(model.parameters(),
                                    [&](nn::Tape& t) { return model.teacher_forced(t, inputs, t.constant(ctx)); }),
            1e-5);
}

TEST(Lstm, LearnsConstantMotion) {
  LstmForecaster model(lstm_config(), 3);
  std::mt19937_64 rng(6);
  const int T = 6, B = 8;
  std::vector<nn::Matrix> inputs, targets;
  for (int b = 0; b < B; ++b) {
    const Pose p0 = random_pose(13, rng);
    nn::Matrix rows(T + 1, 26);
    for (int t = 0; t <= T; ++t)
      for (int i = 0; i < 26; ++i) rows(t, i) = p0[i] + 0.01 * t;
    inputs.push_back(rows.topRows(T));
    targets.push_back(rows.bottomRows(T));
  }
  nn::Matrix target(B * T, 26);
  for (int b = 0; b < B; ++b) target.middleRows(b * T, T) = targets[b];
  const nn::Matrix ctx = nn::Matrix::Zero(B, 4);
  nn::AdamW opt(model.parameters(), {.learning_rate = 3e-3, .weight_decay = 0.0});
  double worst = 1.0;
  for (int step = 0; step < 600; ++step) {
    nn::Tape tape(true, 0);
    const nn::Var pred = model.teacher_forced(tape, inputs, tape.constant(ctx));
    const nn::Matrix diff = pred.value() - target;
    worst = diff.cwiseAbs().maxCoeff();
    tape.backward(pred, 2.0 * diff / static_cast<double>(diff.size()));
    opt.step();
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Codebook, ExactCodesRoundTrip) {
  std::mt19937_64 rng(7);
  const nn::Matrix codes = random_matrix(5, 26, rng);
  const Codebook book(codes);
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(book.encode(book.decode(k)), k);
    const Pose p = book.decode(k);
    for (int i = 0; i < 26; ++i) EXPECT_EQ(p[i], codes(k, i));
  }
}

TEST(Codebook, SingleCodeIsMeanPose) {
  std::mt19937_64 rng(8);
  std::vector<Pose> poses;
  for (int i = 0; i < 40; ++i) poses.push_back(random_pose(13, rng));
  const auto book = Codebook::fit(poses, 1, 3);
  ASSERT_EQ(book.size(), 1);
  std::vector<double> mean(26, 0.0);
  for (const auto& p : poses)
    for (int i = 0; i < 26; ++i) mean[i] += p[i] / 40.0;
  for (int i = 0; i < 26; ++i) EXPECT_NEAR(book.codes()(0, i), mean[i], 1e-12);
  // Pooled per-joint RMSE against the mean is the square root of the summed
  // per-coordinate population variance divided by the joint count.
  double var_sum = 0.0;
  for (int i = 0; i < 26; ++i) {
    double v = 0.0;
    for (const auto& p : poses) v += (p[i] - mean[i]) * (p[i] - mean[i]);
    var_sum += v / 40.0;
  }
  const std::vector<PoseSequence> seqs = {PoseSequence(poses)};
  EXPECT_NEAR(book.reconstruction_rmse(seqs), std::sqrt(var_sum / 13.0), 1e-12);
}

TEST(Codebook, EncodeMatchesBruteForce) {
  std::mt19937_64 rng(9);
  std::vector<Pose> poses;
  for (int i = 0; i < 120; ++i) poses.push_back(random_pose(13, rng));
  const auto book = Codebook::fit(poses, 8, 4);
  EXPECT_EQ(book.size(), 8);
  EXPECT_FALSE(book.degenerate());
  std::vector<PoseSequence> seqs;
  double sq = 0.0;
  for (int s = 0; s < 10; ++s) {
    const auto seq = random_sequence(13, 5, rng);
    for (const auto& f : seq.frames()) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int k = 0; k < book.size(); ++k) {
        const double d = sq_dist(f.coords(), book.decode(k).coords());
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      EXPECT_EQ(book.encode(f), best);
      sq += best_d;
    }
    seqs.push_back(seq);
  }
  EXPECT_NEAR(book.reconstruction_rmse(seqs), std::sqrt(sq / (10.0 * 5 * 13)), 1e-12);
}

TEST(Codebook, ShrinksWhenPosesRepeat) {
  std::mt19937_64 rng(10);
  const Pose a = random_pose(13, rng), b = random_pose(13, rng);
  const std::vector<Pose> poses = {a, b, a, b, a};
  const auto book = Codebook::fit(poses, 4, 1);
  EXPECT_TRUE(book.degenerate());
  EXPECT_EQ(book.size(), 2);
  for (const Pose& p : {a, b}) {
    const Pose back = book.decode(book.encode(p));
    for (int i = 0; i < 26; ++i) EXPECT_NEAR(back[i], p[i], 1e-15);
  }
  EXPECT_THROW(Codebook(nn::Matrix(0, 26)), ConfigError);
}

TEST(Codebook, FloorBoundsAnyCodeSequence) {
  std::mt19937_64 rng(11);
  std::vector<Pose> poses;
  for (int i = 0; i < 60; ++i) poses.push_back(random_pose(13, rng));
  const auto book = Codebook::fit(poses, 6, 2);
  std::vector<PoseSequence> gts, preds;
  std::uniform_int_distribution<int> code(0, book.size() - 1);
  for (int s = 0; s < 20; ++s) {
    gts.push_back(random_sequence(13, 4, rng));
    std::vector<int> tokens(4);
    for (auto& t : tokens) t = code(rng);
    preds.push_back(book.decode(tokens));
  }
  EXPECT_GE(evaluate_set(preds, gts, 0.05).rmse, book.reconstruction_rmse(gts));

  // A perfect token predictor on codebook-exact poses has zero error.
  std::vector<PoseSequence> exact;
  for (int s = 0; s < 5; ++s) {
    std::vector<int> tokens(4);
    for (auto& t : tokens) t = code(rng);
    exact.push_back(book.decode(tokens));
  }
  std::vector<PoseSequence> decoded;
  for (const auto& e : exact) decoded.push_back(book.decode(book.encode(e)));
  EXPECT_EQ(evaluate_set(decoded, exact, 0.05).rmse, 0.0);
  EXPECT_EQ(book.reconstruction_rmse(exact), 0.0);
}

TEST(TokenTransformer, RolloutCountAndLearnsCycle) {
  ModelConfig cfg;
  cfg.d_model = 16;
  cfg.n_heads = 2;
  cfg.n_layers = 1;
  cfg.feedforward_width = 32;
  cfg.context_width = 4;
  TokenTransformer model(cfg, 5, 1);
  const std::vector<ContextFeatures> ctx = {ContextFeatures(nn::Matrix::Zero(1, 4))};
  const std::vector<int> first = {2};
  model.reset_forward_calls();
  const auto out = model.generate(first, ctx, 7);
  EXPECT_EQ(model.forward_calls(), 7u);
  ASSERT_EQ(out.front().size(), 7u);

  // Sequence 0 1 2 3 4 0 1 ...: next token is (current + 1) mod 5.
  std::vector<std::vector<int>> seqs;
  std::vector<int> targets;
  for (int s = 0; s < 5; ++s) {
    std::vector<int> tokens;
    for (int t = 0; t < 6; ++t) tokens.push_back((s + t) % 5);
    for (int t = 0; t < 6; ++t) targets.push_back((s + t + 1) % 5);
    seqs.push_back(tokens);
  }
  const nn::Matrix zeros = nn::Matrix::Zero(5, 4);
  nn::AdamW opt(model.parameters(), {.learning_rate = 1e-2, .weight_decay = 0.0});
  for (int step = 0; step < 150; ++step) {
    nn::Tape tape(true, 0);
    const nn::Var loss = nn::cross_entropy(model.logits(tape, seqs, tape.constant(zeros)), targets);
    tape.backward(loss);
    opt.step();
  }
  const auto gen = model.generate(first, ctx, 7);
  for (int t = 0; t < 7; ++t) EXPECT_EQ(gen.front()[t], (2 + t + 1) % 5);
}

}  // namespace
}  // namespace posecast::baselines
