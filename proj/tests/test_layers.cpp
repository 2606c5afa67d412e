// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "posecast/nn/layers.hpp"
#include "posecast/nn/optim.hpp"
#include "support.hpp"

namespace posecast::nn {
namespace {

using posecast::testing::gradient_error;
using posecast::testing::random_matrix;

constexpr double kTol = 1e-5;

TEST(Layers, LinearZerosAndShape) {
  auto lin = Linear::zeros("z", 3, 5);
  Tape tape;
  const Var out = lin(tape, tape.constant(Matrix::Ones(2, 3)));
  EXPECT_EQ(out.rows(), 2);
  EXPECT_EQ(out.cols(), 5);
  EXPECT_EQ(out.value().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Layers, DecoderBlockGradient) {
  std::mt19937_64 rng(1);
  DecoderBlock block("b", 8, 2, 12, 0.0, rng);
  ParameterList params;
  block.collect(params);
  Parameter x("x", random_matrix(2 * 3, 8, rng));
  Parameter mem("m", random_matrix(2 * 2, 8, rng));
  params.push_back(&x);
  params.push_back(&mem);
  for (bool causal : {false, true}) {
    EXPECT_LT(gradient_error(params, [&](Tape& t) {
                return block(t, t.parameter(x), t.parameter(mem), 2, causal);
              }),
              kTol);
  }
}

TEST(Layers, DecoderBlockKeepsSamplesApart) {
  std::mt19937_64 rng(2);
  DecoderBlock block("b", 8, 2, 16, 0.0, rng);
  const Matrix a = random_matrix(4, 8, rng), ma = random_matrix(1, 8, rng);
  const Matrix b = random_matrix(4, 8, rng), mb = random_matrix(1, 8, rng);
  Matrix xs(8, 8), ms(2, 8);
  xs << a, b;
  ms << ma, mb;
  Tape t1, t2;
  const Matrix solo = block(t1, t1.constant(a), t1.constant(ma), 1, true).value();
  const Matrix both = block(t2, t2.constant(xs), t2.constant(ms), 2, true).value();
  EXPECT_LT((both.topRows(4) - solo).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Layers, LstmCellGradientOverTwoSteps) {
  std::mt19937_64 rng(3);
  LstmCell cell("c", 5, 6, rng);
  ParameterList params;
  cell.collect(params);
  Parameter x0("x0", random_matrix(3, 5, rng)), x1("x1", random_matrix(3, 5, rng));
  params.push_back(&x0);
  params.push_back(&x1);
  EXPECT_LT(gradient_error(params,
                           [&](Tape& t) {
                             LstmCell::State s{t.constant(Matrix::Zero(3, 6)), t.constant(Matrix::Zero(3, 6))};
                             s = cell(t, t.parameter(x0), s);
                             s = cell(t, t.parameter(x1), s);
                             const Var parts[] = {s.h, s.c};
                             return concat_cols(parts);
                           }),
            kTol);
}

TEST(Layers, LstmForgetBiasStartsAtOne) {
  std::mt19937_64 rng(4);
  LstmCell cell("c", 2, 3, rng);
  const Matrix& b = cell.input_proj.bias.value;
  ASSERT_EQ(b.cols(), 12);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(b(0, i), 0.0);
    EXPECT_EQ(b(0, 3 + i), 1.0);
  }
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  Parameter p("p", Matrix::Constant(1, 3, 1.0));
  p.grad << 0.5, -2.0, 0.0;
  AdamW opt({&p}, {.learning_rate = 0.1, .weight_decay = 0.0, .clip_norm = 0.0});
  const double norm = opt.step();
  EXPECT_NEAR(norm, std::sqrt(0.25 + 4.0), 1e-12);
  EXPECT_NEAR(p.value(0, 0), 0.9, 1e-6);
  EXPECT_NEAR(p.value(0, 1), 1.1, 1e-6);
  EXPECT_EQ(p.value(0, 2), 1.0);
  EXPECT_EQ(p.grad.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(AdamW, DecoupledDecayAndClip) {
  Parameter p("p", Matrix::Constant(1, 2, 2.0));
  Parameter frozen("f", Matrix::Constant(1, 2, 2.0), false);
  AdamW opt({&p, &frozen}, {.learning_rate = 0.1, .weight_decay = 0.5, .clip_norm = 1.0});
  opt.step();
  // Zero gradient: only the decay term acts, and only on decaying parameters.
  EXPECT_NEAR(p.value(0, 0), 2.0 * (1.0 - 0.1 * 0.5), 1e-12);
  EXPECT_EQ(frozen.value(0, 0), 2.0);

  p.grad << 30.0, 40.0;
  const auto m_before = opt.first_moments()[0];
  EXPECT_NEAR(opt.step(), 50.0, 1e-12);
  const Matrix m = opt.first_moments()[0];
  EXPECT_NEAR(m(0, 0) - 0.9 * m_before(0, 0), 0.1 * 0.6, 1e-12);
  EXPECT_NEAR(m(0, 1) - 0.9 * m_before(0, 1), 0.1 * 0.8, 1e-12);
}

TEST(AdamW, MinimizesQuadratic) {
  std::mt19937_64 rng(5);
  Parameter p("p", random_matrix(2, 2, rng));
  AdamW opt({&p}, {.learning_rate = 0.05, .weight_decay = 0.0, .clip_norm = 0.0});
  for (int i = 0; i < 500; ++i) {
    p.grad = 2.0 * (p.value.array() - 3.0).matrix();
    opt.step();
  }
  EXPECT_LT((p.value.array() - 3.0).abs().maxCoeff(), 1e-3);
}

}  // namespace
}  // namespace posecast::nn
