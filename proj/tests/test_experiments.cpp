// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "posecast/error.hpp"
#include "posecast/experiments.hpp"

namespace posecast {
namespace {

ExperimentConfig tiny() {
  ExperimentConfig cfg;
  cfg.benchmark.per_family = 8;
  cfg.benchmark.horizon = 9;
  auto& m = cfg.method.model;
  m.d_model = 16;
  m.n_heads = 2;
  m.n_layers = 1;
  m.feedforward_width = 16;
  m.context_width = 4;
  cfg.method.context.d_m = 4;
  cfg.train.max_steps = 6;
  cfg.train.eval_every = 3;
  cfg.train.batch_size = 8;
  cfg.train.learning_rate = 1e-3;
  return cfg;
}

TEST(Ladder, FourRungsEachChangingOneField) {
  const auto ladder = ablation_ladder();
  ASSERT_EQ(ladder.size(), 4u);
  EXPECT_EQ(ladder[0].kind, MethodKind::tf_ntp);
  EXPECT_EQ(ladder[1].kind, MethodKind::ours);
  EXPECT_EQ(ladder[1].attention, AttentionMode::full);
  EXPECT_EQ(ladder[2].attention, AttentionMode::causal);
  for (std::size_t i = 1; i < ladder.size(); ++i) EXPECT_EQ(rung_differences(ladder[i - 1], ladder[i]).size(), 1u);
  EXPECT_EQ(rung_differences(ladder[2], ladder[3]), (std::vector<std::string>{"loss"}));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(ladder[i].loss.alpha, 0.0);
    EXPECT_EQ(ladder[i].loss.beta, 0.0);
    EXPECT_EQ(ladder[i].loss.theta, 1.0);
  }
  const LossWeights defaults;
  EXPECT_EQ(ladder[3].loss.alpha, defaults.alpha);
  EXPECT_EQ(ladder[3].loss.beta, defaults.beta);
  EXPECT_EQ(ladder[3].loss.theta, defaults.theta);
}

TEST(Ladder, RungConfigsKeepEverythingElse) {
  const auto base = tiny();
  const auto data = make_benchmark(base.benchmark, 1);
  const auto ladder = ablation_ladder();
  const auto a = rung_config(base, ladder[1], 1, data);
  const auto b = rung_config(base, ladder[2], 1, data);
  auto a_model = a.method.model;
  a_model.attention = b.method.model.attention;
  EXPECT_EQ(a_model, b.method.model);
  EXPECT_EQ(a.method.context.vocabulary, b.method.context.vocabulary);
  EXPECT_EQ(a.method.model.horizon, 9);
  EXPECT_FALSE(a.method.context.vocabulary.empty());
}

TEST(Benchmark, SplitSizes) {
  auto cfg = tiny().benchmark;
  cfg.per_family = 25;
  const auto data = make_benchmark(cfg, 2);
  EXPECT_EQ(data.train.size(), 90u);
  EXPECT_EQ(data.test.size(), 10u);
}

TEST(Drift, ReportShapeAndRatio) {
  const auto cfg = tiny();
  const auto data = make_benchmark(cfg.benchmark, 1);
  const auto report = run_drift_experiment(cfg, 1, data);
  ASSERT_EQ(report.ours.report.per_timestamp.ade.size(), 9u);
  ASSERT_EQ(report.ntp.report.per_timestamp.ade.size(), 9u);
  ASSERT_EQ(report.ratio.size(), 9u);
  for (std::size_t t = 0; t < 9; ++t)
    EXPECT_DOUBLE_EQ(report.ratio[t], report.ntp.report.per_timestamp.ade[t] / report.ours.report.per_timestamp.ade[t]);
  const double first = (report.ratio[0] + report.ratio[1] + report.ratio[2]) / 3.0;
  const double last = (report.ratio[6] + report.ratio[7] + report.ratio[8]) / 3.0;
  EXPECT_DOUBLE_EQ(report.ratio_growth, last / first);
  EXPECT_EQ(report.ours.steps, report.ntp.steps);
  EXPECT_EQ(report.ntp.report.forward_calls, 9u * data.test.size());
  EXPECT_EQ(report.ours.report.forward_calls, data.test.size());
  const auto j = to_json(report);
  EXPECT_EQ(j["ratio"].size(), 9u);
}

TEST(Drift, RejectsUnfairBudgets) {
  RunSummary a, b;
  a.report.per_timestamp.ade = b.report.per_timestamp.ade = {1.0, 1.0, 1.0};
  a.parameter_count = 100;
  b.parameter_count = 104;
  a.steps = b.steps = 10;
  EXPECT_NO_THROW(compare_drift(1, a, b));
  b.parameter_count = 120;
  EXPECT_THROW(compare_drift(1, a, b), ContractError);
  b.parameter_count = 100;
  b.steps = 11;
  EXPECT_THROW(compare_drift(1, a, b), ContractError);
}

TEST(Quantization, FloorBoundsEndToEnd) {
  auto cfg = tiny();
  cfg.method.codebook_size = 8;
  const auto data = make_benchmark(cfg.benchmark, 3);
  const auto q = run_quantization(cfg, 3, data);
  EXPECT_EQ(q.codebook_size, 8);
  EXPECT_GT(q.floor_rmse, 0.0);
  EXPECT_GE(q.vq.report.overall.rmse, q.floor_rmse);
}

TEST(Ablation, RunsEveryRungAndIsDeterministic) {
  const auto cfg = tiny();
  const auto data = make_benchmark(cfg.benchmark, 4);
  const auto a = run_ablation(cfg, 4, data);
  const auto b = run_ablation(cfg, 4, data);
  ASSERT_EQ(a.rungs.size(), 4u);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  for (const auto& r : a.rungs) EXPECT_EQ(r.steps, 6);
}

TEST(Comparison, TablesHaveOneRowPerReport) {
  EvalReport x, y;
  x.method = "ours";
  y.method = "lstm";
  x.overall = {0.1, 0.9, 0.2, 0.3};
  y.overall = {0.2, 0.8, 0.4, 0.6};
  const std::vector<EvalReport> reports = {x, y};
  const auto md = comparison_markdown(reports);
  const auto csv = comparison_csv(reports);
  EXPECT_EQ(std::count(md.begin(), md.end(), '\n'), 4);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(md.find("| ours"), std::string::npos);
  EXPECT_EQ(csv.rfind("method,", 0), 0u);
}

}  // namespace
}  // namespace posecast
