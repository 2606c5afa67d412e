// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "posecast/config.hpp"
#include "posecast/error.hpp"

namespace posecast {
namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

TEST(Config, TrainingDefaults) {
  const TrainConfig t;
  EXPECT_EQ(t.learning_rate, 1e-4);
  EXPECT_EQ(t.batch_size, 64);
  EXPECT_EQ(t.loss.alpha, 1.0);
  EXPECT_EQ(t.loss.beta, 1.0);
  EXPECT_EQ(t.loss.theta, 1.0);
  const BenchmarkConfig b;
  EXPECT_EQ(b.per_family, 200);
  EXPECT_EQ(b.horizon, 45);
  EXPECT_EQ(b.train_fraction, 0.9);
}

TEST(Config, ParsesKeysCommentsAndLinkedFields) {
  const auto cfg = parse(
      "# experiment\n"
      "method = tf-ntp\n"
      "seed = 9\n"
      "model.d_model = 32   # width\n"
      "model.attention = full\n"
      "context.d_m = 8\n"
      "context.vocabulary = walk, swing golf\n"
      "train.learning_rate = 3e-4\n"
      "loss.alpha = 0\n"
      "benchmark.horizon = 20\n"
      "benchmark.seeds = 4,5\n");
  EXPECT_EQ(cfg.method.kind, MethodKind::tf_ntp);
  EXPECT_EQ(cfg.method.seed, 9u);
  EXPECT_EQ(cfg.train.seed, 9u);
  EXPECT_EQ(cfg.method.model.d_model, 32);
  EXPECT_EQ(cfg.method.model.attention, AttentionMode::full);
  EXPECT_EQ(cfg.method.context.d_m, 8);
  EXPECT_EQ(cfg.method.model.context_width, 8);
  EXPECT_EQ(cfg.method.context.vocabulary, (std::vector<std::string>{"walk", "swing golf"}));
  EXPECT_EQ(cfg.train.learning_rate, 3e-4);
  EXPECT_EQ(cfg.train.loss.alpha, 0.0);
  EXPECT_EQ(cfg.benchmark.horizon, 20);
  EXPECT_EQ(cfg.method.model.horizon, 20);
  EXPECT_EQ(cfg.benchmark.seeds, (std::vector<std::uint64_t>{4, 5}));
}

TEST(Config, RenderRoundTrip) {
  auto cfg = parse("method = lstm\nlstm.hidden = 24\ntrain.patience = 3\nvq.codebook_size = 12\n");
  const auto text = render_config(cfg);
  const auto back = parse(text);
  EXPECT_EQ(render_config(back), text);
  EXPECT_EQ(back.method.lstm_hidden, 24);
  EXPECT_EQ(back.train.patience, 3);
}

TEST(Config, ErrorsNameTheLine) {
  try {
    parse("method = ours\nmodel.width = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse("method = transformer\n"), ConfigError);
  EXPECT_THROW(parse("train.batch_size = many\n"), ConfigError);
  EXPECT_THROW(parse("no equals sign\n"), ConfigError);
}

TEST(Config, Validation) {
  MethodConfig m;
  m.context.vocabulary = {"walk"};
  EXPECT_NO_THROW(m.validate());
  m.model.n_heads = 5;
  EXPECT_THROW(m.validate(), ConfigError);
  m = MethodConfig{};
  m.context.vocabulary = {"walk"};
  m.context.d_m = 7;
  EXPECT_THROW(m.validate(), ConfigError);

  TrainConfig t;
  t.learning_rate = 0.0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TrainConfig{};
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  MethodConfig m;
  m.kind = MethodKind::vq_tf;
  m.codebook_size = 17;
  m.model.center_p0 = true;
  m.context.vocabulary = {"a", "b"};
  m.seed = 42;
  const auto back = method_config_from_json(to_json(m));
  EXPECT_EQ(to_json(back), to_json(m));
  EXPECT_EQ(back.model, m.model);

  TrainConfig t;
  t.loss = {0.5, 0.25, 2.0};
  t.checkpoint_dir = "runs/x";
  EXPECT_EQ(to_json(train_config_from_json(to_json(t))), to_json(t));
  EXPECT_THROW(method_config_from_json(nlohmann::json::object()), FormatError);
}

TEST(Config, CheckpointCompatibility) {
  MethodConfig a;
  a.context.vocabulary = {"walk"};
  auto b = a;
  EXPECT_NO_THROW(check_compatible(a, b));
  b.model.topology = TopologyKind::hand21;
  try {
    check_compatible(a, b);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("topology"), std::string::npos);
  }
  b = a;
  b.context.d_m = 32;
  EXPECT_THROW(check_compatible(a, b), ConfigError);
  b = a;
  b.model.n_layers = a.model.n_layers + 1;
  EXPECT_THROW(check_compatible(a, b), ConfigError);
  b = a;
  b.model.dropout = 0.3;
  EXPECT_NO_THROW(check_compatible(a, b));
}

TEST(Config, MethodNames) {
  for (auto k : all_methods()) EXPECT_EQ(parse_method(to_string(k)), k);
  EXPECT_TRUE(is_trainable(MethodKind::ours));
  EXPECT_FALSE(is_trainable(MethodKind::nn_p));
  try {
    parse_method("gru");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("tf-ntp"), std::string::npos);
  }
}

}  // namespace
}  // namespace posecast
