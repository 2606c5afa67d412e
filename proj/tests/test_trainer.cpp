// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

#include "posecast/checkpoint.hpp"
#include "posecast/error.hpp"
#include "posecast/methods.hpp"
#include "posecast/synthetic.hpp"
#include "posecast/trainer.hpp"

namespace posecast {
namespace {

namespace fs = std::filesystem;

struct Setup {
  std::vector<Sample> train, val;
  ExperimentConfig cfg;
};

Setup small_setup(MethodKind kind = MethodKind::ours) {
  Setup s;
  const auto all = standard_benchmark(6, 8, TopologyKind::body13, 3);
  const auto parts = split(all, 0.75, 3);
  s.train = parts.train;
  s.val = parts.test;
  auto& m = s.cfg.method;
  m.kind = kind;
  m.model.d_model = 16;
  m.model.n_heads = 2;
  m.model.n_layers = 1;
  m.model.feedforward_width = 16;
  m.model.horizon = 8;
  m.model.context_width = 4;
  m.model.dropout = 0.1;
  m.context.d_m = 4;
  m.context.vocabulary = benchmark_vocabulary();
  m.lstm_hidden = 12;
  m.codebook_size = 6;
  m.seed = 5;
  auto& t = s.cfg.train;
  t.learning_rate = 1e-3;
  t.batch_size = 5;
  t.max_steps = 12;
  t.eval_every = 4;
  t.seed = 5;
  return s;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("posecast_trainer_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Trainer, SameSeedGivesIdenticalRunsAndCheckpoints) {
  for (auto kind : {MethodKind::ours, MethodKind::tf_ntp, MethodKind::lstm, MethodKind::vq_tf}) {
    std::string bytes[2], reports[2];
    std::vector<double> losses[2];
    for (int run = 0; run < 2; ++run) {
      auto s = small_setup(kind);
      s.cfg.train.checkpoint_dir = scratch(std::string(to_string(kind)));
      auto model = make_forecaster(s.cfg.method);
      Trainer trainer(*model, s.cfg.train, s.train, s.val);
      const auto result = trainer.run();
      for (const auto& e : result.log) losses[run].push_back(e.loss);
      bytes[run] = file_bytes(result.last_checkpoint) + file_bytes(result.best_checkpoint);
      reports[run] = to_json(evaluate(*model, s.val));
      fs::remove_all(s.cfg.train.checkpoint_dir);
    }
    EXPECT_EQ(losses[0], losses[1]) << to_string(kind);
    EXPECT_EQ(bytes[0], bytes[1]) << to_string(kind);
    EXPECT_EQ(reports[0], reports[1]) << to_string(kind);
  }
}

TEST(Trainer, ResumeMatchesUninterruptedRun) {
  for (auto kind : {MethodKind::ours, MethodKind::vq_tf}) {
    auto s = small_setup(kind);
    s.cfg.train.patience = 0;
    auto full_model = make_forecaster(s.cfg.method);
    const auto full = Trainer(*full_model, s.cfg.train, s.train, s.val).run();

    s.cfg.train.checkpoint_dir = scratch("resume");
    auto first = make_forecaster(s.cfg.method);
    Trainer part(*first, s.cfg.train, s.train, s.val);
    const auto head = part.run(6);
    EXPECT_EQ(head.final_step, 6);

    auto second = make_forecaster(s.cfg.method);
    Trainer resumed(*second, s.cfg.train, s.train, s.val);
    resumed.resume(read_checkpoint(s.cfg.train.checkpoint_dir / "last.ckpt"));
    EXPECT_EQ(resumed.step(), 6);
    const auto tail = resumed.run();
    ASSERT_EQ(head.log.size() + tail.log.size(), full.log.size());
    EXPECT_EQ(tail.log.front().step, 7);
    for (std::size_t i = 0; i < tail.log.size(); ++i) {
      const double a = full.log[head.log.size() + i].loss, b = tail.log[i].loss;
      EXPECT_LE(std::abs(a - b), 1e-6 * std::abs(a)) << to_string(kind) << " step " << tail.log[i].step;
    }
    EXPECT_EQ(tail.best_step, full.best_step);
    EXPECT_EQ(to_json(evaluate(*second, s.val)), to_json(evaluate(*full_model, s.val)));
    fs::remove_all(s.cfg.train.checkpoint_dir);
  }
}

TEST(Trainer, RestoresBestParametersAndWritesLog) {
  auto s = small_setup();
  s.cfg.train.checkpoint_dir = scratch("best");
  auto model = make_forecaster(s.cfg.method);
  const auto result = Trainer(*model, s.cfg.train, s.train, s.val).run();
  ASSERT_GE(result.best_step, 0);
  EXPECT_NEAR(evaluate(*model, s.val).overall.ade, result.best_val_ade, 1e-12);
  std::ifstream log(s.cfg.train.checkpoint_dir / "train_log.jsonl");
  int lines = 0;
  for (std::string line; std::getline(log, line);) ++lines;
  EXPECT_EQ(lines, 12);
  const auto best = read_checkpoint(result.best_checkpoint);
  EXPECT_EQ(best.state.step, result.best_step);
  auto reloaded = load_forecaster(best);
  EXPECT_NEAR(evaluate(*reloaded, s.val).overall.ade, result.best_val_ade, 1e-12);
  fs::remove_all(s.cfg.train.checkpoint_dir);
}

// Delegates to a real forecaster. Reports a non-finite loss from step `fail_at`
// on; with `frozen` set it never produces gradients.
class StubForecaster : public Forecaster {
 public:
  StubForecaster(const MethodConfig& cfg, int fail_at, bool frozen = false)
      : Forecaster(cfg), inner_(make_forecaster(cfg)), fail_at_(fail_at), frozen_(frozen) {}
  double train_step(std::span<const Sample* const> batch, const LossWeights& w, std::uint64_t seed) override {
    const double loss = frozen_ ? 1.0 : inner_->train_step(batch, w, seed);
    return ++calls_ >= fail_at_ ? std::numeric_limits<double>::quiet_NaN() : loss;
  }
  std::vector<PoseSequence> predict(std::span<const Sample> samples) override { return inner_->predict(samples); }
  nn::ParameterList parameters() override { return inner_->parameters(); }

 private:
  std::unique_ptr<Forecaster> inner_;
  int fail_at_;
  bool frozen_;
  int calls_ = 0;
};

TEST(Trainer, EarlyStoppingWithPatience) {
  auto s = small_setup();
  s.cfg.train.max_steps = 400;
  s.cfg.train.eval_every = 2;
  s.cfg.train.patience = 3;
  s.cfg.train.weight_decay = 0.0;
  StubForecaster model(s.cfg.method, 1 << 30, true);
  const auto result = Trainer(model, s.cfg.train, s.train, s.val).run();
  EXPECT_TRUE(result.early_stopped);
  EXPECT_EQ(result.best_step, 2);
  EXPECT_EQ(result.final_step, 8);
}

TEST(Trainer, DivergenceReportsLastGoodCheckpoint) {
  auto s = small_setup();
  s.cfg.train.checkpoint_dir = scratch("diverge");
  StubForecaster model(s.cfg.method, 7);
  Trainer trainer(model, s.cfg.train, s.train, s.val);
  try {
    trainer.run();
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("step 7"), std::string::npos);
    EXPECT_EQ(fs::path(e.last_good_checkpoint()), s.cfg.train.checkpoint_dir / "last.ckpt");
    EXPECT_EQ(read_checkpoint(e.last_good_checkpoint()).state.step, 4);
  }
  StubForecaster early(s.cfg.method, 1);
  auto t2 = small_setup();
  Trainer fresh(early, t2.cfg.train, t2.train, t2.val);
  try {
    fresh.run();
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_TRUE(e.last_good_checkpoint().empty());
  }
  fs::remove_all(s.cfg.train.checkpoint_dir);
}

TEST(Checkpoint, RoundTripAndErrors) {
  auto s = small_setup(MethodKind::vq_tf);
  auto model = make_forecaster(s.cfg.method);
  Trainer trainer(*model, s.cfg.train, s.train, s.val);
  trainer.run(3);
  const auto ckpt = trainer.snapshot();
  const auto dir = scratch("ckpt");
  write_checkpoint(dir / "a.ckpt", ckpt);
  const auto back = read_checkpoint(dir / "a.ckpt");
  write_checkpoint(dir / "b.ckpt", back);
  EXPECT_EQ(file_bytes(dir / "a.ckpt"), file_bytes(dir / "b.ckpt"));
  EXPECT_EQ(back.state.step, 3);
  ASSERT_NE(back.find("buffer/vq.codebook"), nullptr);

  EXPECT_THROW(read_checkpoint(dir / "missing.ckpt"), IoError);
  {
    std::ofstream out(dir / "bad.ckpt", std::ios::binary);
    out << "not a checkpoint";
  }
  EXPECT_THROW(read_checkpoint(dir / "bad.ckpt"), FormatError);
  auto bytes = file_bytes(dir / "a.ckpt");
  {
    std::ofstream out(dir / "short.ckpt", std::ios::binary);
    out << bytes.substr(0, bytes.size() - 10);
  }
  EXPECT_THROW(read_checkpoint(dir / "short.ckpt"), FormatError);

  auto other = s.cfg.method;
  other.kind = MethodKind::ours;
  auto wrong = make_forecaster(other);
  EXPECT_THROW(restore_parameters(*wrong, back), FormatError);
  auto reshaped = back;
  for (auto& [name, m] : reshaped.tensors)
    if (name.rfind("param/", 0) == 0) {
      m = nn::Matrix::Zero(m.rows() + 1, m.cols());
      break;
    }
  EXPECT_THROW(load_forecaster(reshaped), ShapeError);
  fs::remove_all(dir);
}

TEST(Trainer, MixSeedSpreadsSteps) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(7, 9), mix_seed(7, 9));
}

}  // namespace
}  // namespace posecast
