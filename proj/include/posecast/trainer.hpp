// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "posecast/checkpoint.hpp"
#include "posecast/config.hpp"
#include "posecast/methods.hpp"
#include "posecast/nn/optim.hpp"

namespace posecast {

struct LogEntry {
  int step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::optional<double> val_ade;
};

struct TrainResult {
  std::vector<LogEntry> log;  ///< entries of this run only (a resumed run starts after the checkpoint)
  int final_step = 0;
  int best_step = -1;
  double best_val_ade = 0.0;
  bool early_stopped = false;
  std::size_t parameter_count = 0;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
};

/// AdamW loop with evaluation-driven early stopping. Batches come from a seeded
/// per-epoch shuffle; each step's dropout stream is derived from (seed, step).
class Trainer {
 public:
  /// Calls model.prepare(train). `val` drives best-model selection.
  Trainer(Forecaster& model, const TrainConfig& config, std::span<const Sample> train, std::span<const Sample> val);

  /// Restores parameters, optimizer moments, sampler and early-stopping state.
  void resume(const Checkpoint& ckpt);

  /// Trains until max_steps, early stopping or, when `stop_at_step` >= 0, that
  /// step (the state is then saved to last.ckpt as for a normal finish). On a
  /// normal finish the best-by-validation parameters are loaded back into the model.
  /// Throws DivergenceError on a non-finite loss.
  TrainResult run(int stop_at_step = -1);

  /// Current state as a checkpoint.
  Checkpoint snapshot();
  int step() const noexcept { return state_.step; }

 private:
  std::vector<const Sample*> next_batch();
  double validate();
  void ensure_optimizer();
  void save(const std::filesystem::path& path);
  void append_log(const LogEntry& e);

  Forecaster& model_;
  TrainConfig config_;
  std::vector<Sample> train_;
  std::vector<Sample> val_;
  std::unique_ptr<nn::AdamW> optimizer_;
  std::optional<Checkpoint> pending_;
  TrainingState state_;
  std::mt19937_64 rng_;
  std::vector<nn::Matrix> best_;
};

/// Deterministic 64-bit mix, used to derive per-step seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace posecast
