// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint archive "posecast-ckpt-v1": a magic line, a little-endian u64
// header length, a JSON header, then float64 tensor payloads (docs/FORMATS.md).

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "posecast/config.hpp"
#include "posecast/methods.hpp"

namespace posecast {

inline constexpr std::string_view kCheckpointFormat = "posecast-ckpt-v1";

struct TrainingState {
  int step = 0;
  std::int64_t optimizer_steps = 0;
  std::string rng_state;
  std::vector<std::uint64_t> order;
  std::uint64_t cursor = 0;
  double best_val_ade = std::numeric_limits<double>::infinity();
  int best_step = -1;
  int evals_since_best = 0;
};

struct Checkpoint {
  MethodConfig method;
  TrainConfig train;
  TrainingState state;
  /// Ordered tensors; names carry a group prefix: param/, buffer/, adam_m/, adam_v/, best/.
  std::vector<std::pair<std::string, nn::Matrix>> tensors;

  const nn::Matrix* find(const std::string& name) const;
};

/// Writes atomically (temporary file, then rename).
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws IoError if unreadable, FormatError if malformed.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Adds the model's parameters and buffers under param/ and buffer/.
void store_model(Checkpoint& ckpt, Forecaster& model);
/// Copies tensors named `prefix` + parameter name into the model; ShapeError on mismatch.
void restore_parameters(Forecaster& model, const Checkpoint& ckpt, const std::string& prefix = "param/");
/// Builds the checkpoint's forecaster with its buffers and parameters restored.
std::unique_ptr<Forecaster> load_forecaster(const Checkpoint& ckpt);

}  // namespace posecast
