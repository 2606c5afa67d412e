// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "posecast/context.hpp"
#include "posecast/nn/layers.hpp"
#include "posecast/pose.hpp"
#include "posecast/skeleton.hpp"

namespace posecast::baselines {

struct LstmConfig {
  int hidden = 64;
  int context_width = 16;  ///< d_M
  int context_rows = 1;    ///< N_M, flattened into every step's input
  TopologyKind topology = TopologyKind::body13;
};

/// Recurrent next-pose regressor. Each step reads the current pose and the
/// flattened context, and emits a residual: next = current + head(h).
class LstmForecaster {
 public:
  LstmForecaster(const LstmConfig& config, std::uint64_t seed);
  LstmForecaster(const LstmForecaster&) = delete;
  LstmForecaster& operator=(const LstmForecaster&) = delete;

  const LstmConfig& config() const noexcept { return config_; }

  /// Teacher-forced pass. `inputs` holds one T x 2N matrix per sample with rows
  /// P0..P(T-1); `context` holds batch * N_M rows. Returns (batch * T) x 2N
  /// absolute predictions of P1..PT, sample-major.
  nn::Var teacher_forced(nn::Tape& tape, std::span<const nn::Matrix> inputs, nn::Var context);

  /// Feeds its own predictions back for `horizon` cell updates.
  std::vector<PoseSequence> generate(std::span<const Pose> p0s, std::span<const ContextFeatures> contexts,
                                     int horizon);
  PoseSequence generate(const Pose& p0, const ContextFeatures& context, int horizon);

  /// Cell updates performed by generate() since the last reset (per sample).
  std::uint64_t steps() const noexcept { return steps_; }
  void reset_steps() noexcept { steps_ = 0; }

  nn::ParameterList parameters();

 private:
  nn::Var flatten_context(nn::Var context, int batch) const;
  nn::Var rollout(nn::Tape& tape, int batch, int horizon, nn::Var context, const nn::Matrix* teacher,
                  const nn::Matrix& first);

  LstmConfig config_;
  SkeletonTopology topology_;
  nn::LstmCell cell_;
  nn::Linear head_;
  std::uint64_t steps_ = 0;
};

}  // namespace posecast::baselines
