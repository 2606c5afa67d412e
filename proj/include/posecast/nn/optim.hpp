// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "posecast/nn/layers.hpp"

namespace posecast::nn {

struct AdamWOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 1.0;
};

/// Adam with decoupled weight decay. Moments are stored in parameter-list order.
class AdamW {
 public:
  AdamW(ParameterList params, AdamWOptions options);

  /// Applies one update from the accumulated grads, then zeroes them. Returns the pre-clip grad norm.
  double step();

  std::int64_t steps() const noexcept { return steps_; }
  const AdamWOptions& options() const noexcept { return options_; }
  const ParameterList& params() const noexcept { return params_; }
  std::vector<Matrix>& first_moments() noexcept { return m_; }
  std::vector<Matrix>& second_moments() noexcept { return v_; }
  void set_steps(std::int64_t s) noexcept { steps_ = s; }

 private:
  ParameterList params_;
  AdamWOptions options_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t steps_ = 0;
};

}  // namespace posecast::nn
