// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "posecast/nn/tape.hpp"
#include "posecast/pose.hpp"
#include "posecast/skeleton.hpp"

namespace posecast::testing {

inline nn::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  nn::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

inline Pose random_pose(int joints, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> c(static_cast<std::size_t>(2 * joints));
  for (auto& v : c) v = u(rng);
  return Pose(std::move(c));
}

inline PoseSequence random_sequence(int joints, int horizon, std::mt19937_64& rng) {
  std::vector<Pose> frames;
  for (int t = 0; t < horizon; ++t) frames.push_back(random_pose(joints, rng));
  return PoseSequence(std::move(frames));
}

/// Largest mixed relative error between the tape gradient of sum(W o build())
/// with respect to `params` and central differences. W is a fixed random weighting.
inline double gradient_error(const std::vector<nn::Parameter*>& params,
                             const std::function<nn::Var(nn::Tape&)>& build, double h = 1e-6,
                             std::uint64_t seed = 7) {
  nn::Matrix weights;
  {
    for (auto* p : params) p->zero_grad();
    nn::Tape tape(true, 0);
    const nn::Var out = build(tape);
    std::mt19937_64 rng(seed);
    weights = random_matrix(out.rows(), out.cols(), rng);
    tape.backward(out, weights);
  }
  auto objective = [&]() {
    nn::Tape tape(true, 0);
    return build(tape).value().cwiseProduct(weights).sum();
  };
  double worst = 0.0;
  for (auto* p : params) {
    const nn::Matrix analytic = p->grad;
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double keep = p->value.data()[i];
      p->value.data()[i] = keep + h;
      const double up = objective();
      p->value.data()[i] = keep - h;
      const double down = objective();
      p->value.data()[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.data()[i];
      const double err = std::abs(a - numeric) / std::max(1e-3, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace posecast::testing
