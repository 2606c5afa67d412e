// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Parametric motion families used as a desk-scale benchmark. Each family is a
// closed-form trajectory from a randomized initial pose; the label names the
// family so label-conditioned forecasters have real signal.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "posecast/dataset.hpp"

namespace posecast {

enum class MotionFamily { linear_drift, sinusoidal_swing, circular_arc, two_phase };

std::string_view to_string(MotionFamily family);
/// Throws ConfigError listing the valid families.
MotionFamily parse_motion_family(std::string_view name);
const std::vector<MotionFamily>& all_motion_families();

struct SyntheticMotionSpec {
  MotionFamily family = MotionFamily::linear_drift;
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
  double noise_std = 0.0;
  std::string label;

  /// Benchmark parameters for a family.
  static SyntheticMotionSpec defaults(MotionFamily family);
  void validate() const;
};

/// Per-joint swing weight: BFS depth from joint 0 divided by the maximum depth.
std::vector<double> swing_weights(const SkeletonTopology& topo);

/// Noise-free trajectory of `spec` starting at p0, frames t = 1..horizon.
///
///   linear_drift      d(t) = t * A (cos phase, sin phase)
///   sinusoidal_swing  dx_j(t) = w_j * A * (sin(f t + phase) - sin phase)
///   circular_arc      centroid travels a circle of radius A at angular rate f
///                     while the pose spins about it at rate f / 2
///   two_phase         drift at A (cos phase, sin phase) up to t = ceil(T/2), then
///                     drift at 1.5 A along phase + 2 pi / 3 while crouching
PoseSequence closed_form_trajectory(const SyntheticMotionSpec& spec, const Pose& p0, int horizon,
                                    const SkeletonTopology& topo);

/// Canonical template under a random similarity transform plus small joint jitter.
Pose random_initial_pose(const SkeletonTopology& topo, std::mt19937_64& rng);

/// n samples of one family; ids are "<label>-<index>". Throws ContractError if
/// horizon < 1 or n < 1.
std::vector<Sample> generate_synthetic(const SyntheticMotionSpec& spec, int n, int horizon, TopologyKind topology,
                                       std::uint64_t seed);

/// All four families with their default parameters, `per_family` samples each.
std::vector<Sample> standard_benchmark(int per_family, int horizon, TopologyKind topology, std::uint64_t seed);

/// Labels of the four default families, in family order.
std::vector<std::string> benchmark_vocabulary();

}  // namespace posecast
