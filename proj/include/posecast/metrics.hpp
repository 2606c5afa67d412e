// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "posecast/pose.hpp"
#include "posecast/skeleton.hpp"

namespace posecast {

/// PCK threshold: 0.05 for body targets, 0.15 for hands.
double default_pck_delta(TopologyKind kind);

/// sqrt( sum of squared per-joint 2D distances / (T * N) ).
double rmse(const PoseSequence& pred, const PoseSequence& gt);
/// Fraction of (frame, joint) instances with joint distance strictly below delta.
double pck(const PoseSequence& pred, const PoseSequence& gt, double delta);
/// Mean over frames of the l2 norm of the flattened 2N frame difference.
double ade(const PoseSequence& pred, const PoseSequence& gt);
/// l2 norm of the flattened final-frame difference.
double fde(const PoseSequence& pred, const PoseSequence& gt);

struct MetricSet {
  double rmse = 0.0;
  double pck = 0.0;
  double ade = 0.0;
  double fde = 0.0;
};

/// Dataset-level metrics: RMSE and PCK pooled over every joint instance,
/// ADE and FDE averaged over samples.
MetricSet evaluate_set(std::span<const PoseSequence> preds, std::span<const PoseSequence> gts, double delta);

struct PerTimestamp {
  std::vector<double> ade;  ///< mean over samples of the frame-t displacement error
  std::vector<double> pck;  ///< PCK over samples at frame t
};

/// Per-frame curves; the mean of `ade` equals the dataset ADE.
PerTimestamp per_timestamp_report(std::span<const PoseSequence> preds, std::span<const PoseSequence> gts,
                                  double delta);

/// Variance over frames of each joint's displacement magnitude from p0, averaged over joints.
double hardness_score(const Pose& p0, const PoseSequence& future);
std::vector<double> hardness_scores(std::span<const Pose> p0s, std::span<const PoseSequence> futures);
/// Indices of the top `fraction` (ceil, at least one) by score; ties keep the lower index.
std::vector<std::size_t> select_hardest(std::span<const double> scores, double fraction = 0.10);

struct EvalReport {
  std::string method;
  std::size_t num_samples = 0;
  double delta = 0.0;
  MetricSet overall;
  PerTimestamp per_timestamp;
  double hardness_fraction = 0.10;
  std::size_t num_hardest = 0;
  MetricSet hardest;
  /// Per-sample decoder passes spent producing the predictions (0 when not applicable).
  std::uint64_t forward_calls = 0;
};

EvalReport make_report(std::string method, std::span<const Pose> p0s, std::span<const PoseSequence> preds,
                       std::span<const PoseSequence> gts, double delta, double hardness_fraction = 0.10);

/// Stable-key JSON rendering (2-space indent, trailing newline).
std::string to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
/// CSV with columns t, ade, pck (t counts from 1).
std::string curves_to_csv(const PerTimestamp& curves);

}  // namespace posecast
