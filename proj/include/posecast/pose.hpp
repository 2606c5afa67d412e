// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "posecast/skeleton.hpp"

namespace posecast {

/// Default coordinate normalization factor.
inline constexpr double kDefaultSigma = 0.8;

/// One frame of N keypoints stored interleaved as (x1, y1, ..., xN, yN).
class Pose {
 public:
  Pose() = default;
  /// Throws ContractError on odd length or non-finite values.
  explicit Pose(std::vector<double> coords);

  static Pose zeros(int num_joints) { return Pose(std::vector<double>(2 * num_joints, 0.0)); }

  int num_joints() const noexcept { return static_cast<int>(coords_.size() / 2); }
  std::size_t dim() const noexcept { return coords_.size(); }
  double x(int joint) const { return coords_[2 * joint]; }
  double y(int joint) const { return coords_[2 * joint + 1]; }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }

  /// Throws ContractError unless the pose has 2 * topo.num_joints() coordinates.
  void check_against(const SkeletonTopology& topo) const;

  friend bool operator==(const Pose&, const Pose&) = default;

 private:
  std::vector<double> coords_;
};

/// Ordered future frames sharing one dimensionality. Horizon is frames().size().
class PoseSequence {
 public:
  PoseSequence() = default;
  /// Throws ContractError if frames is empty or dimensions disagree.
  explicit PoseSequence(std::vector<Pose> frames);

  std::size_t horizon() const noexcept { return frames_.size(); }
  std::size_t dim() const noexcept { return frames_.empty() ? 0 : frames_.front().dim(); }
  const Pose& operator[](std::size_t t) const { return frames_[t]; }
  const std::vector<Pose>& frames() const noexcept { return frames_; }

  friend bool operator==(const PoseSequence&, const PoseSequence&) = default;

 private:
  std::vector<Pose> frames_;
};

/// Per-frame offsets relative to the initial pose, row-major T x 2N.
class DisplacementSequence {
 public:
  DisplacementSequence() = default;
  DisplacementSequence(std::size_t horizon, std::size_t dim, std::vector<double> values);

  static DisplacementSequence zeros(std::size_t horizon, std::size_t dim) {
    return {horizon, dim, std::vector<double>(horizon * dim, 0.0)};
  }

  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t t) const { return {values_.data() + t * dim_, dim_}; }
  double operator()(std::size_t t, std::size_t i) const { return values_[t * dim_ + i]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t horizon_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

struct ImageSize {
  double width = 0.0;
  double height = 0.0;
};

/// Pixel coordinates to normalized units: x / (width * sigma), y / (height * sigma).
Pose normalize_pose(const Pose& raw, ImageSize image, double sigma = kDefaultSigma);
/// Inverse of normalize_pose.
Pose denormalize_pose(const Pose& normalized, ImageSize image, double sigma = kDefaultSigma);

/// Frame t = p0 + d[t]; every delta is relative to p0, not the previous frame.
PoseSequence apply_displacements(const Pose& p0, const DisplacementSequence& d);

/// Adds (cx, cy) to every joint.
Pose translate(const Pose& p, double cx, double cy);
PoseSequence translate(const PoseSequence& seq, double cx, double cy);

/// Mean of all joints.
std::pair<double, double> centroid(const Pose& p);

}  // namespace posecast
