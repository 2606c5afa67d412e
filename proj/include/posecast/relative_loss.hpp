// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Relative pose representation (bone lengths and bone directions over the
// skeleton adjacency) and the full training loss built on top of it.
//
// Every double sum runs over all ordered pairs (i, j); non-adjacent entries are
// zero, so each undirected edge contributes twice.

#pragma once

#include <array>
#include <span>
#include <vector>

#include "posecast/pose.hpp"
#include "posecast/skeleton.hpp"

namespace posecast {

/// Directions are zeroed for edges not longer than this.
inline constexpr double kDefaultEpsilon = 1e-8;

struct LossWeights {
  double alpha = 1.0;  ///< distance term
  double beta = 1.0;   ///< direction term
  double theta = 1.0;  ///< coordinate MSE term

  /// Throws ConfigError on negative or non-finite weights.
  void validate() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Symmetric N x N matrix of adjacent-joint distances; zero off the support.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(int n) : n_(n), values_(static_cast<std::size_t>(n) * n, 0.0) {}
  int size() const noexcept { return n_; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_;
  std::vector<double> values_;
};

using Vec2 = std::array<double, 2>;

/// Antisymmetric N x N matrix of unit bone directions; zero off the support
/// and on degenerate (shorter than epsilon) edges.
class DirectionMatrix {
 public:
  explicit DirectionMatrix(int n) : n_(n), values_(static_cast<std::size_t>(n) * n, Vec2{0.0, 0.0}) {}
  int size() const noexcept { return n_; }
  const Vec2& operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  Vec2& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_;
  std::vector<Vec2> values_;
};

DistanceMatrix distance_matrix(const Pose& p, const SkeletonTopology& topo);
DirectionMatrix direction_matrix(const Pose& p, const SkeletonTopology& topo,
                                 double epsilon = kDefaultEpsilon);

double distance_loss(const DistanceMatrix& gt, const DistanceMatrix& pred);
double direction_loss(const DirectionMatrix& gt, const DirectionMatrix& pred);

double pose_loss(const Pose& gt, const Pose& pred, const SkeletonTopology& topo,
                 const LossWeights& w, double epsilon = kDefaultEpsilon);
/// Mean of pose_loss over frames.
double sequence_loss(const PoseSequence& gt, const PoseSequence& pred, const SkeletonTopology& topo,
                     const LossWeights& w, double epsilon = kDefaultEpsilon);
/// Mean of sequence_loss over the batch.
double batch_loss(std::span<const PoseSequence> gt, std::span<const PoseSequence> pred,
                  const SkeletonTopology& topo, const LossWeights& w,
                  double epsilon = kDefaultEpsilon);
/// Mean squared coordinate error over B * T * 2N elements.
double batch_mse(std::span<const PoseSequence> gt, std::span<const PoseSequence> pred);
/// batch_loss(alpha, beta) + theta * batch_mse.
double total_loss(std::span<const PoseSequence> gt, std::span<const PoseSequence> pred,
                  const SkeletonTopology& topo, const LossWeights& w,
                  double epsilon = kDefaultEpsilon);

/// Flat view of a batch: B sequences of T frames of dim 2N, row-major.
struct FlatBatch {
  std::span<const double> values;
  std::size_t batch = 0;
  std::size_t horizon = 0;
  std::size_t dim = 0;
};

struct LossAndGradient {
  double loss = 0.0;
  /// d loss / d pred, same layout as the prediction batch.
  std::vector<double> grad;
};

/// Total loss and its analytic gradient with respect to every predicted coordinate.
/// |.| has subgradient 0 at zero; degenerate predicted edges contribute no gradient.
LossAndGradient total_loss_gradient(const FlatBatch& gt, const FlatBatch& pred,
                                    const SkeletonTopology& topo, const LossWeights& w,
                                    double epsilon = kDefaultEpsilon);
LossAndGradient total_loss_gradient(std::span<const PoseSequence> gt,
                                    std::span<const PoseSequence> pred,
                                    const SkeletonTopology& topo, const LossWeights& w,
                                    double epsilon = kDefaultEpsilon);

/// Packs sequences into the contiguous layout expected by FlatBatch.
std::vector<double> flatten(std::span<const PoseSequence> seqs);

}  // namespace posecast
