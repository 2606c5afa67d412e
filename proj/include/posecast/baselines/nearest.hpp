// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "posecast/context.hpp"
#include "posecast/dataset.hpp"

namespace posecast::baselines {

/// Index of the training sample whose p0 is closest (Euclidean over all 2N
/// coordinates) to `query`; ties go to the lowest index. Throws ConfigError on an empty db.
std::size_t nearest_pose_index(const Pose& query, std::span<const Sample> train_db);
/// Future sequence of the nearest_pose_index sample.
PoseSequence nn_pose(const Pose& query, std::span<const Sample> train_db);

/// Same retrieval on flattened context features.
std::size_t nearest_feature_index(const ContextFeatures& query, std::span<const ContextFeatures> db_features);
PoseSequence nn_feature(const ContextFeatures& query, std::span<const ContextFeatures> db_features,
                        std::span<const Sample> train_db);

}  // namespace posecast::baselines
