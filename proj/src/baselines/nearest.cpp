// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/baselines/nearest.hpp"

#include <limits>

#include "posecast/error.hpp"

namespace posecast::baselines {

std::size_t nearest_pose_index(const Pose& query, std::span<const Sample> train_db) {
  if (train_db.empty()) throw ConfigError("nearest-pose retrieval needs a non-empty training set");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < train_db.size(); ++i) {
    const Pose& p = train_db[i].p0;
    if (p.dim() != query.dim()) throw ContractError("query pose width differs from the database");
    double d = 0.0;
    for (std::size_t k = 0; k < p.dim(); ++k) d += (p[k] - query[k]) * (p[k] - query[k]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

PoseSequence nn_pose(const Pose& query, std::span<const Sample> train_db) {
  return train_db[nearest_pose_index(query, train_db)].future;
}

std::size_t nearest_feature_index(const ContextFeatures& query, std::span<const ContextFeatures> db_features) {
  if (db_features.empty()) throw ConfigError("nearest-feature retrieval needs a non-empty training set");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < db_features.size(); ++i) {
    const auto& m = db_features[i].matrix();
    if (m.size() != query.matrix().size()) throw ShapeError("query features differ in size from the database");
    double d = 0.0;
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      const double diff = m.data()[k] - query.matrix().data()[k];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

PoseSequence nn_feature(const ContextFeatures& query, std::span<const ContextFeatures> db_features,
                        std::span<const Sample> train_db) {
  if (db_features.size() != train_db.size()) throw ContractError("one feature matrix per training sample required");
  return train_db[nearest_feature_index(query, db_features)].future;
}

}  // namespace posecast::baselines
