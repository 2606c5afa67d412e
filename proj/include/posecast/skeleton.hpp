// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace posecast {

enum class TopologyKind { body13, hand21, custom };

std::string_view to_string(TopologyKind kind);
/// Parses "body13" / "hand21" / "custom"; throws ConfigError otherwise.
TopologyKind parse_topology_kind(std::string_view name);

/// Undirected joint pair, stored with first < second.
struct Edge {
  int first = 0;
  int second = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Joint count plus adjacency. Drives the distance and direction matrices.
class SkeletonTopology {
 public:
  /// Validates indices, self-loops and duplicates; edges are normalized to first < second.
  SkeletonTopology(TopologyKind kind, int num_joints, std::vector<Edge> edges,
                   std::vector<std::string> joint_names = {});

  TopologyKind kind() const noexcept { return kind_; }
  int num_joints() const noexcept { return num_joints_; }
  int dim() const noexcept { return 2 * num_joints_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::string>& joint_names() const noexcept { return joint_names_; }

  bool adjacent(int i, int j) const;
  int degree(int joint) const;

  friend bool operator==(const SkeletonTopology& a, const SkeletonTopology& b) {
    return a.kind_ == b.kind_ && a.num_joints_ == b.num_joints_ && a.edges_ == b.edges_;
  }

 private:
  TopologyKind kind_;
  int num_joints_;
  std::vector<Edge> edges_;
  std::vector<std::string> joint_names_;
  std::vector<char> adjacency_;
};

/// Canonical topology for body13 / hand21. `custom` has no canonical edges and throws ConfigError.
SkeletonTopology build_topology(TopologyKind kind);

/// Joint names in canonical order for the built-in kinds.
const std::vector<std::string>& canonical_joint_names(TopologyKind kind);

}  // namespace posecast
