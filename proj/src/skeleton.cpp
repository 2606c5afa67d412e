// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/skeleton.hpp"

#include <algorithm>

#include "posecast/error.hpp"

namespace posecast {

namespace {

enum Body : int {
  head, l_shoulder, r_shoulder, l_elbow, r_elbow, l_wrist, r_wrist,
  l_hip, r_hip, l_knee, r_knee, l_ankle, r_ankle
};

const std::vector<std::string> kBodyNames = {
    "head", "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "l_wrist", "r_wrist",
    "l_hip", "r_hip", "l_knee", "r_knee", "l_ankle", "r_ankle"};

const std::vector<std::string> kHandNames = {
    "wrist",
    "thumb_cmc", "thumb_mcp", "thumb_ip", "thumb_tip",
    "index_mcp", "index_pip", "index_dip", "index_tip",
    "middle_mcp", "middle_pip", "middle_dip", "middle_tip",
    "ring_mcp", "ring_pip", "ring_dip", "ring_tip",
    "pinky_mcp", "pinky_pip", "pinky_dip", "pinky_tip"};

std::vector<Edge> body13_edges() {
  return {{head, l_shoulder},    {head, r_shoulder},   {l_shoulder, r_shoulder},
          {l_shoulder, l_elbow}, {l_elbow, l_wrist},   {r_shoulder, r_elbow},
          {r_elbow, r_wrist},    {l_shoulder, l_hip},  {r_shoulder, r_hip},
          {l_hip, r_hip},        {l_hip, l_knee},      {l_knee, l_ankle},
          {r_hip, r_knee},       {r_knee, r_ankle}};
}

std::vector<Edge> hand21_edges() {
  std::vector<Edge> edges;
  // Wrist spoke to each finger base, then the three chain links of that finger.
  for (int finger = 0; finger < 5; ++finger) {
    const int base = 1 + 4 * finger;
    edges.push_back({0, base});
    for (int k = 0; k < 3; ++k) edges.push_back({base + k, base + k + 1});
  }
  // Thumb base shares a palm edge with the index base.
  edges.push_back({1, 5});
  return edges;
}

}  // namespace

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::body13: return "body13";
    case TopologyKind::hand21: return "hand21";
    case TopologyKind::custom: return "custom";
  }
  return "custom";
}

TopologyKind parse_topology_kind(std::string_view name) {
  if (name == "body13") return TopologyKind::body13;
  if (name == "hand21") return TopologyKind::hand21;
  if (name == "custom") return TopologyKind::custom;
  throw ConfigError("unknown topology kind '" + std::string(name) +
                    "' (expected body13, hand21 or custom)");
}

SkeletonTopology::SkeletonTopology(TopologyKind kind, int num_joints, std::vector<Edge> edges,
                                   std::vector<std::string> joint_names)
    : kind_(kind), num_joints_(num_joints), edges_(std::move(edges)),
      joint_names_(std::move(joint_names)) {
  if (num_joints_ <= 0) throw ConfigError("topology needs a positive joint count");
  if (kind_ == TopologyKind::body13 && num_joints_ != 13)
    throw ConfigError("body13 topology must have 13 joints");
  if (kind_ == TopologyKind::hand21 && num_joints_ != 21)
    throw ConfigError("hand21 topology must have 21 joints");
  if (!joint_names_.empty() && static_cast<int>(joint_names_.size()) != num_joints_)
    throw ConfigError("joint name count does not match joint count");

  adjacency_.assign(static_cast<std::size_t>(num_joints_) * num_joints_, 0);
  for (auto& e : edges_) {
    if (e.first == e.second) throw ConfigError("topology edge is a self-loop");
    if (e.first < 0 || e.second < 0 || e.first >= num_joints_ || e.second >= num_joints_)
      throw ConfigError("topology edge index out of range");
    if (e.first > e.second) std::swap(e.first, e.second);
    auto& cell = adjacency_[static_cast<std::size_t>(e.first) * num_joints_ + e.second];
    if (cell) throw ConfigError("duplicate topology edge");
    cell = 1;
    adjacency_[static_cast<std::size_t>(e.second) * num_joints_ + e.first] = 1;
  }
}

bool SkeletonTopology::adjacent(int i, int j) const {
  if (i < 0 || j < 0 || i >= num_joints_ || j >= num_joints_) return false;
  return adjacency_[static_cast<std::size_t>(i) * num_joints_ + j] != 0;
}

int SkeletonTopology::degree(int joint) const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [joint](const Edge& e) {
    return e.first == joint || e.second == joint;
  }));
}

const std::vector<std::string>& canonical_joint_names(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::body13: return kBodyNames;
    case TopologyKind::hand21: return kHandNames;
    case TopologyKind::custom: break;
  }
  throw ConfigError("custom topologies have no canonical joint names");
}

SkeletonTopology build_topology(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::body13: return {kind, 13, body13_edges(), kBodyNames};
    case TopologyKind::hand21: return {kind, 21, hand21_edges(), kHandNames};
    case TopologyKind::custom: break;
  }
  throw ConfigError("custom topology requires an explicit edge list");
}

}  // namespace posecast
