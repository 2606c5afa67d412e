// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "posecast/error.hpp"
#include "posecast/pose.hpp"
#include "posecast/skeleton.hpp"
#include "support.hpp"

namespace posecast {
namespace {

int joint(TopologyKind kind, const std::string& name) {
  const auto& names = canonical_joint_names(kind);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  ADD_FAILURE() << "no joint " << name;
  return -1;
}

TEST(Topology, Body13EdgeTable) {
  const auto topo = build_topology(TopologyKind::body13);
  EXPECT_EQ(topo.num_joints(), 13);
  EXPECT_EQ(topo.edges().size(), 14u);
  const std::pair<const char*, const char*> table[] = {
      {"head", "l_shoulder"},     {"head", "r_shoulder"},   {"l_shoulder", "r_shoulder"}, {"l_shoulder", "l_elbow"},
      {"l_elbow", "l_wrist"},     {"r_shoulder", "r_elbow"}, {"r_elbow", "r_wrist"},      {"l_shoulder", "l_hip"},
      {"r_shoulder", "r_hip"},    {"l_hip", "r_hip"},       {"l_hip", "l_knee"},          {"l_knee", "l_ankle"},
      {"r_hip", "r_knee"},        {"r_knee", "r_ankle"},
  };
  for (const auto& [a, b] : table) {
    EXPECT_TRUE(topo.adjacent(joint(TopologyKind::body13, a), joint(TopologyKind::body13, b))) << a << "-" << b;
    EXPECT_TRUE(topo.adjacent(joint(TopologyKind::body13, b), joint(TopologyKind::body13, a)));
  }
}

TEST(Topology, Hand21) {
  const auto topo = build_topology(TopologyKind::hand21);
  EXPECT_EQ(topo.num_joints(), 21);
  EXPECT_EQ(topo.edges().size(), 21u);
  EXPECT_EQ(topo.degree(0), 5);
  EXPECT_EQ(canonical_joint_names(TopologyKind::hand21).front(), "wrist");
}

TEST(Topology, InvariantsAreEnforced) {
  EXPECT_THROW(build_topology(TopologyKind::custom), ConfigError);
  EXPECT_THROW(SkeletonTopology(TopologyKind::custom, 3, {{0, 3}}), ConfigError);
  EXPECT_THROW(SkeletonTopology(TopologyKind::custom, 3, {{1, 1}}), ConfigError);
  EXPECT_THROW(SkeletonTopology(TopologyKind::custom, 3, {{0, 1}, {1, 0}}), ConfigError);
  EXPECT_THROW(parse_topology_kind("body14"), ConfigError);
  const SkeletonTopology custom(TopologyKind::custom, 3, {{2, 0}, {1, 2}});
  EXPECT_EQ(custom.edges().front(), (Edge{0, 2}));
  EXPECT_EQ(custom.degree(2), 2);
}

TEST(Pose, RejectsNonFiniteAndOddLength) {
  EXPECT_THROW(Pose({0.1, 0.2, 0.3}), ContractError);
  EXPECT_THROW(Pose({0.1, std::numeric_limits<double>::quiet_NaN()}), ContractError);
  EXPECT_THROW(Pose({std::numeric_limits<double>::infinity(), 0.0}), ContractError);
  EXPECT_THROW(Pose::zeros(12).check_against(build_topology(TopologyKind::body13)), ContractError);
}

TEST(PoseSequence, RequiresMatchingFrames) {
  EXPECT_THROW(PoseSequence(std::vector<Pose>{}), ContractError);
  EXPECT_THROW(PoseSequence({Pose::zeros(13), Pose::zeros(12)}), ContractError);
}

TEST(Normalize, DividesByImageTimesSigma) {
  const Pose raw({80.0, 90.0});
  const Pose n = normalize_pose(raw, {100.0, 100.0});
  EXPECT_DOUBLE_EQ(n.x(0), 1.0);
  EXPECT_DOUBLE_EQ(n.y(0), 1.125);
  EXPECT_EQ(kDefaultSigma, 0.8);
}

TEST(Normalize, RoundTripAndErrors) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Pose raw = testing::random_pose(13, rng, 0.0, 640.0);
    const ImageSize img{320.0 + trial, 240.0 + 2 * trial};
    const double sigma = 0.5 + 0.01 * trial;
    const Pose back = denormalize_pose(normalize_pose(raw, img, sigma), img, sigma);
    for (std::size_t i = 0; i < raw.dim(); ++i) EXPECT_NEAR(back[i], raw[i], 1e-12 * 640.0);
  }
  EXPECT_THROW(normalize_pose(Pose({1.0, 1.0}), {0.0, 10.0}), ConfigError);
  EXPECT_THROW(normalize_pose(Pose({1.0, 1.0}), {10.0, 10.0}, 0.0), ConfigError);
}

TEST(Displacements, WorkedExample) {
  const Pose p0({0.75, 0.8});
  const auto seq = apply_displacements(p0, DisplacementSequence(1, 2, {-0.05, 0.1}));
  EXPECT_NEAR(seq[0].x(0), 0.7, 1e-15);
  EXPECT_NEAR(seq[0].y(0), 0.9, 1e-15);
}

TEST(Displacements, ZeroDeltasRepeatP0AndOriginCopiesRows) {
  std::mt19937_64 rng(9);
  const Pose p0 = testing::random_pose(13, rng);
  const auto seq = apply_displacements(p0, DisplacementSequence::zeros(45, 26));
  ASSERT_EQ(seq.horizon(), 45u);
  for (const auto& f : seq.frames()) EXPECT_EQ(f, p0);

  std::vector<double> m(3 * 26);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.01 * static_cast<double>(i);
  const auto from_origin = apply_displacements(Pose::zeros(13), DisplacementSequence(3, 26, m));
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 26; ++i) EXPECT_EQ(from_origin[t][i], m[t * 26 + i]);
  EXPECT_THROW(apply_displacements(Pose::zeros(12), DisplacementSequence::zeros(2, 26)), ContractError);
}

TEST(Displacements, TranslationEquivariance) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose p0 = testing::random_pose(13, rng);
    std::vector<double> d(5 * 26);
    std::normal_distribution<double> n(0.0, 0.1);
    for (auto& v : d) v = n(rng);
    const DisplacementSequence disp(5, 26, d);
    const auto shifted = apply_displacements(translate(p0, 0.3, -0.2), disp);
    const auto expect = translate(apply_displacements(p0, disp), 0.3, -0.2);
    for (std::size_t t = 0; t < 5; ++t)
      for (std::size_t i = 0; i < 26; ++i) EXPECT_NEAR(shifted[t][i], expect[t][i], 1e-15);
  }
}

TEST(Skeleton, TopologyFileMatchesBuiltInTables) {
  std::ifstream in(POSECAST_TOPOLOGY_FILE);
  ASSERT_TRUE(in.good());
  const auto j = nlohmann::json::parse(in);
  for (auto kind : {TopologyKind::body13, TopologyKind::hand21}) {
    const auto& entry = j.at(std::string(to_string(kind)));
    const auto topo = build_topology(kind);
    EXPECT_EQ(entry.at("joints").get<std::vector<std::string>>(), canonical_joint_names(kind));
    std::vector<Edge> edges;
    for (const auto& e : entry.at("edges")) edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    EXPECT_EQ(edges, topo.edges()) << to_string(kind);
  }
}

}  // namespace
}  // namespace posecast
