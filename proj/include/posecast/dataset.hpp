// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Sample records and the "posecast-data-v1" JSONL format: one sample per line,
// coordinates as flat arrays in canonical joint order.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posecast/context.hpp"
#include "posecast/pose.hpp"
#include "posecast/skeleton.hpp"

namespace posecast {

inline constexpr std::string_view kDataFormat = "posecast-data-v1";
inline constexpr double kDefaultTrainFraction = 0.9;

struct Sample {
  std::string id;
  TopologyKind topology = TopologyKind::body13;
  Pose p0;
  PoseSequence future;
  std::string label;
  std::optional<std::string> context_ref;
  std::optional<ImageSize> image_dims;

  ContextKey context_key() const { return {label, context_ref.value_or(id)}; }
};

struct LoadOptions {
  /// Required horizon; 0 accepts whatever the first record declares.
  int horizon = 0;
  /// Sigma applied to records stored in pixel units.
  double sigma = kDefaultSigma;
};

/// Parses and validates a JSONL dataset. Violations raise ValidationError with
/// the 1-based line number; IoError if the file cannot be read.
std::vector<Sample> load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});
std::vector<Sample> parse_dataset(std::istream& in, const LoadOptions& options = {});

void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples);
void write_dataset(std::ostream& out, std::span<const Sample> samples);

struct Split {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

/// Seeded shuffle, then the first floor(fraction * n) samples train. Both halves
/// keep the original relative order.
Split split(std::span<const Sample> samples, double train_fraction, std::uint64_t seed);

}  // namespace posecast
