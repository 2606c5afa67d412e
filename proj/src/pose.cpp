// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/pose.hpp"

#include <cmath>
#include <string>

#include "posecast/error.hpp"

namespace posecast {

namespace {

void check_image(ImageSize image, double sigma) {
  if (!(image.width > 0.0) || !(image.height > 0.0))
    throw ConfigError("image dimensions must be positive");
  if (!(sigma > 0.0)) throw ConfigError("normalization sigma must be positive");
}

}  // namespace

Pose::Pose(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() % 2 != 0) throw ContractError("pose must have an even coordinate count");
  for (double v : coords_)
    if (!std::isfinite(v)) throw ContractError("pose coordinates must be finite");
}

void Pose::check_against(const SkeletonTopology& topo) const {
  if (static_cast<int>(coords_.size()) != topo.dim())
    throw ContractError("pose has " + std::to_string(coords_.size()) + " coordinates, topology expects " +
                        std::to_string(topo.dim()));
}

PoseSequence::PoseSequence(std::vector<Pose> frames) : frames_(std::move(frames)) {
  if (frames_.empty()) throw ContractError("pose sequence needs at least one frame");
  for (const auto& f : frames_)
    if (f.dim() != frames_.front().dim())
      throw ContractError("pose sequence frames have inconsistent dimensions");
}

DisplacementSequence::DisplacementSequence(std::size_t horizon, std::size_t dim,
                                           std::vector<double> values)
    : horizon_(horizon), dim_(dim), values_(std::move(values)) {
  if (values_.size() != horizon_ * dim_)
    throw ContractError("displacement buffer does not match horizon x dim");
  for (double v : values_)
    if (!std::isfinite(v)) throw ContractError("displacements must be finite");
}

Pose normalize_pose(const Pose& raw, ImageSize image, double sigma) {
  check_image(image, sigma);
  std::vector<double> out(raw.coords().begin(), raw.coords().end());
  for (std::size_t i = 0; i < out.size(); i += 2) {
    out[i] /= image.width * sigma;
    out[i + 1] /= image.height * sigma;
  }
  return Pose(std::move(out));
}

Pose denormalize_pose(const Pose& normalized, ImageSize image, double sigma) {
  check_image(image, sigma);
  std::vector<double> out(normalized.coords().begin(), normalized.coords().end());
  for (std::size_t i = 0; i < out.size(); i += 2) {
    out[i] *= image.width * sigma;
    out[i + 1] *= image.height * sigma;
  }
  return Pose(std::move(out));
}

PoseSequence apply_displacements(const Pose& p0, const DisplacementSequence& d) {
  if (d.dim() != p0.dim())
    throw ContractError("displacement width " + std::to_string(d.dim()) +
                        " does not match pose width " + std::to_string(p0.dim()));
  if (d.horizon() == 0) throw ContractError("displacement sequence is empty");
  std::vector<Pose> frames;
  frames.reserve(d.horizon());
  for (std::size_t t = 0; t < d.horizon(); ++t) {
    std::vector<double> c(p0.dim());
    const auto row = d.row(t);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = p0[i] + row[i];
    frames.emplace_back(std::move(c));
  }
  return PoseSequence(std::move(frames));
}

Pose translate(const Pose& p, double cx, double cy) {
  std::vector<double> c(p.coords().begin(), p.coords().end());
  for (std::size_t i = 0; i < c.size(); i += 2) {
    c[i] += cx;
    c[i + 1] += cy;
  }
  return Pose(std::move(c));
}

PoseSequence translate(const PoseSequence& seq, double cx, double cy) {
  std::vector<Pose> frames;
  frames.reserve(seq.horizon());
  for (const auto& f : seq.frames()) frames.push_back(translate(f, cx, cy));
  return PoseSequence(std::move(frames));
}

std::pair<double, double> centroid(const Pose& p) {
  double sx = 0.0, sy = 0.0;
  const int n = p.num_joints();
  if (n == 0) return {0.0, 0.0};
  for (int j = 0; j < n; ++j) {
    sx += p.x(j);
    sy += p.y(j);
  }
  return {sx / n, sy / n};
}

}  // namespace posecast
