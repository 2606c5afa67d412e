// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "posecast/error.hpp"

namespace posecast {

namespace {

constexpr double kPi = std::numbers::pi;

// Standing figure, y grows downward, roughly unit height.
const std::vector<double> kBodyTemplate = {
    0.0,   -0.45,  // head
    -0.15, -0.30, 0.15, -0.30,  // shoulders
    -0.22, -0.10, 0.22, -0.10,  // elbows
    -0.25, 0.08,  0.25, 0.08,   // wrists
    -0.10, 0.05,  0.10, 0.05,   // hips
    -0.11, 0.28,  0.11, 0.28,   // knees
    -0.12, 0.50,  0.12, 0.50};  // ankles

std::vector<double> hand_template() {
  std::vector<double> c = {0.0, 0.40};
  for (int finger = 0; finger < 5; ++finger) {
    const double angle = finger == 0 ? -1.0 : -0.45 + 0.3 * (finger - 1);
    const double len = finger == 0 ? 0.13 : 0.16;
    const double base = finger == 0 ? 0.15 : 0.32;
    for (int k = 0; k < 4; ++k) {
      const double r = base + len * k;
      c.push_back(r * std::sin(angle));
      c.push_back(0.40 - r * std::cos(angle));
    }
  }
  return c;
}

}  // namespace

std::string_view to_string(MotionFamily family) {
  switch (family) {
    case MotionFamily::linear_drift: return "linear_drift";
    case MotionFamily::sinusoidal_swing: return "sinusoidal_swing";
    case MotionFamily::circular_arc: return "circular_arc";
    case MotionFamily::two_phase: return "two_phase";
  }
  return "linear_drift";
}

const std::vector<MotionFamily>& all_motion_families() {
  static const std::vector<MotionFamily> families = {MotionFamily::linear_drift, MotionFamily::sinusoidal_swing,
                                                     MotionFamily::circular_arc, MotionFamily::two_phase};
  return families;
}

MotionFamily parse_motion_family(std::string_view name) {
  for (auto f : all_motion_families())
    if (to_string(f) == name) return f;
  throw ConfigError("unknown motion family '" + std::string(name) +
                    "' (expected linear_drift, sinusoidal_swing, circular_arc or two_phase)");
}

SyntheticMotionSpec SyntheticMotionSpec::defaults(MotionFamily family) {
  constexpr double noise = 0.002;
  switch (family) {
    case MotionFamily::linear_drift: return {family, 0.003, 0.0, 0.25, noise, "walk"};
    case MotionFamily::sinusoidal_swing: return {family, 0.08, 2.0 * kPi / 30.0, 0.0, noise, "swing golf"};
    case MotionFamily::circular_arc: return {family, 0.06, 2.0 * kPi / 60.0, 0.5 * kPi, noise, "circle"};
    case MotionFamily::two_phase: return {family, 0.003, 0.0, -0.5 * kPi, noise, "jump"};
  }
  return {};
}

void SyntheticMotionSpec::validate() const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("noise_std must be finite and >= 0");
  if (!std::isfinite(amplitude) || !std::isfinite(frequency) || !std::isfinite(phase))
    throw ConfigError("motion parameters must be finite");
  if (label.empty()) throw ConfigError("motion spec needs a label");
}

std::vector<double> swing_weights(const SkeletonTopology& topo) {
  const int n = topo.num_joints();
  std::vector<int> depth(n, -1);
  depth[0] = 0;
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int j = queue.front();
    queue.pop_front();
    for (int k = 0; k < n; ++k) {
      if (depth[k] < 0 && topo.adjacent(j, k)) {
        depth[k] = depth[j] + 1;
        queue.push_back(k);
      }
    }
  }
  const int max_depth = std::max(1, *std::max_element(depth.begin(), depth.end()));
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = depth[j] < 0 ? 0.0 : static_cast<double>(depth[j]) / max_depth;
  return w;
}

PoseSequence closed_form_trajectory(const SyntheticMotionSpec& spec, const Pose& p0, int horizon,
                                    const SkeletonTopology& topo) {
  if (horizon < 1) throw ContractError("horizon must be at least 1");
  p0.check_against(topo);
  const int n = topo.num_joints();
  const auto [cx, cy] = centroid(p0);
  const auto weights = swing_weights(topo);
  const double a = spec.amplitude, f = spec.frequency, ph = spec.phase;
  const int switch_t = (horizon + 1) / 2;

  std::vector<Pose> frames;
  frames.reserve(static_cast<std::size_t>(horizon));
  for (int t = 1; t <= horizon; ++t) {
    std::vector<double> c(p0.coords().begin(), p0.coords().end());
    switch (spec.family) {
      case MotionFamily::linear_drift:
        for (int j = 0; j < n; ++j) {
          c[2 * j] += t * a * std::cos(ph);
          c[2 * j + 1] += t * a * std::sin(ph);
        }
        break;
      case MotionFamily::sinusoidal_swing:
        for (int j = 0; j < n; ++j) c[2 * j] += weights[j] * a * (std::sin(f * t + ph) - std::sin(ph));
        break;
      case MotionFamily::circular_arc: {
        const double ox = a * (std::cos(f * t + ph) - std::cos(ph));
        const double oy = a * (std::sin(f * t + ph) - std::sin(ph));
        const double spin = 0.5 * f * t;
        const double cs = std::cos(spin), sn = std::sin(spin);
        for (int j = 0; j < n; ++j) {
          const double rx = p0.x(j) - cx, ry = p0.y(j) - cy;
          c[2 * j] = cx + ox + cs * rx - sn * ry;
          c[2 * j + 1] = cy + oy + sn * rx + cs * ry;
        }
        break;
      }
      case MotionFamily::two_phase: {
        const int t1 = std::min(t, switch_t);
        const int t2 = std::max(0, t - switch_t);
        const double dx = t1 * a * std::cos(ph) + t2 * 1.5 * a * std::cos(ph + 2.0 * kPi / 3.0);
        const double dy = t1 * a * std::sin(ph) + t2 * 1.5 * a * std::sin(ph + 2.0 * kPi / 3.0);
        const double crouch = 1.0 - 0.3 * t2 / static_cast<double>(horizon);
        for (int j = 0; j < n; ++j) {
          c[2 * j] += dx;
          c[2 * j + 1] = cy + (p0.y(j) - cy) * crouch + dy;
        }
        break;
      }
    }
    frames.emplace_back(std::move(c));
  }
  return PoseSequence(std::move(frames));
}

Pose random_initial_pose(const SkeletonTopology& topo, std::mt19937_64& rng) {
  std::vector<double> tmpl;
  if (topo.kind() == TopologyKind::body13) tmpl = kBodyTemplate;
  else if (topo.kind() == TopologyKind::hand21) tmpl = hand_template();
  else throw ConfigError("synthetic poses need a canonical topology");

  std::uniform_real_distribution<double> scale_d(0.25, 0.40), center_d(0.35, 0.65), rot_d(-0.15, 0.15);
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double s = scale_d(rng), ox = center_d(rng), oy = center_d(rng), r = rot_d(rng);
  const double cs = std::cos(r), sn = std::sin(r);
  std::vector<double> c(tmpl.size());
  for (std::size_t j = 0; j < tmpl.size(); j += 2) {
    const double x = tmpl[j] + 0.01 * jitter(rng), y = tmpl[j + 1] + 0.01 * jitter(rng);
    c[j] = ox + s * (cs * x - sn * y);
    c[j + 1] = oy + s * (sn * x + cs * y);
  }
  return Pose(std::move(c));
}

std::vector<Sample> generate_synthetic(const SyntheticMotionSpec& spec, int n, int horizon, TopologyKind topology,
                                       std::uint64_t seed) {
  if (n < 1) throw ContractError("synthetic sample count must be at least 1");
  if (horizon < 1) throw ContractError("synthetic horizon must be at least 1");
  spec.validate();
  const auto topo = build_topology(topology);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.id = spec.label + "-" + std::to_string(i);
    std::replace(s.id.begin(), s.id.end(), ' ', '_');
    s.topology = topology;
    s.label = spec.label;
    s.p0 = random_initial_pose(topo, rng);
    const auto clean = closed_form_trajectory(spec, s.p0, horizon, topo);
    if (spec.noise_std == 0.0) {
      s.future = clean;
    } else {
      std::vector<Pose> frames;
      for (const auto& f : clean.frames()) {
        std::vector<double> c(f.coords().begin(), f.coords().end());
        for (double& v : c) v += spec.noise_std * noise(rng);
        frames.emplace_back(std::move(c));
      }
      s.future = PoseSequence(std::move(frames));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> standard_benchmark(int per_family, int horizon, TopologyKind topology, std::uint64_t seed) {
  std::vector<Sample> all;
  std::uint64_t stream = 0;
  for (auto family : all_motion_families()) {
    auto part = generate_synthetic(SyntheticMotionSpec::defaults(family), per_family, horizon, topology,
                                   seed * 1000003ULL + stream++);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return all;
}

std::vector<std::string> benchmark_vocabulary() {
  std::vector<std::string> v;
  for (auto f : all_motion_families()) v.push_back(SyntheticMotionSpec::defaults(f).label);
  return v;
}

}  // namespace posecast
