// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/relative_loss.hpp"

#include <cmath>
#include <string>

#include "posecast/error.hpp"

namespace posecast {

namespace {

void check_pairs(std::span<const PoseSequence> gt, std::span<const PoseSequence> pred) {
  if (gt.size() != pred.size()) throw ContractError("ground-truth and prediction batch sizes differ");
  if (gt.empty()) throw ContractError("loss batch is empty");
  for (std::size_t b = 0; b < gt.size(); ++b) {
    if (gt[b].horizon() != pred[b].horizon() || gt[b].dim() != pred[b].dim())
      throw ContractError("sequence " + std::to_string(b) + " shape mismatch between gt and prediction");
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

void LossWeights::validate() const {
  for (double v : {alpha, beta, theta})
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("loss weights must be finite and nonnegative");
}

DistanceMatrix distance_matrix(const Pose& p, const SkeletonTopology& topo) {
  p.check_against(topo);
  DistanceMatrix d(topo.num_joints());
  for (const auto& e : topo.edges()) {
    const double dx = p.x(e.first) - p.x(e.second);
    const double dy = p.y(e.first) - p.y(e.second);
    const double dist = std::sqrt(dx * dx + dy * dy);
    d(e.first, e.second) = dist;
    d(e.second, e.first) = dist;
  }
  return d;
}

DirectionMatrix direction_matrix(const Pose& p, const SkeletonTopology& topo, double epsilon) {
  if (!(epsilon > 0.0)) throw ContractError("direction epsilon must be positive");
  p.check_against(topo);
  DirectionMatrix theta(topo.num_joints());
  for (const auto& e : topo.edges()) {
    const double dx = p.x(e.second) - p.x(e.first);
    const double dy = p.y(e.second) - p.y(e.first);
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (dist <= epsilon) continue;
    theta(e.first, e.second) = {dx / dist, dy / dist};
    theta(e.second, e.first) = {-dx / dist, -dy / dist};
  }
  return theta;
}

double distance_loss(const DistanceMatrix& gt, const DistanceMatrix& pred) {
  if (gt.size() != pred.size()) throw ContractError("distance matrices differ in size");
  double sum = 0.0;
  for (int i = 0; i < gt.size(); ++i)
    for (int j = 0; j < gt.size(); ++j) sum += std::abs(gt(i, j) - pred(i, j));
  return sum;
}

double direction_loss(const DirectionMatrix& gt, const DirectionMatrix& pred) {
  if (gt.size() != pred.size()) throw ContractError("direction matrices differ in size");
  double sum = 0.0;
  for (int i = 0; i < gt.size(); ++i) {
    for (int j = 0; j < gt.size(); ++j) {
      const double dx = gt(i, j)[0] - pred(i, j)[0];
      const double dy = gt(i, j)[1] - pred(i, j)[1];
      sum += std::sqrt(dx * dx + dy * dy);
    }
  }
  return sum;
}

double pose_loss(const Pose& gt, const Pose& pred, const SkeletonTopology& topo,
                 const LossWeights& w, double epsilon) {
  double loss = 0.0;
  if (w.alpha != 0.0)
    loss += w.alpha * distance_loss(distance_matrix(gt, topo), distance_matrix(pred, topo));
  if (w.beta != 0.0)
    loss += w.beta * direction_loss(direction_matrix(gt, topo, epsilon),
                                    direction_matrix(pred, topo, epsilon));
  return loss;
}

double sequence_loss(const PoseSequence& gt, const PoseSequence& pred, const SkeletonTopology& topo,
                     const LossWeights& w, double epsilon) {
  if (gt.horizon() != pred.horizon()) throw ContractError("sequence horizons differ");
  if (gt.horizon() == 0) throw ContractError("empty sequence");
  double sum = 0.0;
  for (std::size_t t = 0; t < gt.horizon(); ++t) sum += pose_loss(gt[t], pred[t], topo, w, epsilon);
  return sum / static_cast<double>(gt.horizon());
}

double batch_loss(std::span<const PoseSequence> gt, std::span<const PoseSequence> pred,
                  const SkeletonTopology& topo, const LossWeights& w, double epsilon) {
  check_pairs(gt, pred);
  double sum = 0.0;
  for (std::size_t b = 0; b < gt.size(); ++b) sum += sequence_loss(gt[b], pred[b], topo, w, epsilon);
  return sum / static_cast<double>(gt.size());
}

double batch_mse(std::span<const PoseSequence> gt, std::span<const PoseSequence> pred) {
  check_pairs(gt, pred);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t b = 0; b < gt.size(); ++b) {
    for (std::size_t t = 0; t < gt[b].horizon(); ++t) {
      for (std::size_t i = 0; i < gt[b].dim(); ++i) {
        const double d = pred[b][t][i] - gt[b][t][i];
        sum += d * d;
      }
      count += gt[b].dim();
    }
  }
  return sum / static_cast<double>(count);
}

double total_loss(std::span<const PoseSequence> gt, std::span<const PoseSequence> pred,
                  const SkeletonTopology& topo, const LossWeights& w, double epsilon) {
  w.validate();
  const LossWeights relative{w.alpha, w.beta, 0.0};
  double loss = batch_loss(gt, pred, topo, relative, epsilon);
  if (w.theta != 0.0) loss += w.theta * batch_mse(gt, pred);
  return loss;
}

LossAndGradient total_loss_gradient(const FlatBatch& gt, const FlatBatch& pred,
                                    const SkeletonTopology& topo, const LossWeights& w,
                                    double epsilon) {
  w.validate();
  if (gt.batch != pred.batch || gt.horizon != pred.horizon || gt.dim != pred.dim)
    throw ContractError("ground-truth and prediction batches have different shapes");
  if (gt.batch == 0 || gt.horizon == 0) throw ContractError("loss batch is empty");
  if (static_cast<int>(gt.dim) != topo.dim()) throw ContractError("batch width does not match topology");
  const std::size_t total = gt.batch * gt.horizon * gt.dim;
  if (gt.values.size() != total || pred.values.size() != total)
    throw ContractError("flat batch buffer has the wrong length");

  LossAndGradient out;
  out.grad.assign(total, 0.0);
  const double frame_scale = 1.0 / static_cast<double>(gt.batch * gt.horizon);
  const double mse_scale = 1.0 / static_cast<double>(total);

  double relative = 0.0;
  double mse = 0.0;
  for (std::size_t f = 0; f < gt.batch * gt.horizon; ++f) {
    const double* g = gt.values.data() + f * gt.dim;
    const double* p = pred.values.data() + f * gt.dim;
    double* grad = out.grad.data() + f * gt.dim;
    for (const auto& e : topo.edges()) {
      const int a = e.first, b = e.second;
      const double gx = g[2 * b] - g[2 * a], gy = g[2 * b + 1] - g[2 * a + 1];
      const double px = p[2 * b] - p[2 * a], py = p[2 * b + 1] - p[2 * a + 1];
      const double gd = std::sqrt(gx * gx + gy * gy);
      const double pd = std::sqrt(px * px + py * py);
      // Each undirected edge appears as (a, b) and (b, a) in the double sums.
      double du_x = 0.0, du_y = 0.0;
      if (w.alpha != 0.0) {
        relative += 2.0 * w.alpha * std::abs(gd - pd);
        if (pd > epsilon) {
          const double s = 2.0 * w.alpha * sign(pd - gd) / pd;
          du_x += s * px;
          du_y += s * py;
        }
      }
      if (w.beta != 0.0) {
        const double ux = gd > epsilon ? gx / gd : 0.0, uy = gd > epsilon ? gy / gd : 0.0;
        const double vx = pd > epsilon ? px / pd : 0.0, vy = pd > epsilon ? py / pd : 0.0;
        const double rx = vx - ux, ry = vy - uy;
        const double rn = std::sqrt(rx * rx + ry * ry);
        relative += 2.0 * w.beta * rn;
        if (pd > epsilon && rn > 0.0) {
          // d|v - u| / d(p_b - p_a) = (I - v v^T) r / (|r| |p_b - p_a|)
          const double vr = vx * rx + vy * ry;
          const double s = 2.0 * w.beta / (rn * pd);
          du_x += s * (rx - vx * vr);
          du_y += s * (ry - vy * vr);
        }
      }
      grad[2 * b] += frame_scale * du_x;
      grad[2 * b + 1] += frame_scale * du_y;
      grad[2 * a] -= frame_scale * du_x;
      grad[2 * a + 1] -= frame_scale * du_y;
    }
    if (w.theta != 0.0) {
      for (std::size_t i = 0; i < gt.dim; ++i) {
        const double d = p[i] - g[i];
        mse += d * d;
        grad[i] += w.theta * 2.0 * d * mse_scale;
      }
    }
  }
  out.loss = relative * frame_scale + w.theta * mse * mse_scale;
  return out;
}

std::vector<double> flatten(std::span<const PoseSequence> seqs) {
  std::vector<double> out;
  for (const auto& s : seqs)
    for (const auto& f : s.frames()) out.insert(out.end(), f.coords().begin(), f.coords().end());
  return out;
}

LossAndGradient total_loss_gradient(std::span<const PoseSequence> gt,
                                    std::span<const PoseSequence> pred,
                                    const SkeletonTopology& topo, const LossWeights& w,
                                    double epsilon) {
  check_pairs(gt, pred);
  const std::size_t horizon = gt.front().horizon(), dim = gt.front().dim();
  for (std::size_t b = 0; b < gt.size(); ++b)
    if (gt[b].horizon() != horizon || gt[b].dim() != dim)
      throw ContractError("all sequences in a batch must share horizon and width");
  const auto g = flatten(gt);
  const auto p = flatten(pred);
  return total_loss_gradient(FlatBatch{g, gt.size(), horizon, dim},
                             FlatBatch{p, pred.size(), horizon, dim}, topo, w, epsilon);
}

}  // namespace posecast
