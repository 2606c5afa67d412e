// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "posecast/error.hpp"

namespace posecast {

namespace {

using json = nlohmann::json;

void check_shapes(const PoseSequence& pred, const PoseSequence& gt) {
  if (pred.horizon() != gt.horizon() || pred.dim() != gt.dim())
    throw ContractError("prediction and ground truth differ in shape");
  if (gt.horizon() == 0) throw ContractError("empty sequence");
}

void check_sets(std::span<const PoseSequence> preds, std::span<const PoseSequence> gts) {
  if (preds.size() != gts.size()) throw ContractError("prediction and ground-truth counts differ");
  if (preds.empty()) throw ContractError("no samples to evaluate");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    check_shapes(preds[i], gts[i]);
    if (gts[i].horizon() != gts.front().horizon()) throw ContractError("samples differ in horizon");
  }
}

double joint_sq(const Pose& a, const Pose& b, int j) {
  const double dx = a.x(j) - b.x(j), dy = a.y(j) - b.y(j);
  return dx * dx + dy * dy;
}

double frame_l2(const Pose& a, const Pose& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

json metric_json(const MetricSet& m) {
  json j;
  j["rmse"] = m.rmse;
  j["pck"] = m.pck;
  j["ade"] = m.ade;
  j["fde"] = m.fde;
  return j;
}

MetricSet metric_from(const json& j) {
  return MetricSet{j.at("rmse").get<double>(), j.at("pck").get<double>(), j.at("ade").get<double>(),
                   j.at("fde").get<double>()};
}

}  // namespace

double default_pck_delta(TopologyKind kind) { return kind == TopologyKind::hand21 ? 0.15 : 0.05; }

double rmse(const PoseSequence& pred, const PoseSequence& gt) {
  check_shapes(pred, gt);
  double s = 0.0;
  const int n = gt[0].num_joints();
  for (std::size_t t = 0; t < gt.horizon(); ++t)
    for (int j = 0; j < n; ++j) s += joint_sq(pred[t], gt[t], j);
  return std::sqrt(s / static_cast<double>(gt.horizon() * static_cast<std::size_t>(n)));
}

double pck(const PoseSequence& pred, const PoseSequence& gt, double delta) {
  check_shapes(pred, gt);
  if (!(delta > 0.0)) throw ContractError("PCK threshold must be positive");
  std::size_t hits = 0, total = 0;
  for (std::size_t t = 0; t < gt.horizon(); ++t) {
    for (int j = 0; j < gt[t].num_joints(); ++j, ++total)
      if (std::sqrt(joint_sq(pred[t], gt[t], j)) < delta) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

double ade(const PoseSequence& pred, const PoseSequence& gt) {
  check_shapes(pred, gt);
  double s = 0.0;
  for (std::size_t t = 0; t < gt.horizon(); ++t) s += frame_l2(pred[t], gt[t]);
  return s / static_cast<double>(gt.horizon());
}

double fde(const PoseSequence& pred, const PoseSequence& gt) {
  check_shapes(pred, gt);
  return frame_l2(pred[pred.horizon() - 1], gt[gt.horizon() - 1]);
}

MetricSet evaluate_set(std::span<const PoseSequence> preds, std::span<const PoseSequence> gts, double delta) {
  check_sets(preds, gts);
  if (!(delta > 0.0)) throw ContractError("PCK threshold must be positive");
  double sq = 0.0, ade_sum = 0.0, fde_sum = 0.0;
  std::size_t hits = 0, joints = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t t = 0; t < gts[i].horizon(); ++t) {
      for (int j = 0; j < gts[i][t].num_joints(); ++j, ++joints) {
        const double d2 = joint_sq(preds[i][t], gts[i][t], j);
        sq += d2;
        if (std::sqrt(d2) < delta) ++hits;
      }
    }
    ade_sum += ade(preds[i], gts[i]);
    fde_sum += fde(preds[i], gts[i]);
  }
  const double n = static_cast<double>(preds.size());
  return MetricSet{std::sqrt(sq / static_cast<double>(joints)), static_cast<double>(hits) / static_cast<double>(joints),
                   ade_sum / n, fde_sum / n};
}

PerTimestamp per_timestamp_report(std::span<const PoseSequence> preds, std::span<const PoseSequence> gts,
                                  double delta) {
  check_sets(preds, gts);
  if (!(delta > 0.0)) throw ContractError("PCK threshold must be positive");
  const std::size_t horizon = gts.front().horizon();
  PerTimestamp out;
  out.ade.assign(horizon, 0.0);
  out.pck.assign(horizon, 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    std::size_t hits = 0, joints = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      out.ade[t] += frame_l2(preds[i][t], gts[i][t]);
      for (int j = 0; j < gts[i][t].num_joints(); ++j, ++joints)
        if (std::sqrt(joint_sq(preds[i][t], gts[i][t], j)) < delta) ++hits;
    }
    out.ade[t] /= static_cast<double>(preds.size());
    out.pck[t] = static_cast<double>(hits) / static_cast<double>(joints);
  }
  return out;
}

double hardness_score(const Pose& p0, const PoseSequence& future) {
  if (future.horizon() == 0 || future.dim() != p0.dim()) throw ContractError("hardness needs matching shapes");
  const int n = p0.num_joints();
  const double frames = static_cast<double>(future.horizon());
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    double mean = 0.0;
    std::vector<double> mags(future.horizon());
    for (std::size_t t = 0; t < future.horizon(); ++t) {
      const double dx = future[t].x(j) - p0.x(j), dy = future[t].y(j) - p0.y(j);
      mags[t] = std::sqrt(dx * dx + dy * dy);
      mean += mags[t];
    }
    mean /= frames;
    double var = 0.0;
    for (double m : mags) var += (m - mean) * (m - mean);
    total += var / frames;
  }
  return total / static_cast<double>(n);
}

std::vector<double> hardness_scores(std::span<const Pose> p0s, std::span<const PoseSequence> futures) {
  if (p0s.size() != futures.size()) throw ContractError("one initial pose per sequence required");
  std::vector<double> out;
  out.reserve(p0s.size());
  for (std::size_t i = 0; i < p0s.size(); ++i) out.push_back(hardness_score(p0s[i], futures[i]));
  return out;
}

std::vector<std::size_t> select_hardest(std::span<const double> scores, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ContractError("hardness fraction must lie in (0, 1]");
  if (scores.empty()) return {};
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(scores.size()) - 1e-9)));
  order.resize(std::min(count, scores.size()));
  return order;
}

EvalReport make_report(std::string method, std::span<const Pose> p0s, std::span<const PoseSequence> preds,
                       std::span<const PoseSequence> gts, double delta, double hardness_fraction) {
  EvalReport r;
  r.method = std::move(method);
  r.num_samples = preds.size();
  r.delta = delta;
  r.overall = evaluate_set(preds, gts, delta);
  r.per_timestamp = per_timestamp_report(preds, gts, delta);
  r.hardness_fraction = hardness_fraction;
  const auto scores = hardness_scores(p0s, gts);
  const auto hard = select_hardest(scores, hardness_fraction);
  std::vector<PoseSequence> hp, hg;
  for (auto i : hard) {
    hp.push_back(preds[i]);
    hg.push_back(gts[i]);
  }
  r.num_hardest = hard.size();
  r.hardest = evaluate_set(hp, hg, delta);
  return r;
}

std::string to_json(const EvalReport& r) {
  json j;
  j["format"] = "posecast-report-v1";
  j["method"] = r.method;
  j["num_samples"] = r.num_samples;
  j["delta"] = r.delta;
  j["overall"] = metric_json(r.overall);
  j["per_timestamp"] = {{"ade", r.per_timestamp.ade}, {"pck", r.per_timestamp.pck}};
  j["hardest"] = metric_json(r.hardest);
  j["hardness_fraction"] = r.hardness_fraction;
  j["num_hardest"] = r.num_hardest;
  j["forward_calls"] = r.forward_calls;
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    EvalReport r;
    r.method = j.at("method").get<std::string>();
    r.num_samples = j.at("num_samples").get<std::size_t>();
    r.delta = j.at("delta").get<double>();
    r.overall = metric_from(j.at("overall"));
    r.per_timestamp.ade = j.at("per_timestamp").at("ade").get<std::vector<double>>();
    r.per_timestamp.pck = j.at("per_timestamp").at("pck").get<std::vector<double>>();
    r.hardest = metric_from(j.at("hardest"));
    r.hardness_fraction = j.at("hardness_fraction").get<double>();
    r.num_hardest = j.at("num_hardest").get<std::size_t>();
    r.forward_calls = j.value("forward_calls", std::uint64_t{0});
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("report is missing fields: ") + e.what());
  }
}

std::string curves_to_csv(const PerTimestamp& curves) {
  std::ostringstream out;
  out.precision(17);
  out << "t,ade,pck\n";
  for (std::size_t t = 0; t < curves.ade.size(); ++t) out << (t + 1) << ',' << curves.ade[t] << ',' << curves.pck[t] << '\n';
  return out.str();
}

}  // namespace posecast
