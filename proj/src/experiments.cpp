// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "posecast/error.hpp"
#include "posecast/synthetic.hpp"

namespace posecast {

BenchmarkData make_benchmark(const BenchmarkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto all = standard_benchmark(cfg.per_family, cfg.horizon, cfg.topology, seed);
  auto parts = split(all, cfg.train_fraction, seed);
  return {std::move(parts.train), std::move(parts.test)};
}

std::vector<LadderRung> ablation_ladder(const LossWeights& full) {
  const LossWeights mse_only{0.0, 0.0, 1.0};
  return {
      {"next-token", MethodKind::tf_ntp, AttentionMode::full, mse_only},
      {"placeholder-full-attention", MethodKind::ours, AttentionMode::full, mse_only},
      {"placeholder-causal", MethodKind::ours, AttentionMode::causal, mse_only},
      {"relative-loss", MethodKind::ours, AttentionMode::causal, full},
  };
}

std::vector<std::string> rung_differences(const LadderRung& a, const LadderRung& b) {
  std::vector<std::string> out;
  if (a.kind != b.kind) out.emplace_back("method");
  if (a.attention != b.attention) out.emplace_back("attention");
  if (!(a.loss == b.loss)) out.emplace_back("loss");
  return out;
}

ExperimentConfig rung_config(const ExperimentConfig& base, const LadderRung& rung, std::uint64_t seed,
                             const BenchmarkData& data) {
  ExperimentConfig cfg = base;
  cfg.method.kind = rung.kind;
  cfg.method.model.attention = rung.attention;
  cfg.method.model.horizon = base.benchmark.horizon;
  cfg.method.model.topology = base.benchmark.topology;
  cfg.method.seed = seed;
  cfg.train.seed = seed;
  cfg.train.loss = rung.loss;
  if (cfg.method.context.kind == ContextKind::label_embedding && cfg.method.context.vocabulary.empty())
    cfg.method.context.vocabulary = vocabulary_of(data.train);
  return cfg;
}

RunSummary train_and_evaluate(const std::string& name, const MethodConfig& method, const TrainConfig& train,
                              const BenchmarkData& data) {
  auto model = make_forecaster(method);
  RunSummary run;
  run.name = name;
  run.kind = method.kind;
  if (model->trainable()) {
    Trainer trainer(*model, train, data.train, data.test);
    const auto result = trainer.run();
    run.parameter_count = result.parameter_count;
    run.steps = result.final_step;
    run.best_step = result.best_step;
    for (const auto& e : result.log) run.losses.push_back(e.loss);
  } else {
    model->prepare(data.train);
  }
  model->reset_forward_calls();
  run.report = evaluate(*model, data.test);
  run.report.method = name;
  return run;
}

AblationReport run_ablation(const ExperimentConfig& cfg, std::uint64_t seed, const BenchmarkData& data,
                            const Progress& progress) {
  AblationReport report;
  report.seed = seed;
  for (const auto& rung : ablation_ladder(cfg.train.loss)) {
    if (progress) progress("seed " + std::to_string(seed) + ": training rung " + rung.name);
    const auto rc = rung_config(cfg, rung, seed, data);
    report.rungs.push_back(train_and_evaluate(rung.name, rc.method, rc.train, data));
  }
  return report;
}

DriftReport compare_drift(std::uint64_t seed, RunSummary ntp, RunSummary ours) {
  if (ntp.steps != ours.steps)
    throw ContractError("drift comparison needs equal optimizer steps (" + std::to_string(ntp.steps) + " vs " +
                        std::to_string(ours.steps) + ")");
  const double a = static_cast<double>(ntp.parameter_count), b = static_cast<double>(ours.parameter_count);
  if (std::abs(a - b) > 0.05 * std::max(a, b))
    throw ContractError("drift comparison needs parameter counts within 5% (" + std::to_string(ntp.parameter_count) +
                        " vs " + std::to_string(ours.parameter_count) + ")");
  const auto& cn = ntp.report.per_timestamp.ade;
  const auto& co = ours.report.per_timestamp.ade;
  if (cn.size() != co.size() || cn.empty()) throw ContractError("drift curves differ in length");
  DriftReport r;
  r.seed = seed;
  for (std::size_t t = 0; t < cn.size(); ++t) r.ratio.push_back(co[t] > 0.0 ? cn[t] / co[t] : 0.0);
  const std::size_t third = std::max<std::size_t>(1, r.ratio.size() / 3);
  double early = 0.0, late = 0.0;
  for (std::size_t t = 0; t < third; ++t) {
    early += r.ratio[t];
    late += r.ratio[r.ratio.size() - 1 - t];
  }
  r.ratio_growth = early > 0.0 ? late / early : 0.0;
  r.ntp = std::move(ntp);
  r.ours = std::move(ours);
  return r;
}

DriftReport run_drift_experiment(const ExperimentConfig& cfg, std::uint64_t seed, const BenchmarkData& data,
                                 const Progress& progress) {
  const auto ladder = ablation_ladder(cfg.train.loss);
  const auto& ntp_rung = ladder.front();
  const auto& ours_rung = ladder.back();
  if (progress) progress("seed " + std::to_string(seed) + ": training " + ntp_rung.name);
  const auto nc = rung_config(cfg, ntp_rung, seed, data);
  auto ntp = train_and_evaluate(ntp_rung.name, nc.method, nc.train, data);
  if (progress) progress("seed " + std::to_string(seed) + ": training " + ours_rung.name);
  const auto oc = rung_config(cfg, ours_rung, seed, data);
  auto ours = train_and_evaluate(ours_rung.name, oc.method, oc.train, data);
  return compare_drift(seed, std::move(ntp), std::move(ours));
}

QuantizationReport run_quantization(const ExperimentConfig& cfg, std::uint64_t seed, const BenchmarkData& data,
                                    const Progress& progress) {
  LadderRung rung{"vq-tf", MethodKind::vq_tf, AttentionMode::causal, cfg.train.loss};
  auto rc = rung_config(cfg, rung, seed, data);
  if (progress) progress("seed " + std::to_string(seed) + ": training vq-tf");
  auto model = make_forecaster(rc.method);
  Trainer trainer(*model, rc.train, data.train, data.test);
  const auto result = trainer.run();
  QuantizationReport q;
  q.seed = seed;
  q.vq.name = "vq-tf";
  q.vq.kind = MethodKind::vq_tf;
  q.vq.parameter_count = result.parameter_count;
  q.vq.steps = result.final_step;
  q.vq.best_step = result.best_step;
  for (const auto& e : result.log) q.vq.losses.push_back(e.loss);
  model->reset_forward_calls();
  q.vq.report = evaluate(*model, data.test);
  q.vq.report.method = "vq-tf";
  const auto* cb = codebook_of(*model);
  std::vector<PoseSequence> gts;
  for (const auto& s : data.test) gts.push_back(s.future);
  q.floor_rmse = cb->reconstruction_rmse(gts);
  q.codebook_size = cb->size();
  return q;
}

nlohmann::json to_json(const RunSummary& run) {
  return {{"name", run.name},
          {"method", to_string(run.kind)},
          {"parameter_count", run.parameter_count},
          {"steps", run.steps},
          {"best_step", run.best_step},
          {"final_loss", run.losses.empty() ? nlohmann::json() : nlohmann::json(run.losses.back())},
          {"report", nlohmann::json::parse(to_json(run.report))}};
}

nlohmann::json to_json(const AblationReport& report) {
  nlohmann::json rungs = nlohmann::json::array();
  for (const auto& r : report.rungs) rungs.push_back(to_json(r));
  return {{"seed", report.seed}, {"rungs", rungs}};
}

nlohmann::json to_json(const DriftReport& report) {
  return {{"seed", report.seed},
          {"ntp", to_json(report.ntp)},
          {"ours", to_json(report.ours)},
          {"ratio", report.ratio},
          {"ratio_growth", report.ratio_growth}};
}

nlohmann::json to_json(const QuantizationReport& report) {
  return {{"seed", report.seed},
          {"vq", to_json(report.vq)},
          {"floor_rmse", report.floor_rmse},
          {"codebook_size", report.codebook_size}};
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string comparison_markdown(std::span<const EvalReport> reports) {
  std::ostringstream os;
  os << "| method | n | RMSE | PCK | ADE | FDE | hard ADE | hard FDE |\n";
  os << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : reports)
    os << "| " << r.method << " | " << r.num_samples << " | " << num(r.overall.rmse) << " | " << num(r.overall.pck)
       << " | " << num(r.overall.ade) << " | " << num(r.overall.fde) << " | " << num(r.hardest.ade) << " | "
       << num(r.hardest.fde) << " |\n";
  return os.str();
}

std::string comparison_csv(std::span<const EvalReport> reports) {
  std::ostringstream os;
  os << "method,n,rmse,pck,ade,fde,hard_rmse,hard_pck,hard_ade,hard_fde\n";
  for (const auto& r : reports)
    os << r.method << ',' << r.num_samples << ',' << num(r.overall.rmse) << ',' << num(r.overall.pck) << ','
       << num(r.overall.ade) << ',' << num(r.overall.fde) << ',' << num(r.hardest.rmse) << ','
       << num(r.hardest.pck) << ',' << num(r.hardest.ade) << ',' << num(r.hardest.fde) << '\n';
  return os.str();
}

}  // namespace posecast
