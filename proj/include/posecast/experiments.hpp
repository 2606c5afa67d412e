// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Experiment runners on the synthetic benchmark: the configuration ladder,
// the drift comparison and the quantized two-stage comparison.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "posecast/config.hpp"
#include "posecast/metrics.hpp"
#include "posecast/trainer.hpp"

namespace posecast {

using Progress = std::function<void(const std::string&)>;

struct BenchmarkData {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

/// Synthetic benchmark for one seed, split into train / test.
BenchmarkData make_benchmark(const BenchmarkConfig& cfg, std::uint64_t seed);

/// One configuration of the ladder; rungs differ from their predecessor in exactly one field.
struct LadderRung {
  std::string name;
  MethodKind kind = MethodKind::tf_ntp;
  AttentionMode attention = AttentionMode::full;
  LossWeights loss;
};

/// next-token baseline -> placeholder rows (full attention) -> causal mask -> relative loss.
std::vector<LadderRung> ablation_ladder(const LossWeights& full = {});
/// Names of the fields in which two rungs differ.
std::vector<std::string> rung_differences(const LadderRung& a, const LadderRung& b);

struct RunSummary {
  std::string name;
  MethodKind kind = MethodKind::ours;
  EvalReport report;
  std::size_t parameter_count = 0;
  int steps = 0;
  int best_step = -1;
  std::vector<double> losses;
};

/// Trains (or prepares) `method` with `train` settings and evaluates on the test split.
RunSummary train_and_evaluate(const std::string& name, const MethodConfig& method, const TrainConfig& train,
                              const BenchmarkData& data);

/// Method settings and seeds for one rung of a base configuration.
ExperimentConfig rung_config(const ExperimentConfig& base, const LadderRung& rung, std::uint64_t seed,
                             const BenchmarkData& data);

struct AblationReport {
  std::uint64_t seed = 0;
  std::vector<RunSummary> rungs;
};

AblationReport run_ablation(const ExperimentConfig& cfg, std::uint64_t seed, const BenchmarkData& data,
                            const Progress& progress = {});

struct DriftReport {
  std::uint64_t seed = 0;
  RunSummary ours;
  RunSummary ntp;
  /// ADE_ntp(t) / ADE_ours(t).
  std::vector<double> ratio;
  /// Mean ratio over the last third of the horizon divided by that over the first third.
  double ratio_growth = 0.0;
};

/// Builds the comparison from two finished runs. Throws ContractError unless both
/// ran the same number of optimizer steps with parameter counts within 5%.
DriftReport compare_drift(std::uint64_t seed, RunSummary ntp, RunSummary ours);
/// Trains the next-token and full placeholder rungs of the ladder and compares them.
DriftReport run_drift_experiment(const ExperimentConfig& cfg, std::uint64_t seed, const BenchmarkData& data,
                                 const Progress& progress = {});

struct QuantizationReport {
  std::uint64_t seed = 0;
  RunSummary vq;
  /// RMSE of the codebook-quantized ground truth on the test split.
  double floor_rmse = 0.0;
  int codebook_size = 0;
};

QuantizationReport run_quantization(const ExperimentConfig& cfg, std::uint64_t seed, const BenchmarkData& data,
                                    const Progress& progress = {});

nlohmann::json to_json(const RunSummary& run);
nlohmann::json to_json(const AblationReport& report);
nlohmann::json to_json(const DriftReport& report);
nlohmann::json to_json(const QuantizationReport& report);

/// Side-by-side tables, one row per report.
std::string comparison_markdown(std::span<const EvalReport> reports);
std::string comparison_csv(std::span<const EvalReport> reports);

}  // namespace posecast
