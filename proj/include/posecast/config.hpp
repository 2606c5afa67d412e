// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Experiment configuration: a flat `key = value` text format (see docs/FORMATS.md)
// plus JSON renderings embedded in checkpoints.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "posecast/baselines/lstm.hpp"
#include "posecast/baselines/vq.hpp"
#include "posecast/context.hpp"
#include "posecast/decoder.hpp"
#include "posecast/relative_loss.hpp"

namespace posecast {

enum class MethodKind { ours, tf_ntp, lstm, vq_tf, nn_p, nn_vl };

std::string_view to_string(MethodKind kind);
/// Accepts ours, tf-ntp, lstm, vq-tf, nn-p, nn-vl; ConfigError lists them otherwise.
MethodKind parse_method(std::string_view name);
const std::vector<MethodKind>& all_methods();
bool is_trainable(MethodKind kind);

struct MethodConfig {
  MethodKind kind = MethodKind::ours;
  ModelConfig model;
  int lstm_hidden = 64;
  int codebook_size = baselines::kDefaultCodebookSize;
  ContextProviderConfig context;
  std::uint64_t seed = 0;

  void validate() const;
  baselines::LstmConfig lstm_config() const;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 64;
  int max_steps = 2000;
  std::uint64_t seed = 0;
  double weight_decay = 0.01;
  double clip_norm = 1.0;
  LossWeights loss;
  int eval_every = 100;
  /// Evaluations without improvement before stopping; 0 trains for max_steps.
  int patience = 0;
  /// Cap on validation samples per evaluation; 0 uses all.
  int eval_samples = 0;
  std::filesystem::path checkpoint_dir;

  void validate() const;
};

struct BenchmarkConfig {
  int per_family = 200;
  int horizon = kDefaultHorizon;
  TopologyKind topology = TopologyKind::body13;
  double train_fraction = 0.9;
  std::vector<std::uint64_t> seeds = {1, 2, 3};

  void validate() const;
};

struct ExperimentConfig {
  MethodConfig method;
  TrainConfig train;
  BenchmarkConfig benchmark;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and bad values
/// raise ConfigError naming the line. Keys not present keep their defaults.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
/// Applies one assignment, e.g. ("model.d_model", "64").
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Renders every key; parse_config(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& cfg);

nlohmann::json to_json(const MethodConfig& cfg);
MethodConfig method_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Throws ConfigError describing the first field (method, topology, d_M, context kind,
/// horizon, then the architecture sizes) on which a checkpoint and a request disagree.
void check_compatible(const MethodConfig& checkpoint, const MethodConfig& requested);

}  // namespace posecast
