// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// One-stage pose decoder. The decoder reads T input rows of width 2N (the
// initial pose followed by placeholder rows, or teacher-forced poses for the
// next-token ablation), cross-attends to context features, and reads out one
// displacement from the initial pose per row.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "posecast/context.hpp"
#include "posecast/nn/layers.hpp"
#include "posecast/pose.hpp"
#include "posecast/skeleton.hpp"

namespace posecast {

inline constexpr int kDefaultHorizon = 45;

enum class InputMode { ntp, placeholder };
enum class AttentionMode { full, causal };

std::string_view to_string(InputMode mode);
std::string_view to_string(AttentionMode mode);
InputMode parse_input_mode(std::string_view name);
AttentionMode parse_attention_mode(std::string_view name);

struct ModelConfig {
  int d_model = 128;
  int n_heads = 4;
  int n_layers = 4;
  int feedforward_width = 256;
  AttentionMode attention = AttentionMode::causal;
  int horizon = kDefaultHorizon;
  TopologyKind topology = TopologyKind::body13;
  double dropout = 0.0;
  int context_width = 16;  ///< d_M
  bool positional_encoding = true;
  bool learned_prd = true;  ///< false pins the placeholder token to zero
  bool center_p0 = false;   ///< feed pose rows relative to the initial pose centroid

  /// Throws ConfigError (e.g. d_model not divisible by n_heads).
  void validate() const;
  int pose_dim() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// T x 2N decoder input rows.
struct DecoderInput {
  nn::Matrix rows;
  InputMode mode = InputMode::placeholder;
  /// Token copied into rows 1..T-1 (placeholder mode only).
  std::vector<double> prd_token;

  Eigen::Index horizon() const { return rows.rows(); }
};

/// Row 0 is p0, rows 1..T-1 are copies of `prd_token`. The only builder used for
/// both training and inference. Throws ContractError if horizon < 1.
DecoderInput build_input_placeholder(const Pose& p0, int horizon, std::span<const double> prd_token);

/// Teacher-forced rows P0 .. P(T-1) taken from p0 followed by `future`.
/// With `horizon` < 0 the horizon is future.horizon().
DecoderInput build_input_ntp(const Pose& p0, const PoseSequence& future, int horizon = -1);

class PoseDecoder {
 public:
  PoseDecoder(const ModelConfig& config, std::uint64_t seed);
  PoseDecoder(const PoseDecoder&) = delete;
  PoseDecoder& operator=(const PoseDecoder&) = delete;

  const ModelConfig& config() const noexcept { return config_; }
  const SkeletonTopology& topology() const noexcept { return topology_; }

  std::span<const double> prd_token() const;
  DecoderInput placeholder_input(const Pose& p0, int horizon) const {
    return build_input_placeholder(p0, horizon, prd_token());
  }

  /// Differentiable forward over a batch: returns (batch * T) x 2N displacements.
  /// `context` holds batch * N_M rows of width d_M. All inputs share one horizon.
  nn::Var forward(nn::Tape& tape, std::span<const DecoderInput> inputs, nn::Var context);

  /// Inference forward for one sample.
  DisplacementSequence forward(const DecoderInput& input, const ContextFeatures& context);

  /// Single forward pass: p0 plus the predicted displacements.
  PoseSequence generate(const Pose& p0, const ContextFeatures& context, int horizon);
  std::vector<PoseSequence> generate(std::span<const Pose> p0s, std::span<const ContextFeatures> contexts,
                                     int horizon);

  /// Next-token rollout: T forward passes, each feeding back its own prediction.
  PoseSequence generate_autoregressive(const Pose& p0, const ContextFeatures& context, int horizon);
  std::vector<PoseSequence> generate_autoregressive(std::span<const Pose> p0s,
                                                    std::span<const ContextFeatures> contexts, int horizon);

  /// Number of per-sample decoder passes since construction or the last reset.
  std::uint64_t forward_calls() const noexcept { return forward_calls_; }
  void reset_forward_calls() noexcept { forward_calls_ = 0; }

  nn::ParameterList parameters();

 private:
  const nn::Matrix& positions(Eigen::Index count, Eigen::Index& cached, nn::Matrix& table);
  nn::Var forward_stacked(nn::Tape& tape, std::span<const DecoderInput> inputs, nn::Var context);

  ModelConfig config_;
  SkeletonTopology topology_;
  nn::Linear pose_in_;
  nn::Parameter prd_;
  nn::Linear context_in_;
  std::vector<nn::DecoderBlock> blocks_;
  nn::LayerNorm final_norm_;
  nn::Linear head_;
  nn::Matrix pose_pe_;
  nn::Matrix context_pe_;
  Eigen::Index pose_pe_rows_ = 0;
  Eigen::Index context_pe_rows_ = 0;
  std::uint64_t forward_calls_ = 0;
};

}  // namespace posecast
