// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Quantized next-token baseline: poses are snapped to a k-means codebook and a
// causal transformer predicts the next code index.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "posecast/context.hpp"
#include "posecast/decoder.hpp"
#include "posecast/nn/layers.hpp"
#include "posecast/pose.hpp"

namespace posecast::baselines {

inline constexpr int kDefaultCodebookSize = 64;

class Codebook {
 public:
  Codebook() = default;
  /// K x 2N code vectors. Throws ConfigError if empty.
  explicit Codebook(nn::Matrix codes);

  /// k-means++ seeding followed by Lloyd iterations. When k exceeds the number
  /// of distinct poses the codebook shrinks to that number and degenerate() is set.
  static Codebook fit(std::span<const Pose> poses, int k, std::uint64_t seed, int max_iterations = 50);

  int size() const noexcept { return static_cast<int>(codes_.rows()); }
  int dim() const noexcept { return static_cast<int>(codes_.cols()); }
  const nn::Matrix& codes() const noexcept { return codes_; }
  bool degenerate() const noexcept { return degenerate_; }
  int iterations() const noexcept { return iterations_; }

  /// Nearest code; ties go to the lowest index.
  int encode(const Pose& pose) const;
  Pose decode(int index) const;
  std::vector<int> encode(const PoseSequence& seq) const;
  PoseSequence decode(std::span<const int> indices) const;
  PoseSequence quantize(const PoseSequence& seq) const;

  /// Pooled per-joint RMSE between sequences and their quantized versions.
  double reconstruction_rmse(std::span<const PoseSequence> seqs) const;

 private:
  nn::Matrix codes_;
  bool degenerate_ = false;
  int iterations_ = 0;
};

/// Every pose of every sample, p0 first.
std::vector<Pose> collect_poses(std::span<const Pose> p0s, std::span<const PoseSequence> futures);

/// Causal transformer over code indices with context cross-attention.
class TokenTransformer {
 public:
  /// Uses the widths, depth, dropout and context width of `config`; attention is always causal.
  TokenTransformer(const ModelConfig& config, int vocabulary, std::uint64_t seed);
  TokenTransformer(const TokenTransformer&) = delete;
  TokenTransformer& operator=(const TokenTransformer&) = delete;

  int vocabulary() const noexcept { return vocabulary_; }

  /// (batch * T) x K logits for next-token prediction; all sequences share T.
  nn::Var logits(nn::Tape& tape, std::span<const std::vector<int>> tokens, nn::Var context);

  /// Greedy rollout from each first token: `horizon` passes, returns the predicted tokens.
  std::vector<std::vector<int>> generate(std::span<const int> first_tokens, std::span<const ContextFeatures> contexts,
                                         int horizon);

  std::uint64_t forward_calls() const noexcept { return forward_calls_; }
  void reset_forward_calls() noexcept { forward_calls_ = 0; }

  nn::ParameterList parameters();

 private:
  ModelConfig config_;
  int vocabulary_;
  nn::Parameter embedding_;
  nn::Linear context_in_;
  std::vector<nn::DecoderBlock> blocks_;
  nn::LayerNorm final_norm_;
  nn::Linear head_;
  nn::Matrix pe_;
  std::uint64_t forward_calls_ = 0;
};

}  // namespace posecast::baselines
