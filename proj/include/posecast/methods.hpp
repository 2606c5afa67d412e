// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Common interface over the one-stage model and the comparison methods, so the
// trainer, evaluator and experiments treat them uniformly.

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posecast/baselines/vq.hpp"
#include "posecast/config.hpp"
#include "posecast/dataset.hpp"
#include "posecast/metrics.hpp"

namespace posecast {

class Forecaster {
 public:
  explicit Forecaster(const MethodConfig& config);
  virtual ~Forecaster() = default;
  Forecaster(const Forecaster&) = delete;
  Forecaster& operator=(const Forecaster&) = delete;

  const MethodConfig& config() const noexcept { return config_; }
  MethodKind kind() const noexcept { return config_.kind; }
  int horizon() const noexcept { return config_.model.horizon; }
  const SkeletonTopology& topology() const noexcept { return topology_; }
  ContextProvider& context() noexcept { return context_; }

  /// Fits state that is not learned by gradient descent (codebooks, retrieval
  /// databases). Called once before training.
  virtual void prepare(std::span<const Sample> train) { (void)train; }
  /// Whether train_step is meaningful.
  virtual bool trainable() const { return true; }

  /// One forward / backward pass over a batch. Gradients accumulate into
  /// parameters(); returns the batch loss.
  virtual double train_step(std::span<const Sample* const> batch, const LossWeights& weights,
                            std::uint64_t dropout_seed) = 0;

  virtual std::vector<PoseSequence> predict(std::span<const Sample> samples) = 0;

  /// Trainable parameters, context table included.
  virtual nn::ParameterList parameters() = 0;
  /// Fitted non-trainable state stored alongside the parameters in checkpoints.
  virtual std::map<std::string, nn::Matrix> buffers() const { return {}; }
  /// Restores buffers before parameters are loaded.
  virtual void load_buffers(const std::map<std::string, nn::Matrix>& buffers) { (void)buffers; }

  /// Per-sample model passes spent in predict() since the last reset.
  virtual std::uint64_t forward_calls() const { return 0; }
  virtual void reset_forward_calls() {}

 protected:
  std::vector<ContextKey> keys(std::span<const Sample* const> batch) const;
  std::vector<ContextFeatures> features(std::span<const Sample> samples) const;
  void check_sample(const Sample& s) const;

  MethodConfig config_;
  SkeletonTopology topology_;
  ContextProvider context_;
};

/// Throws ConfigError on an invalid configuration.
std::unique_ptr<Forecaster> make_forecaster(const MethodConfig& config);

/// The codebook of a prepared vq-tf forecaster, otherwise nullptr.
const baselines::Codebook* codebook_of(const Forecaster& f);

/// Label vocabulary drawn from the samples (sorted, unique).
std::vector<std::string> vocabulary_of(std::span<const Sample> samples);

/// Predicts the samples and scores them. `delta` <= 0 selects the topology default.
EvalReport evaluate(Forecaster& model, std::span<const Sample> samples, double delta = 0.0,
                    double hardness_fraction = 0.10);

}  // namespace posecast
