// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/methods.hpp"

#include <algorithm>
#include <set>

#include "posecast/baselines/lstm.hpp"
#include "posecast/baselines/nearest.hpp"
#include "posecast/decoder.hpp"
#include "posecast/error.hpp"

namespace posecast {

namespace {

constexpr std::size_t kPredictChunk = 64;
constexpr std::uint64_t kContextSeedSalt = 0x9e3779b97f4a7c15ULL;

nn::Matrix to_rows(const DecoderInput& in) { return in.rows; }

/// Absolute predictions (batch * T) x 2N from displacements relative to each p0.
nn::Var add_p0(nn::Var disp, std::span<const Sample* const> batch, Eigen::Index horizon) {
  nn::Matrix offsets(disp.rows(), disp.cols());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& p0 = batch[b]->p0;
    for (Eigen::Index t = 0; t < horizon; ++t)
      for (Eigen::Index i = 0; i < offsets.cols(); ++i)
        offsets(static_cast<Eigen::Index>(b) * horizon + t, i) = p0[static_cast<std::size_t>(i)];
  }
  return nn::add_constant(disp, offsets);
}

/// Relative loss on absolute predictions; back-propagates and returns the loss.
double regress(nn::Tape& tape, nn::Var pred, std::span<const Sample* const> batch, const SkeletonTopology& topo,
               const LossWeights& w) {
  const auto horizon = static_cast<std::size_t>(pred.rows()) / batch.size();
  const auto dim = static_cast<std::size_t>(pred.cols());
  std::vector<double> gt;
  gt.reserve(batch.size() * horizon * dim);
  for (const Sample* s : batch)
    for (const auto& f : s->future.frames()) gt.insert(gt.end(), f.coords().begin(), f.coords().end());
  const auto& v = pred.value();
  const FlatBatch gt_batch{gt, batch.size(), horizon, dim};
  const FlatBatch pred_batch{std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), batch.size(),
                             horizon, dim};
  auto lg = total_loss_gradient(gt_batch, pred_batch, topo, w);
  const nn::Matrix seed = Eigen::Map<const nn::Matrix>(lg.grad.data(), v.rows(), v.cols());
  tape.backward(pred, seed);
  return lg.loss;
}

template <typename Fn>
std::vector<PoseSequence> chunked(std::span<const Sample> samples, Fn&& fn) {
  std::vector<PoseSequence> out;
  out.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += kPredictChunk) {
    const auto part = samples.subspan(start, std::min(kPredictChunk, samples.size() - start));
    auto preds = fn(part);
    for (auto& p : preds) out.push_back(std::move(p));
  }
  return out;
}

class DecoderMethod final : public Forecaster {
 public:
  explicit DecoderMethod(const MethodConfig& config) : Forecaster(config), decoder_(config.model, config.seed) {}

  double train_step(std::span<const Sample* const> batch, const LossWeights& w, std::uint64_t dropout_seed) override {
    const int horizon = config_.model.horizon;
    std::vector<DecoderInput> inputs;
    inputs.reserve(batch.size());
    for (const Sample* s : batch) {
      check_sample(*s);
      inputs.push_back(kind() == MethodKind::ours ? decoder_.placeholder_input(s->p0, horizon)
                                                  : build_input_ntp(s->p0, s->future, horizon));
    }
    nn::Tape tape(true, dropout_seed);
    const auto ks = keys(batch);
    const nn::Var ctx = context_.batch(tape, ks);
    const nn::Var pred = add_p0(decoder_.forward(tape, inputs, ctx), batch, horizon);
    return regress(tape, pred, batch, topology_, w);
  }

  std::vector<PoseSequence> predict(std::span<const Sample> samples) override {
    return chunked(samples, [this](std::span<const Sample> part) {
      std::vector<Pose> p0s;
      for (const auto& s : part) p0s.push_back(s.p0);
      const auto ctx = features(part);
      return kind() == MethodKind::ours ? decoder_.generate(p0s, ctx, horizon())
                                        : decoder_.generate_autoregressive(p0s, ctx, horizon());
    });
  }

  nn::ParameterList parameters() override {
    auto out = decoder_.parameters();
    for (auto* p : context_.parameters()) out.push_back(p);
    return out;
  }
  std::uint64_t forward_calls() const override { return decoder_.forward_calls(); }
  void reset_forward_calls() override { decoder_.reset_forward_calls(); }

 private:
  PoseDecoder decoder_;
};

class LstmMethod final : public Forecaster {
 public:
  explicit LstmMethod(const MethodConfig& config) : Forecaster(config), lstm_(config.lstm_config(), config.seed) {}

  double train_step(std::span<const Sample* const> batch, const LossWeights& w, std::uint64_t dropout_seed) override {
    std::vector<nn::Matrix> inputs;
    for (const Sample* s : batch) {
      check_sample(*s);
      inputs.push_back(to_rows(build_input_ntp(s->p0, s->future, horizon())));
    }
    nn::Tape tape(true, dropout_seed);
    const auto ks = keys(batch);
    const nn::Var pred = lstm_.teacher_forced(tape, inputs, context_.batch(tape, ks));
    return regress(tape, pred, batch, topology_, w);
  }

  std::vector<PoseSequence> predict(std::span<const Sample> samples) override {
    return chunked(samples, [this](std::span<const Sample> part) {
      std::vector<Pose> p0s;
      for (const auto& s : part) p0s.push_back(s.p0);
      return lstm_.generate(p0s, features(part), horizon());
    });
  }

  nn::ParameterList parameters() override {
    auto out = lstm_.parameters();
    for (auto* p : context_.parameters()) out.push_back(p);
    return out;
  }
  std::uint64_t forward_calls() const override { return lstm_.steps(); }
  void reset_forward_calls() override { lstm_.reset_steps(); }

 private:
  baselines::LstmForecaster lstm_;
};

class QuantizedMethod final : public Forecaster {
 public:
  explicit QuantizedMethod(const MethodConfig& config) : Forecaster(config) {}

  void prepare(std::span<const Sample> train) override {
    std::vector<Pose> poses;
    for (const auto& s : train) {
      check_sample(s);
      poses.push_back(s.p0);
      for (const auto& f : s.future.frames()) poses.push_back(f);
    }
    set_codebook(baselines::Codebook::fit(poses, config_.codebook_size, config_.seed));
  }

  double train_step(std::span<const Sample* const> batch, const LossWeights&, std::uint64_t dropout_seed) override {
    require_codebook();
    std::vector<std::vector<int>> inputs;
    std::vector<int> targets;
    for (const Sample* s : batch) {
      check_sample(*s);
      std::vector<int> seq{codebook_.encode(s->p0)};
      for (int t = 0; t < horizon(); ++t) seq.push_back(codebook_.encode(s->future[static_cast<std::size_t>(t)]));
      inputs.emplace_back(seq.begin(), seq.end() - 1);
      targets.insert(targets.end(), seq.begin() + 1, seq.end());
    }
    nn::Tape tape(true, dropout_seed);
    const auto ks = keys(batch);
    const nn::Var loss = nn::cross_entropy(tokens_->logits(tape, inputs, context_.batch(tape, ks)), targets);
    tape.backward(loss);
    return loss.value()(0, 0);
  }

  std::vector<PoseSequence> predict(std::span<const Sample> samples) override {
    require_codebook();
    return chunked(samples, [this](std::span<const Sample> part) {
      std::vector<int> first;
      for (const auto& s : part) first.push_back(codebook_.encode(s.p0));
      const auto tokens = tokens_->generate(first, features(part), horizon());
      std::vector<PoseSequence> out;
      for (const auto& seq : tokens) out.push_back(codebook_.decode(seq));
      return out;
    });
  }

  nn::ParameterList parameters() override {
    require_codebook();
    auto out = tokens_->parameters();
    for (auto* p : context_.parameters()) out.push_back(p);
    return out;
  }
  std::map<std::string, nn::Matrix> buffers() const override {
    if (!tokens_) return {};
    return {{"vq.codebook", codebook_.codes()}};
  }
  void load_buffers(const std::map<std::string, nn::Matrix>& buffers) override {
    const auto it = buffers.find("vq.codebook");
    if (it == buffers.end()) throw FormatError("checkpoint lacks the vq.codebook tensor");
    set_codebook(baselines::Codebook(it->second));
  }
  std::uint64_t forward_calls() const override { return tokens_ ? tokens_->forward_calls() : 0; }
  void reset_forward_calls() override {
    if (tokens_) tokens_->reset_forward_calls();
  }

  const baselines::Codebook* codebook() const { return tokens_ ? &codebook_ : nullptr; }

 private:
  void set_codebook(baselines::Codebook cb) {
    if (cb.dim() != topology_.dim()) throw ShapeError("codebook width does not match the topology");
    codebook_ = std::move(cb);
    tokens_ = std::make_unique<baselines::TokenTransformer>(config_.model, codebook_.size(), config_.seed);
  }
  void require_codebook() const {
    if (!tokens_) throw ContractError("vq-tf needs prepare() or a checkpoint before use");
  }

  baselines::Codebook codebook_;
  std::unique_ptr<baselines::TokenTransformer> tokens_;
};

class NearestMethod final : public Forecaster {
 public:
  explicit NearestMethod(const MethodConfig& config) : Forecaster(config) {}

  void prepare(std::span<const Sample> train) override {
    db_.assign(train.begin(), train.end());
    if (kind() == MethodKind::nn_vl) db_features_ = features(db_);
  }
  bool trainable() const override { return false; }
  double train_step(std::span<const Sample* const>, const LossWeights&, std::uint64_t) override {
    throw ContractError(std::string(to_string(kind())) + " has no trainable parameters");
  }

  std::vector<PoseSequence> predict(std::span<const Sample> samples) override {
    if (db_.empty()) throw ConfigError("nearest-neighbour retrieval needs prepare() with a non-empty training set");
    std::vector<PoseSequence> out;
    if (kind() == MethodKind::nn_p) {
      for (const auto& s : samples) out.push_back(baselines::nn_pose(s.p0, db_));
    } else {
      const auto q = features(samples);
      for (const auto& f : q) out.push_back(baselines::nn_feature(f, db_features_, db_));
    }
    return out;
  }
  nn::ParameterList parameters() override { return {}; }

 private:
  std::vector<Sample> db_;
  std::vector<ContextFeatures> db_features_;
};

}  // namespace

Forecaster::Forecaster(const MethodConfig& config)
    : config_(config),
      topology_(build_topology(config.model.topology)),
      context_(config.context, config.seed ^ kContextSeedSalt) {
  config_.validate();
}

std::vector<ContextKey> Forecaster::keys(std::span<const Sample* const> batch) const {
  std::vector<ContextKey> out;
  out.reserve(batch.size());
  for (const Sample* s : batch) out.push_back(s->context_key());
  return out;
}

std::vector<ContextFeatures> Forecaster::features(std::span<const Sample> samples) const {
  std::vector<ContextFeatures> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(context_.features(s.context_key()));
  return out;
}

void Forecaster::check_sample(const Sample& s) const {
  if (s.topology != config_.model.topology)
    throw ConfigError("sample '" + s.id + "' uses topology " + std::string(to_string(s.topology)) +
                      " but the model expects " + std::string(to_string(config_.model.topology)));
  if (static_cast<int>(s.future.horizon()) != horizon())
    throw ConfigError("sample '" + s.id + "' has horizon " + std::to_string(s.future.horizon()) +
                      " but the model expects " + std::to_string(horizon()));
}

std::unique_ptr<Forecaster> make_forecaster(const MethodConfig& config) {
  switch (config.kind) {
    case MethodKind::ours:
    case MethodKind::tf_ntp:
      return std::make_unique<DecoderMethod>(config);
    case MethodKind::lstm:
      return std::make_unique<LstmMethod>(config);
    case MethodKind::vq_tf:
      return std::make_unique<QuantizedMethod>(config);
    case MethodKind::nn_p:
    case MethodKind::nn_vl:
      return std::make_unique<NearestMethod>(config);
  }
  throw ConfigError("unknown method");
}

const baselines::Codebook* codebook_of(const Forecaster& f) {
  const auto* q = dynamic_cast<const QuantizedMethod*>(&f);
  return q == nullptr ? nullptr : q->codebook();
}

std::vector<std::string> vocabulary_of(std::span<const Sample> samples) {
  std::set<std::string> labels;
  for (const auto& s : samples) labels.insert(s.label);
  return {labels.begin(), labels.end()};
}

EvalReport evaluate(Forecaster& model, std::span<const Sample> samples, double delta, double hardness_fraction) {
  if (samples.empty()) throw ContractError("evaluation needs at least one sample");
  if (delta <= 0.0) delta = default_pck_delta(model.topology().kind());
  const auto before = model.forward_calls();
  const auto preds = model.predict(samples);
  const auto calls = model.forward_calls() - before;
  std::vector<Pose> p0s;
  std::vector<PoseSequence> gts;
  for (const auto& s : samples) {
    p0s.push_back(s.p0);
    gts.push_back(s.future);
  }
  auto report = make_report(std::string(to_string(model.kind())), p0s, preds, gts, delta, hardness_fraction);
  report.forward_calls = calls;
  return report;
}

}  // namespace posecast
