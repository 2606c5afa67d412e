// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/decoder.hpp"

#include <random>
#include <string>

#include "posecast/error.hpp"

namespace posecast {

std::string_view to_string(InputMode mode) { return mode == InputMode::ntp ? "ntp" : "placeholder"; }
std::string_view to_string(AttentionMode mode) { return mode == AttentionMode::full ? "full" : "causal"; }

InputMode parse_input_mode(std::string_view name) {
  if (name == "ntp") return InputMode::ntp;
  if (name == "placeholder") return InputMode::placeholder;
  throw ConfigError("unknown input mode '" + std::string(name) + "' (expected ntp or placeholder)");
}

AttentionMode parse_attention_mode(std::string_view name) {
  if (name == "full") return AttentionMode::full;
  if (name == "causal") return AttentionMode::causal;
  throw ConfigError("unknown attention mode '" + std::string(name) + "' (expected full or causal)");
}

void ModelConfig::validate() const {
  if (d_model <= 0 || n_heads <= 0 || n_layers <= 0 || feedforward_width <= 0)
    throw ConfigError("model widths, heads and layers must be positive");
  if (d_model % n_heads != 0) throw ConfigError("d_model must be divisible by n_heads");
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (context_width <= 0) throw ConfigError("context width must be positive");
  if (topology == TopologyKind::custom) throw ConfigError("decoder needs a canonical topology");
}

int ModelConfig::pose_dim() const { return build_topology(topology).dim(); }

DecoderInput build_input_placeholder(const Pose& p0, int horizon, std::span<const double> prd_token) {
  if (horizon < 1) throw ContractError("placeholder input needs horizon >= 1");
  if (prd_token.size() != p0.dim()) throw ContractError("placeholder token width does not match the pose");
  DecoderInput in;
  in.mode = InputMode::placeholder;
  in.prd_token.assign(prd_token.begin(), prd_token.end());
  const auto dim = static_cast<Eigen::Index>(p0.dim());
  in.rows.resize(horizon, dim);
  for (Eigen::Index i = 0; i < dim; ++i) in.rows(0, i) = p0[static_cast<std::size_t>(i)];
  for (Eigen::Index t = 1; t < horizon; ++t)
    for (Eigen::Index i = 0; i < dim; ++i) in.rows(t, i) = prd_token[static_cast<std::size_t>(i)];
  return in;
}

DecoderInput build_input_ntp(const Pose& p0, const PoseSequence& future, int horizon) {
  const int t_total = horizon < 0 ? static_cast<int>(future.horizon()) : horizon;
  if (t_total < 1) throw ContractError("next-token input needs horizon >= 1");
  if (static_cast<std::size_t>(t_total) > future.horizon() + 1)
    throw ContractError("next-token input horizon exceeds the available frames");
  if (future.horizon() > 0 && future.dim() != p0.dim())
    throw ContractError("future frames and initial pose differ in width");
  DecoderInput in;
  in.mode = InputMode::ntp;
  const auto dim = static_cast<Eigen::Index>(p0.dim());
  in.rows.resize(t_total, dim);
  for (Eigen::Index t = 0; t < t_total; ++t) {
    const Pose& src = t == 0 ? p0 : future[static_cast<std::size_t>(t - 1)];
    for (Eigen::Index i = 0; i < dim; ++i) in.rows(t, i) = src[static_cast<std::size_t>(i)];
  }
  return in;
}

PoseDecoder::PoseDecoder(const ModelConfig& config, std::uint64_t seed)
    : config_(config), topology_(build_topology(config.topology)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const int dim = topology_.dim();
  pose_in_ = nn::Linear("decoder.pose_in", dim, config_.d_model, rng);
  nn::Matrix prd = nn::Matrix::Zero(1, dim);
  if (config_.learned_prd) {
    std::normal_distribution<double> dist(0.0, 0.05);
    for (Eigen::Index i = 0; i < prd.size(); ++i) prd.data()[i] = dist(rng);
  }
  prd_ = nn::Parameter("decoder.prd_token", std::move(prd), false);
  context_in_ = nn::Linear("decoder.context_in", config_.context_width, config_.d_model, rng);
  for (int l = 0; l < config_.n_layers; ++l)
    blocks_.emplace_back("decoder.block" + std::to_string(l), config_.d_model, config_.n_heads,
                         config_.feedforward_width, config_.dropout, rng);
  final_norm_ = nn::LayerNorm("decoder.final_norm", config_.d_model);
  // Untrained model predicts no motion.
  head_ = nn::Linear::zeros("decoder.head", config_.d_model, dim);
}

std::span<const double> PoseDecoder::prd_token() const {
  return {prd_.value.data(), static_cast<std::size_t>(prd_.value.size())};
}

const nn::Matrix& PoseDecoder::positions(Eigen::Index count, Eigen::Index& cached, nn::Matrix& table) {
  if (count > cached) {
    table = nn::sinusoidal_encoding(count, config_.d_model);
    cached = count;
  }
  return table;
}

nn::Var PoseDecoder::forward_stacked(nn::Tape& tape, std::span<const DecoderInput> inputs, nn::Var context) {
  if (inputs.empty()) throw ContractError("decoder forward needs at least one input");
  const int batch = static_cast<int>(inputs.size());
  const Eigen::Index horizon = inputs.front().horizon();
  const Eigen::Index dim = topology_.dim();
  const InputMode mode = inputs.front().mode;
  for (const auto& in : inputs) {
    if (in.horizon() != horizon || in.rows.cols() != dim || in.mode != mode)
      throw ShapeError("decoder inputs in one batch must share horizon, width and mode");
  }
  if (horizon < 1) throw ContractError("decoder input is empty");
  if (context.cols() != config_.context_width)
    throw ShapeError("context width " + std::to_string(context.cols()) + " does not match model d_M " +
                     std::to_string(config_.context_width));
  if (context.rows() % batch != 0 || context.rows() == 0)
    throw ShapeError("context rows are not a multiple of the batch size");
  const Eigen::Index ctx_rows = context.rows() / batch;

  nn::Matrix stacked(batch * horizon, dim);
  for (int b = 0; b < batch; ++b) {
    stacked.middleRows(b * horizon, horizon) = inputs[static_cast<std::size_t>(b)].rows;
    if (config_.center_p0) {
      // Pose-carrying rows: row 0 in placeholder mode, every row in next-token mode.
      const Eigen::Index pose_rows = mode == InputMode::placeholder ? 1 : horizon;
      double cx = 0.0, cy = 0.0;
      for (Eigen::Index j = 0; j < dim / 2; ++j) {
        cx += stacked(b * horizon, 2 * j);
        cy += stacked(b * horizon, 2 * j + 1);
      }
      cx /= static_cast<double>(dim / 2);
      cy /= static_cast<double>(dim / 2);
      for (Eigen::Index t = 0; t < pose_rows; ++t) {
        for (Eigen::Index j = 0; j < dim / 2; ++j) {
          stacked(b * horizon + t, 2 * j) -= cx;
          stacked(b * horizon + t, 2 * j + 1) -= cy;
        }
      }
    }
  }

  nn::Var x;
  if (mode == InputMode::placeholder && config_.learned_prd && horizon > 1) {
    // Rows 1..T-1 are copies of the token, so their gradients sum into it.
    const nn::Var prd = tape.parameter(prd_);
    x = tape.record(std::move(stacked), tape.needs_grad(prd), [&tape, prd, batch, horizon](const nn::Matrix& g) {
      nn::Matrix acc = nn::Matrix::Zero(1, g.cols());
      for (int b = 0; b < batch; ++b) acc += g.middleRows(b * horizon + 1, horizon - 1).colwise().sum();
      tape.accumulate(prd, acc);
    });
  } else {
    x = tape.constant(std::move(stacked));
  }

  nn::Var h = pose_in_(tape, x);
  if (config_.positional_encoding) {
    const auto& pe = positions(horizon, pose_pe_rows_, pose_pe_);
    nn::Matrix tiled(batch * horizon, config_.d_model);
    for (int b = 0; b < batch; ++b) tiled.middleRows(b * horizon, horizon) = pe.topRows(horizon);
    h = nn::add_constant(h, tiled);
  }
  nn::Var memory = context_in_(tape, context);
  {
    const auto& pe = positions(ctx_rows, context_pe_rows_, context_pe_);
    nn::Matrix tiled(batch * ctx_rows, config_.d_model);
    for (int b = 0; b < batch; ++b) tiled.middleRows(b * ctx_rows, ctx_rows) = pe.topRows(ctx_rows);
    memory = nn::add_constant(memory, tiled);
  }
  // Teacher-forced rows hold ground truth, so next-token mode is always masked.
  const bool causal = config_.attention == AttentionMode::causal || mode == InputMode::ntp;
  for (auto& block : blocks_) h = block(tape, h, memory, batch, causal);
  h = final_norm_(tape, h);
  forward_calls_ += static_cast<std::uint64_t>(batch);
  return head_(tape, h);
}

nn::Var PoseDecoder::forward(nn::Tape& tape, std::span<const DecoderInput> inputs, nn::Var context) {
  return forward_stacked(tape, inputs, context);
}

DisplacementSequence PoseDecoder::forward(const DecoderInput& input, const ContextFeatures& context) {
  nn::Tape tape = nn::Tape::inference();
  const nn::Var ctx = tape.constant(context.matrix());
  const nn::Var out = forward_stacked(tape, std::span<const DecoderInput>(&input, 1), ctx);
  const nn::Matrix& v = out.value();
  return DisplacementSequence(static_cast<std::size_t>(v.rows()), static_cast<std::size_t>(v.cols()),
                              std::vector<double>(v.data(), v.data() + v.size()));
}

namespace {

nn::Matrix stack_contexts(std::span<const ContextFeatures> contexts) {
  const Eigen::Index rows = contexts.front().rows();
  nn::Matrix m(rows * static_cast<Eigen::Index>(contexts.size()), contexts.front().cols());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    if (contexts[i].rows() != rows || contexts[i].cols() != m.cols())
      throw ShapeError("context features in one batch must share a shape");
    m.middleRows(static_cast<Eigen::Index>(i) * rows, rows) = contexts[i].matrix();
  }
  return m;
}

}  // namespace

PoseSequence PoseDecoder::generate(const Pose& p0, const ContextFeatures& context, int horizon) {
  return generate(std::span<const Pose>(&p0, 1), std::span<const ContextFeatures>(&context, 1), horizon).front();
}

std::vector<PoseSequence> PoseDecoder::generate(std::span<const Pose> p0s, std::span<const ContextFeatures> contexts,
                                                int horizon) {
  if (p0s.size() != contexts.size() || p0s.empty()) throw ContractError("generate needs one context per pose");
  std::vector<DecoderInput> inputs;
  inputs.reserve(p0s.size());
  for (const auto& p0 : p0s) {
    p0.check_against(topology_);
    inputs.push_back(placeholder_input(p0, horizon));
  }
  nn::Tape tape = nn::Tape::inference();
  const nn::Var ctx = tape.constant(stack_contexts(contexts));
  const nn::Matrix& out = forward_stacked(tape, inputs, ctx).value();
  std::vector<PoseSequence> result;
  const auto dim = static_cast<std::size_t>(out.cols());
  for (std::size_t b = 0; b < p0s.size(); ++b) {
    const auto block = out.middleRows(static_cast<Eigen::Index>(b) * horizon, horizon);
    std::vector<double> values(static_cast<std::size_t>(block.size()));
    for (Eigen::Index t = 0; t < horizon; ++t)
      for (Eigen::Index i = 0; i < block.cols(); ++i) values[static_cast<std::size_t>(t) * dim + i] = block(t, i);
    result.push_back(apply_displacements(p0s[b], DisplacementSequence(horizon, dim, std::move(values))));
  }
  return result;
}

PoseSequence PoseDecoder::generate_autoregressive(const Pose& p0, const ContextFeatures& context, int horizon) {
  return generate_autoregressive(std::span<const Pose>(&p0, 1), std::span<const ContextFeatures>(&context, 1),
                                 horizon)
      .front();
}

std::vector<PoseSequence> PoseDecoder::generate_autoregressive(std::span<const Pose> p0s,
                                                               std::span<const ContextFeatures> contexts,
                                                               int horizon) {
  if (p0s.size() != contexts.size() || p0s.empty()) throw ContractError("generate needs one context per pose");
  if (horizon < 1) throw ContractError("horizon must be at least 1");
  const auto batch = p0s.size();
  const Eigen::Index dim = topology_.dim();
  std::vector<DecoderInput> inputs(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    p0s[b].check_against(topology_);
    inputs[b].mode = InputMode::ntp;
    inputs[b].rows.resize(1, dim);
    for (Eigen::Index i = 0; i < dim; ++i) inputs[b].rows(0, i) = p0s[b][static_cast<std::size_t>(i)];
  }
  const nn::Matrix ctx_rows = stack_contexts(contexts);
  std::vector<std::vector<Pose>> frames(batch);
  for (int step = 1; step <= horizon; ++step) {
    nn::Tape tape = nn::Tape::inference();
    const nn::Var ctx = tape.constant(ctx_rows);
    const nn::Matrix& out = forward_stacked(tape, inputs, ctx).value();
    for (std::size_t b = 0; b < batch; ++b) {
      const auto last = out.row(static_cast<Eigen::Index>(b) * step + step - 1);
      std::vector<double> c(static_cast<std::size_t>(dim));
      for (Eigen::Index i = 0; i < dim; ++i) c[static_cast<std::size_t>(i)] = p0s[b][static_cast<std::size_t>(i)] + last(i);
      Pose next(std::move(c));
      if (step < horizon) {
        inputs[b].rows.conservativeResize(step + 1, dim);
        for (Eigen::Index i = 0; i < dim; ++i) inputs[b].rows(step, i) = next[static_cast<std::size_t>(i)];
      }
      frames[b].push_back(std::move(next));
    }
  }
  std::vector<PoseSequence> result;
  for (auto& f : frames) result.emplace_back(std::move(f));
  return result;
}

nn::ParameterList PoseDecoder::parameters() {
  nn::ParameterList out;
  pose_in_.collect(out);
  if (config_.learned_prd) out.push_back(&prd_);
  context_in_.collect(out);
  for (auto& b : blocks_) b.collect(out);
  final_norm_.collect(out);
  head_.collect(out);
  return out;
}

}  // namespace posecast
