// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/baselines/lstm.hpp"

#include <random>
#include <string>

#include "posecast/error.hpp"

namespace posecast::baselines {

LstmForecaster::LstmForecaster(const LstmConfig& config, std::uint64_t seed)
    : config_(config), topology_(build_topology(config.topology)) {
  if (config_.hidden <= 0 || config_.context_width <= 0 || config_.context_rows <= 0)
    throw ConfigError("lstm widths must be positive");
  std::mt19937_64 rng(seed);
  const int in = topology_.dim() + config_.context_width * config_.context_rows;
  cell_ = nn::LstmCell("lstm.cell", in, config_.hidden, rng);
  head_ = nn::Linear::zeros("lstm.head", config_.hidden, topology_.dim());
}

nn::Var LstmForecaster::flatten_context(nn::Var context, int batch) const {
  const int rows = config_.context_rows;
  if (context.cols() != config_.context_width || context.rows() != static_cast<Eigen::Index>(batch) * rows)
    throw ShapeError("lstm context must hold " + std::to_string(rows) + " rows of width " +
                     std::to_string(config_.context_width) + " per sample");
  if (rows == 1) return context;
  std::vector<nn::Var> parts;
  for (int r = 0; r < rows; ++r) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) idx[static_cast<std::size_t>(b)] = static_cast<Eigen::Index>(b) * rows + r;
    parts.push_back(nn::select_rows(context, idx));
  }
  return nn::concat_cols(parts);
}

// `teacher` (batch * horizon rows, sample-major) supplies step inputs when set;
// otherwise each step reads the previous prediction.
nn::Var LstmForecaster::rollout(nn::Tape& tape, int batch, int horizon, nn::Var context, const nn::Matrix* teacher,
                                const nn::Matrix& first) {
  const nn::Var ctx = flatten_context(context, batch);
  const Eigen::Index dim = topology_.dim();
  nn::LstmCell::State state{tape.constant(nn::Matrix::Zero(batch, config_.hidden)),
                            tape.constant(nn::Matrix::Zero(batch, config_.hidden))};
  std::vector<nn::Var> outputs;
  outputs.reserve(static_cast<std::size_t>(horizon));
  nn::Var current = tape.constant(first);
  for (int t = 0; t < horizon; ++t) {
    if (teacher != nullptr && t > 0) {
      nn::Matrix rows(batch, dim);
      for (int b = 0; b < batch; ++b) rows.row(b) = teacher->row(static_cast<Eigen::Index>(b) * horizon + t);
      current = tape.constant(std::move(rows));
    }
    const nn::Var parts[] = {current, ctx};
    state = cell_(tape, nn::concat_cols(parts), state);
    const nn::Var next = nn::add(current, head_(tape, state.h));
    outputs.push_back(next);
    current = next;
  }
  const nn::Var time_major = nn::concat_rows(outputs);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(batch) * horizon);
  for (int b = 0; b < batch; ++b)
    for (int t = 0; t < horizon; ++t)
      order[static_cast<std::size_t>(b) * horizon + t] = static_cast<Eigen::Index>(t) * batch + b;
  return nn::select_rows(time_major, order);
}

nn::Var LstmForecaster::teacher_forced(nn::Tape& tape, std::span<const nn::Matrix> inputs, nn::Var context) {
  if (inputs.empty()) throw ContractError("lstm forward needs at least one sample");
  const int batch = static_cast<int>(inputs.size());
  const Eigen::Index horizon = inputs.front().rows();
  const Eigen::Index dim = topology_.dim();
  nn::Matrix teacher(batch * horizon, dim);
  nn::Matrix first(batch, dim);
  for (int b = 0; b < batch; ++b) {
    const auto& m = inputs[static_cast<std::size_t>(b)];
    if (m.rows() != horizon || m.cols() != dim) throw ShapeError("lstm inputs must share horizon and width");
    teacher.middleRows(b * horizon, horizon) = m;
    first.row(b) = m.row(0);
  }
  return rollout(tape, batch, static_cast<int>(horizon), context, &teacher, first);
}

std::vector<PoseSequence> LstmForecaster::generate(std::span<const Pose> p0s,
                                                   std::span<const ContextFeatures> contexts, int horizon) {
  if (p0s.empty() || p0s.size() != contexts.size()) throw ContractError("generate needs one context per pose");
  if (horizon < 1) throw ContractError("horizon must be at least 1");
  const int batch = static_cast<int>(p0s.size());
  const Eigen::Index dim = topology_.dim();
  nn::Matrix first(batch, dim);
  nn::Matrix ctx(batch * contexts.front().rows(), contexts.front().cols());
  for (int b = 0; b < batch; ++b) {
    const auto& p0 = p0s[static_cast<std::size_t>(b)];
    p0.check_against(topology_);
    for (Eigen::Index i = 0; i < dim; ++i) first(b, i) = p0[static_cast<std::size_t>(i)];
    const auto& c = contexts[static_cast<std::size_t>(b)];
    if (c.rows() != contexts.front().rows() || c.cols() != ctx.cols())
      throw ShapeError("context features in one batch must share a shape");
    ctx.middleRows(b * c.rows(), c.rows()) = c.matrix();
  }
  nn::Tape tape = nn::Tape::inference();
  const nn::Matrix& out = rollout(tape, batch, horizon, tape.constant(ctx), nullptr, first).value();
  steps_ += static_cast<std::uint64_t>(horizon) * static_cast<std::uint64_t>(batch);
  std::vector<PoseSequence> result;
  for (int b = 0; b < batch; ++b) {
    std::vector<Pose> frames;
    for (int t = 0; t < horizon; ++t) {
      const auto row = out.row(static_cast<Eigen::Index>(b) * horizon + t);
      frames.emplace_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    result.emplace_back(std::move(frames));
  }
  return result;
}

PoseSequence LstmForecaster::generate(const Pose& p0, const ContextFeatures& context, int horizon) {
  return generate(std::span<const Pose>(&p0, 1), std::span<const ContextFeatures>(&context, 1), horizon).front();
}

nn::ParameterList LstmForecaster::parameters() {
  nn::ParameterList out;
  cell_.collect(out);
  head_.collect(out);
  return out;
}

}  // namespace posecast::baselines
