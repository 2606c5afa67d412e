// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/nn/layers.hpp"

#include <cmath>

namespace posecast::nn {

std::size_t parameter_count(const ParameterList& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += p->size();
  return n;
}

void zero_grads(const ParameterList& params) {
  for (auto* p : params) p->zero_grad();
}

Matrix glorot(Eigen::Index in, Eigen::Index out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(in, out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Linear::Linear(const std::string& name, Eigen::Index in, Eigen::Index out, std::mt19937_64& rng)
    : weight(name + ".weight", glorot(in, out, rng)), bias(name + ".bias", Matrix::Zero(1, out), false) {}

Linear Linear::zeros(const std::string& name, Eigen::Index in, Eigen::Index out) {
  Linear l;
  l.weight = Parameter(name + ".weight", Matrix::Zero(in, out));
  l.bias = Parameter(name + ".bias", Matrix::Zero(1, out), false);
  return l;
}

Var Linear::operator()(Tape& tape, Var x) {
  return linear(x, tape.parameter(weight), tape.parameter(bias));
}

LayerNorm::LayerNorm(const std::string& name, Eigen::Index width)
    : gamma(name + ".gamma", Matrix::Ones(1, width), false),
      beta(name + ".beta", Matrix::Zero(1, width), false) {}

Var LayerNorm::operator()(Tape& tape, Var x) {
  return layer_norm(x, tape.parameter(gamma), tape.parameter(beta));
}

MultiHeadAttention::MultiHeadAttention(const std::string& name, Eigen::Index width, int h,
                                       std::mt19937_64& rng)
    : query(name + ".query", width, width, rng),
      key(name + ".key", width, width, rng),
      value(name + ".value", width, width, rng),
      output(name + ".output", width, width, rng),
      heads(h) {}

Var MultiHeadAttention::operator()(Tape& tape, Var x, Var memory, int batch, bool causal) {
  const Var q = query(tape, x);
  const Var k = key(tape, memory);
  const Var v = value(tape, memory);
  return output(tape, attention(q, k, v, batch, heads, causal));
}

void MultiHeadAttention::collect(ParameterList& out) {
  query.collect(out);
  key.collect(out);
  value.collect(out);
  output.collect(out);
}

FeedForward::FeedForward(const std::string& name, Eigen::Index width, Eigen::Index hidden,
                         std::mt19937_64& rng)
    : up(name + ".up", width, hidden, rng), down(name + ".down", hidden, width, rng) {}

Var FeedForward::operator()(Tape& tape, Var x) { return down(tape, gelu(up(tape, x))); }

DecoderBlock::DecoderBlock(const std::string& name, Eigen::Index width, int heads,
                           Eigen::Index ff_width, double drop, std::mt19937_64& rng)
    : norm_self(name + ".norm_self", width),
      norm_cross(name + ".norm_cross", width),
      norm_ff(name + ".norm_ff", width),
      self_attention(name + ".self_attn", width, heads, rng),
      cross_attention(name + ".cross_attn", width, heads, rng),
      feed_forward(name + ".ff", width, ff_width, rng),
      dropout(drop) {}

Var DecoderBlock::operator()(Tape& tape, Var x, Var memory, int batch, bool causal) {
  Var h = norm_self(tape, x);
  x = add(x, nn::dropout(self_attention(tape, h, h, batch, causal), dropout));
  h = norm_cross(tape, x);
  x = add(x, nn::dropout(cross_attention(tape, h, memory, batch, false), dropout));
  h = norm_ff(tape, x);
  return add(x, nn::dropout(feed_forward(tape, h), dropout));
}

void DecoderBlock::collect(ParameterList& out) {
  norm_self.collect(out);
  self_attention.collect(out);
  norm_cross.collect(out);
  cross_attention.collect(out);
  norm_ff.collect(out);
  feed_forward.collect(out);
}

LstmCell::LstmCell(const std::string& name, Eigen::Index in, Eigen::Index h, std::mt19937_64& rng)
    : input_proj(name + ".input", in, 4 * h, rng), hidden_proj(name + ".hidden", h, 4 * h, rng), hidden(h) {
  // Forget-gate bias of one keeps early gradients alive.
  input_proj.bias.value.middleCols(h, h).setOnes();
}

LstmCell::State LstmCell::operator()(Tape& tape, Var x, State prev) {
  const Var gates = add(input_proj(tape, x), hidden_proj(tape, prev.h));
  const Var i = sigmoid(slice_cols(gates, 0, hidden));
  const Var f = sigmoid(slice_cols(gates, hidden, hidden));
  const Var g = tanh(slice_cols(gates, 2 * hidden, hidden));
  const Var o = sigmoid(slice_cols(gates, 3 * hidden, hidden));
  const Var c = add(mul(f, prev.c), mul(i, g));
  const Var h = mul(o, tanh(c));
  return {h, c};
}

}  // namespace posecast::nn
