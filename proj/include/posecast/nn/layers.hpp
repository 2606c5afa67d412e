// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>
#include <vector>

#include "posecast/nn/tape.hpp"

namespace posecast::nn {

/// Non-owning, ordered view of a model's parameters. Order defines checkpoint layout.
using ParameterList = std::vector<Parameter*>;

std::size_t parameter_count(const ParameterList& params);
void zero_grads(const ParameterList& params);

/// Scaled-uniform (Glorot) initialization.
Matrix glorot(Eigen::Index in, Eigen::Index out, std::mt19937_64& rng);

struct Linear {
  Parameter weight;
  Parameter bias;

  Linear() = default;
  Linear(const std::string& name, Eigen::Index in, Eigen::Index out, std::mt19937_64& rng);
  /// All-zero weights and bias.
  static Linear zeros(const std::string& name, Eigen::Index in, Eigen::Index out);

  Var operator()(Tape& tape, Var x);
  void collect(ParameterList& out) { out.push_back(&weight); out.push_back(&bias); }
  Eigen::Index in() const { return weight.value.rows(); }
  Eigen::Index out() const { return weight.value.cols(); }
};

struct LayerNorm {
  Parameter gamma;
  Parameter beta;

  LayerNorm() = default;
  LayerNorm(const std::string& name, Eigen::Index width);
  Var operator()(Tape& tape, Var x);
  void collect(ParameterList& out) { out.push_back(&gamma); out.push_back(&beta); }
};

/// Multi-head attention with separate query / key / value / output projections.
struct MultiHeadAttention {
  Linear query, key, value, output;
  int heads = 1;

  MultiHeadAttention() = default;
  MultiHeadAttention(const std::string& name, Eigen::Index width, int heads, std::mt19937_64& rng);

  /// `x` holds batch * tq query rows; `memory` holds batch * tk key / value rows.
  Var operator()(Tape& tape, Var x, Var memory, int batch, bool causal);
  void collect(ParameterList& out);
};

struct FeedForward {
  Linear up, down;

  FeedForward() = default;
  FeedForward(const std::string& name, Eigen::Index width, Eigen::Index hidden, std::mt19937_64& rng);
  Var operator()(Tape& tape, Var x);
  void collect(ParameterList& out) { up.collect(out); down.collect(out); }
};

/// Pre-norm decoder block: masked self-attention, cross-attention over a memory, MLP.
struct DecoderBlock {
  LayerNorm norm_self, norm_cross, norm_ff;
  MultiHeadAttention self_attention, cross_attention;
  FeedForward feed_forward;
  double dropout = 0.0;

  DecoderBlock() = default;
  DecoderBlock(const std::string& name, Eigen::Index width, int heads, Eigen::Index ff_width,
               double dropout, std::mt19937_64& rng);

  Var operator()(Tape& tape, Var x, Var memory, int batch, bool causal);
  void collect(ParameterList& out);
};

/// LSTM cell; gate order in the fused projection is input, forget, cell, output.
struct LstmCell {
  Linear input_proj;
  Linear hidden_proj;
  Eigen::Index hidden = 0;

  LstmCell() = default;
  LstmCell(const std::string& name, Eigen::Index in, Eigen::Index hidden, std::mt19937_64& rng);

  struct State {
    Var h;
    Var c;
  };
  State operator()(Tape& tape, Var x, State prev);
  void collect(ParameterList& out) { input_proj.collect(out); hidden_proj.collect(out); }
};

}  // namespace posecast::nn
