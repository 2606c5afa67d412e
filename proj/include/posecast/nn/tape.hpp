// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal reverse-mode autodiff over dense row-major matrices.
//
// A Tape records every operation of one forward pass. Calling backward() walks
// the records in reverse and accumulates gradients into the tape nodes and,
// for parameter leaves, straight into Parameter::grad.

#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace posecast::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

/// A trainable tensor with a stable name (used as the checkpoint key).
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool decay = true;  ///< subject to decoupled weight decay

  Parameter() = default;
  Parameter(std::string n, Matrix v, bool wd = true)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())), decay(wd) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(value.size()); }
};

class Tape;

/// Handle to a node on a tape.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(const Matrix& grad_out)>;

  /// `record_grad == false` turns parameters into constants (inference).
  explicit Tape(bool training = false, std::uint64_t dropout_seed = 0, bool record_grad = true)
      : training_(training), record_grad_(record_grad), rng_(dropout_seed) {}

  static Tape inference() { return Tape(false, 0, false); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var parameter(Parameter& p);
  /// Adds an op node. `needs_grad` should be true if any input needs a gradient.
  Var record(Matrix value, bool needs_grad, Backward backward);

  const Matrix& value(Var v) const { return nodes_[v.id_].value; }
  bool needs_grad(Var v) const { return nodes_[v.id_].needs_grad; }
  bool needs_grad(std::initializer_list<Var> vs) const;

  /// Adds `g` to the gradient of `v`. No-op if v does not need a gradient.
  template <typename Derived>
  void accumulate(Var v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.id_];
    if (!n.needs_grad) return;
    if (n.param != nullptr) {
      n.param->grad += g;
      return;
    }
    if (n.grad.size() == 0) n.grad = g;
    else n.grad += g;
  }

  /// Back-propagates `seed` (d objective / d root) through the recorded ops.
  void backward(Var root, const Matrix& seed);
  /// Seeds a 1x1 root with 1.
  void backward(Var root);

  bool training() const noexcept { return training_; }
  std::mt19937_64& rng() noexcept { return rng_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  bool training_;
  bool record_grad_;
  std::mt19937_64 rng_;
};

// ---- ops -------------------------------------------------------------------

Var matmul(Var a, Var b);
/// x W + b, with W (in x out) and b (1 x out) broadcast over rows.
Var linear(Var x, Var weight, Var bias);
Var linear(Var x, Var weight);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// Adds a constant matrix (no gradient flows into it).
Var add_constant(Var a, const Matrix& c);
Var relu(Var a);
Var gelu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
/// Row-wise layer normalization with affine gamma / beta (1 x d).
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
/// Inverted dropout; identity when the tape is not training or p == 0.
Var dropout(Var x, double p);

/// Fused multi-head scaled dot-product attention on stacked batches.
/// q is (batch * tq) x d, k and v are (batch * tk) x d. Heads split d evenly.
/// With `causal`, query i of a sample only sees keys j <= i (requires tq == tk).
Var attention(Var q, Var k, Var v, int batch, int heads, bool causal);

Var slice_rows(Var x, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var x, Eigen::Index start, Eigen::Index count);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
/// Rows table[indices[i]].
Var gather_rows(Var table, std::span<const int> indices);
/// Selects rows by index (a gather on an arbitrary var).
Var select_rows(Var x, std::span<const Eigen::Index> indices);

/// Mean softmax cross-entropy over rows; targets are class indices. Returns 1 x 1.
Var cross_entropy(Var logits, std::span<const int> targets);
Var sum(Var x);

/// Fixed sinusoidal table: rows are positions, columns alternate sin / cos.
Matrix sinusoidal_encoding(Eigen::Index positions, Eigen::Index width);

}  // namespace posecast::nn
