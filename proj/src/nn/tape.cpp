// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/nn/tape.hpp"

#include <cmath>
#include <memory>

#include "posecast/error.hpp"

namespace posecast::nn {

const Matrix& Var::value() const { return tape_->value(*this); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  if (!record_grad_) return constant(p.value);
  nodes_.push_back(Node{p.value, {}, {}, &p, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, bool needs_grad, Backward backward) {
  nodes_.push_back(Node{std::move(value), {}, needs_grad ? std::move(backward) : Backward{}, nullptr,
                        needs_grad});
  return Var(this, nodes_.size() - 1);
}

bool Tape::needs_grad(std::initializer_list<Var> vs) const {
  for (const auto& v : vs)
    if (nodes_[v.id_].needs_grad) return true;
  return false;
}

void Tape::backward(Var root, const Matrix& seed) {
  if (root.tape_ != this) throw ContractError("backward root belongs to another tape");
  Node& r = nodes_[root.id_];
  if (seed.rows() != r.value.rows() || seed.cols() != r.value.cols())
    throw ShapeError("backward seed shape does not match root");
  accumulate(root, seed);
  for (std::size_t i = root.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.param != nullptr || n.grad.size() == 0 || !n.backward) continue;
    n.backward(n.grad);
  }
}

void Tape::backward(Var root) { backward(root, Matrix::Ones(1, 1)); }

namespace {

using RowArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Tape& tape_of(Var a) { return *a.tape(); }

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": operand shapes differ");
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Tape& t = tape_of(a);
  Matrix out = a.value() * b.value();
  return t.record(std::move(out), t.needs_grad({a, b}), [&t, a, b](const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.needs_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var linear(Var x, Var weight, Var bias) {
  if (x.cols() != weight.rows()) throw ShapeError("linear: input width does not match weight");
  if (bias.rows() != 1 || bias.cols() != weight.cols()) throw ShapeError("linear: bad bias shape");
  Tape& t = tape_of(x);
  Matrix out = x.value() * weight.value();
  out.rowwise() += bias.value().row(0);
  return t.record(std::move(out), t.needs_grad({x, weight, bias}), [&t, x, weight, bias](const Matrix& g) {
    if (t.needs_grad(x)) t.accumulate(x, g * weight.value().transpose());
    if (t.needs_grad(weight)) t.accumulate(weight, x.value().transpose() * g);
    if (t.needs_grad(bias)) t.accumulate(bias, g.colwise().sum());
  });
}

Var linear(Var x, Var weight) { return matmul(x, weight); }

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tape& t = tape_of(a);
  return t.record(a.value() + b.value(), t.needs_grad({a, b}), [&t, a, b](const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tape& t = tape_of(a);
  return t.record(a.value() - b.value(), t.needs_grad({a, b}), [&t, a, b](const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tape& t = tape_of(a);
  return t.record(a.value().cwiseProduct(b.value()), t.needs_grad({a, b}), [&t, a, b](const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
    if (t.needs_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  return t.record(a.value() * s, t.needs_grad(a), [&t, a, s](const Matrix& g) { t.accumulate(a, g * s); });
}

Var add_constant(Var a, const Matrix& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols()) throw ShapeError("add_constant: shapes differ");
  Tape& t = tape_of(a);
  return t.record(a.value() + c, t.needs_grad(a), [&t, a](const Matrix& g) { t.accumulate(a, g); });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  Matrix out = a.value().cwiseMax(0.0);
  return t.record(std::move(out), t.needs_grad(a), [&t, a](const Matrix& g) {
    t.accumulate(a, g.cwiseProduct((a.value().array() > 0.0).cast<double>().matrix()));
  });
}

Var gelu(Var a) {
  static constexpr double c = 0.7978845608028654;  // sqrt(2 / pi)
  static constexpr double k = 0.044715;
  Tape& t = tape_of(a);
  const auto& x = a.value().array();
  Matrix out = (0.5 * x * (1.0 + (c * (x + k * x.cube())).tanh())).matrix();
  return t.record(std::move(out), t.needs_grad(a), [&t, a](const Matrix& g) {
    const auto& x = a.value().array();
    const RowArray th = (c * (x + k * x.cube())).tanh();
    const RowArray d = 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th.square()) * c * (1.0 + 3.0 * k * x.square());
    t.accumulate(a, (g.array() * d).matrix());
  });
}

Var tanh(Var a) {
  Tape& t = tape_of(a);
  Matrix out = a.value().array().tanh().matrix();
  return t.record(out, t.needs_grad(a), [&t, a, out](const Matrix& g) {
    t.accumulate(a, (g.array() * (1.0 - out.array().square())).matrix());
  });
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return t.record(out, t.needs_grad(a), [&t, a, out](const Matrix& g) {
    t.accumulate(a, (g.array() * out.array() * (1.0 - out.array())).matrix());
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Eigen::Index d = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != d || beta.rows() != 1 || beta.cols() != d)
    throw ShapeError("layer_norm: affine parameters must be 1 x width");
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  auto xhat = std::make_shared<Matrix>(xv.rows(), d);
  auto inv_std = std::make_shared<Eigen::VectorXd>(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const double mean = xv.row(r).mean();
    const double var = (xv.row(r).array() - mean).square().mean();
    (*inv_std)(r) = 1.0 / std::sqrt(var + eps);
    xhat->row(r) = (xv.row(r).array() - mean) * (*inv_std)(r);
  }
  Matrix out = xhat->array().rowwise() * gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);
  return t.record(std::move(out), t.needs_grad({x, gamma, beta}),
                  [&t, x, gamma, beta, xhat, inv_std, d](const Matrix& g) {
                    if (t.needs_grad(gamma)) t.accumulate(gamma, (g.array() * xhat->array()).colwise().sum().matrix());
                    if (t.needs_grad(beta)) t.accumulate(beta, g.colwise().sum());
                    if (!t.needs_grad(x)) return;
                    Matrix dxhat = g.array().rowwise() * gamma.value().row(0).array();
                    Matrix dx(g.rows(), d);
                    for (Eigen::Index r = 0; r < g.rows(); ++r) {
                      const double m1 = dxhat.row(r).mean();
                      const double m2 = dxhat.row(r).dot(xhat->row(r)) / static_cast<double>(d);
                      dx.row(r) = (*inv_std)(r) * (dxhat.row(r).array() - m1 - xhat->row(r).array() * m2);
                    }
                    t.accumulate(x, dx);
                  });
}

Var dropout(Var x, double p) {
  Tape& t = tape_of(x);
  if (!t.training() || p <= 0.0) return x;
  if (p >= 1.0) throw ConfigError("dropout rate must be below 1");
  std::bernoulli_distribution keep(1.0 - p);
  auto mask = std::make_shared<Matrix>(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask->size(); ++i) mask->data()[i] = keep(t.rng()) ? 1.0 / (1.0 - p) : 0.0;
  return t.record(x.value().cwiseProduct(*mask), t.needs_grad(x),
                  [&t, x, mask](const Matrix& g) { t.accumulate(x, g.cwiseProduct(*mask)); });
}

Var attention(Var q, Var k, Var v, int batch, int heads, bool causal) {
  const Eigen::Index d = q.cols();
  if (batch <= 0 || heads <= 0 || d % heads != 0) throw ShapeError("attention: width not divisible by heads");
  if (k.cols() != d || v.cols() != d || k.rows() != v.rows()) throw ShapeError("attention: k/v shape mismatch");
  if (q.rows() % batch != 0 || k.rows() % batch != 0) throw ShapeError("attention: rows not divisible by batch");
  const Eigen::Index tq = q.rows() / batch, tk = k.rows() / batch, dh = d / heads;
  if (causal && tq != tk) throw ShapeError("attention: causal mask needs square attention");
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  Tape& t = tape_of(q);

  auto probs = std::make_shared<std::vector<Matrix>>(static_cast<std::size_t>(batch * heads));
  Matrix out(q.rows(), d);
  const Matrix& qv = q.value();
  const Matrix& kv = k.value();
  const Matrix& vv = v.value();
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads; ++h) {
      const auto qb = qv.block(b * tq, h * dh, tq, dh);
      const auto kb = kv.block(b * tk, h * dh, tk, dh);
      Matrix s = (qb * kb.transpose()) * inv_sqrt;
      for (Eigen::Index i = 0; i < tq; ++i) {
        const Eigen::Index visible = causal ? i + 1 : tk;
        const double mx = s.row(i).head(visible).maxCoeff();
        double total = 0.0;
        for (Eigen::Index j = 0; j < tk; ++j) {
          const double e = j < visible ? std::exp(s(i, j) - mx) : 0.0;
          s(i, j) = e;
          total += e;
        }
        s.row(i) /= total;
      }
      out.block(b * tq, h * dh, tq, dh).noalias() = s * vv.block(b * tk, h * dh, tk, dh);
      (*probs)[static_cast<std::size_t>(b * heads + h)] = std::move(s);
    }
  }
  return t.record(std::move(out), t.needs_grad({q, k, v}),
                  [&t, q, k, v, batch, heads, tq, tk, dh, inv_sqrt, probs](const Matrix& g) {
                    const Matrix& qv = q.value();
                    const Matrix& kv = k.value();
                    const Matrix& vv = v.value();
                    Matrix dq = Matrix::Zero(qv.rows(), qv.cols());
                    Matrix dk = Matrix::Zero(kv.rows(), kv.cols());
                    Matrix dv = Matrix::Zero(vv.rows(), vv.cols());
                    for (int b = 0; b < batch; ++b) {
                      for (int h = 0; h < heads; ++h) {
                        const Matrix& p = (*probs)[static_cast<std::size_t>(b * heads + h)];
                        const auto go = g.block(b * tq, h * dh, tq, dh);
                        dv.block(b * tk, h * dh, tk, dh).noalias() += p.transpose() * go;
                        Matrix dp = go * vv.block(b * tk, h * dh, tk, dh).transpose();
                        const Eigen::VectorXd rowdot = (dp.array() * p.array()).rowwise().sum();
                        Matrix ds = (p.array() * (dp.array().colwise() - rowdot.array())).matrix() * inv_sqrt;
                        dq.block(b * tq, h * dh, tq, dh).noalias() += ds * kv.block(b * tk, h * dh, tk, dh);
                        dk.block(b * tk, h * dh, tk, dh).noalias() += ds.transpose() * qv.block(b * tq, h * dh, tq, dh);
                      }
                    }
                    t.accumulate(q, dq);
                    t.accumulate(k, dk);
                    t.accumulate(v, dv);
                  });
}

Var slice_rows(Var x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.rows()) throw ShapeError("slice_rows: out of range");
  Tape& t = tape_of(x);
  Matrix out = x.value().middleRows(start, count);
  return t.record(std::move(out), t.needs_grad(x), [&t, x, start, count](const Matrix& g) {
    Matrix full = Matrix::Zero(x.rows(), x.cols());
    full.middleRows(start, count) = g;
    t.accumulate(x, full);
  });
}

Var slice_cols(Var x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) throw ShapeError("slice_cols: out of range");
  Tape& t = tape_of(x);
  Matrix out = x.value().middleCols(start, count);
  return t.record(std::move(out), t.needs_grad(x), [&t, x, start, count](const Matrix& g) {
    Matrix full = Matrix::Zero(x.rows(), x.cols());
    full.middleCols(start, count) = g;
    t.accumulate(x, full);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: nothing to concatenate");
  Tape& t = tape_of(parts.front());
  Eigen::Index rows = 0;
  bool grad = false;
  for (const auto& p : parts) {
    if (p.cols() != parts.front().cols()) throw ShapeError("concat_rows: widths differ");
    rows += p.rows();
    grad = grad || t.needs_grad(p);
  }
  Matrix out(rows, parts.front().cols());
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), grad, [&t, inputs](const Matrix& g) {
    Eigen::Index r = 0;
    for (const auto& p : inputs) {
      if (t.needs_grad(p)) t.accumulate(p, g.middleRows(r, p.rows()));
      r += p.rows();
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
  Tape& t = tape_of(parts.front());
  Eigen::Index cols = 0;
  bool grad = false;
  for (const auto& p : parts) {
    if (p.rows() != parts.front().rows()) throw ShapeError("concat_cols: heights differ");
    cols += p.cols();
    grad = grad || t.needs_grad(p);
  }
  Matrix out(parts.front().rows(), cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), grad, [&t, inputs](const Matrix& g) {
    Eigen::Index c = 0;
    for (const auto& p : inputs) {
      if (t.needs_grad(p)) t.accumulate(p, g.middleCols(c, p.cols()));
      c += p.cols();
    }
  });
}

Var gather_rows(Var table, std::span<const int> indices) {
  std::vector<Eigen::Index> idx(indices.begin(), indices.end());
  return select_rows(table, idx);
}

Var select_rows(Var x, std::span<const Eigen::Index> indices) {
  Tape& t = tape_of(x);
  Matrix out(static_cast<Eigen::Index>(indices.size()), x.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= x.rows()) throw ShapeError("select_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = x.value().row(indices[i]);
  }
  std::vector<Eigen::Index> idx(indices.begin(), indices.end());
  return t.record(std::move(out), t.needs_grad(x), [&t, x, idx](const Matrix& g) {
    Matrix full = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) full.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(x, full);
  });
}

Var cross_entropy(Var logits, std::span<const int> targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows())
    throw ShapeError("cross_entropy: one target per row required");
  Tape& t = tape_of(logits);
  const Matrix& z = logits.value();
  auto probs = std::make_shared<Matrix>(z.rows(), z.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const int target = targets[static_cast<std::size_t>(r)];
    if (target < 0 || target >= z.cols()) throw ShapeError("cross_entropy: target out of range");
    const double mx = z.row(r).maxCoeff();
    probs->row(r) = (z.row(r).array() - mx).exp();
    const double total = probs->row(r).sum();
    probs->row(r) /= total;
    loss -= z(r, target) - mx - std::log(total);
  }
  const double n = static_cast<double>(z.rows());
  Matrix out(1, 1);
  out(0, 0) = loss / n;
  std::vector<int> tg(targets.begin(), targets.end());
  return t.record(std::move(out), t.needs_grad(logits), [&t, logits, probs, tg, n](const Matrix& g) {
    Matrix d = *probs;
    for (std::size_t r = 0; r < tg.size(); ++r) d(static_cast<Eigen::Index>(r), tg[r]) -= 1.0;
    t.accumulate(logits, d * (g(0, 0) / n));
  });
}

Var sum(Var x) {
  Tape& t = tape_of(x);
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  return t.record(std::move(out), t.needs_grad(x), [&t, x](const Matrix& g) {
    t.accumulate(x, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Matrix sinusoidal_encoding(Eigen::Index positions, Eigen::Index width) {
  Matrix pe(positions, width);
  for (Eigen::Index pos = 0; pos < positions; ++pos) {
    for (Eigen::Index i = 0; i < width; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(width));
      pe(pos, i) = (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return pe;
}

}  // namespace posecast::nn
