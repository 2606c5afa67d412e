// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/nn/optim.hpp"

#include <cmath>

#include "posecast/error.hpp"

namespace posecast::nn {

AdamW::AdamW(ParameterList params, AdamWOptions options) : params_(std::move(params)), options_(options) {
  if (!(options_.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (options_.weight_decay < 0.0) throw ConfigError("weight decay must be nonnegative");
  for (const auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

double AdamW::step() {
  double sq = 0.0;
  for (const auto* p : params_) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  const double clip = (options_.clip_norm > 0.0 && norm > options_.clip_norm) ? options_.clip_norm / norm : 1.0;

  ++steps_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  const double lr = options_.learning_rate;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    const Matrix g = p.grad * clip;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * g;
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * g.cwiseProduct(g);
    if (p.decay && options_.weight_decay > 0.0) p.value *= (1.0 - lr * options_.weight_decay);
    p.value.array() -= lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + options_.epsilon);
    p.zero_grad();
  }
  return norm;
}

}  // namespace posecast::nn
