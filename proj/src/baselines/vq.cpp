// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/baselines/vq.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "posecast/error.hpp"
#include "posecast/metrics.hpp"

namespace posecast::baselines {

namespace {

double squared_distance(const double* a, const double* b, Eigen::Index n) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

int nearest_row(const nn::Matrix& codes, const double* x, Eigen::Index rows_in_use, double* best_out = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < rows_in_use; ++k) {
    const double d = squared_distance(codes.row(k).data(), x, codes.cols());
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  if (best_out != nullptr) *best_out = best_d;
  return best;
}

}  // namespace

Codebook::Codebook(nn::Matrix codes) : codes_(std::move(codes)) {
  if (codes_.rows() == 0 || codes_.cols() == 0) throw ConfigError("codebook must hold at least one code");
}

Codebook Codebook::fit(std::span<const Pose> poses, int k, std::uint64_t seed, int max_iterations) {
  if (k < 1) throw ConfigError("codebook size must be at least 1");
  if (poses.empty()) throw ConfigError("codebook fitting needs at least one pose");
  const auto n = static_cast<Eigen::Index>(poses.size());
  const auto dim = static_cast<Eigen::Index>(poses.front().dim());
  nn::Matrix x(n, dim);
  std::set<std::vector<double>> distinct;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = poses[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(p.dim()) != dim) throw ContractError("codebook poses differ in width");
    for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = p[static_cast<std::size_t>(j)];
    distinct.emplace(p.coords().begin(), p.coords().end());
  }
  Codebook cb;
  int codes = k;
  if (static_cast<std::size_t>(k) > distinct.size()) {
    cb.degenerate_ = true;
    codes = static_cast<int>(distinct.size());
  }

  std::mt19937_64 rng(seed);
  nn::Matrix centers(codes, dim);
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  centers.row(0) = x.row(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  for (int c = 1; c < codes; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(x.row(i).data(), centers.row(c - 1).data(), dim));
      total += d;
    }
    double target = std::uniform_real_distribution<double>(0.0, total)(rng);
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = d2[static_cast<std::size_t>(i)];
      if (d <= 0.0) continue;
      pick = i;
      target -= d;
      if (target <= 0.0) break;
    }
    centers.row(c) = x.row(pick);
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<double> dist(static_cast<std::size_t>(n));
  int it = 0;
  for (; it < max_iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = nearest_row(centers, x.row(i).data(), codes, &dist[static_cast<std::size_t>(i)]);
      if (a != assign[static_cast<std::size_t>(i)]) changed = true;
      assign[static_cast<std::size_t>(i)] = a;
    }
    if (!changed && it > 0) break;
    nn::Matrix sums = nn::Matrix::Zero(codes, dim);
    std::vector<int> counts(static_cast<std::size_t>(codes), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < codes; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: move it to the worst-served point.
      const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
      centers.row(c) = x.row(far);
      dist[static_cast<std::size_t>(far)] = 0.0;
    }
  }
  cb.codes_ = std::move(centers);
  cb.iterations_ = it;
  return cb;
}

int Codebook::encode(const Pose& pose) const {
  if (static_cast<Eigen::Index>(pose.dim()) != codes_.cols()) throw ContractError("pose width differs from codebook");
  return nearest_row(codes_, pose.coords().data(), codes_.rows());
}

Pose Codebook::decode(int index) const {
  if (index < 0 || index >= size()) throw ContractError("code index " + std::to_string(index) + " out of range");
  const auto row = codes_.row(index);
  return Pose(std::vector<double>(row.data(), row.data() + row.size()));
}

std::vector<int> Codebook::encode(const PoseSequence& seq) const {
  std::vector<int> out;
  out.reserve(seq.horizon());
  for (const auto& p : seq.frames()) out.push_back(encode(p));
  return out;
}

PoseSequence Codebook::decode(std::span<const int> indices) const {
  std::vector<Pose> frames;
  frames.reserve(indices.size());
  for (int i : indices) frames.push_back(decode(i));
  return PoseSequence(std::move(frames));
}

PoseSequence Codebook::quantize(const PoseSequence& seq) const {
  const auto idx = encode(seq);
  return decode(idx);
}

double Codebook::reconstruction_rmse(std::span<const PoseSequence> seqs) const {
  std::vector<PoseSequence> q;
  q.reserve(seqs.size());
  for (const auto& s : seqs) q.push_back(quantize(s));
  return evaluate_set(q, seqs, 0.05).rmse;
}

std::vector<Pose> collect_poses(std::span<const Pose> p0s, std::span<const PoseSequence> futures) {
  std::vector<Pose> out;
  for (std::size_t i = 0; i < p0s.size(); ++i) {
    out.push_back(p0s[i]);
    if (i < futures.size())
      for (const auto& f : futures[i].frames()) out.push_back(f);
  }
  return out;
}

TokenTransformer::TokenTransformer(const ModelConfig& config, int vocabulary, std::uint64_t seed)
    : config_(config), vocabulary_(vocabulary) {
  config_.validate();
  if (vocabulary < 1) throw ConfigError("token vocabulary must be positive");
  std::mt19937_64 rng(seed);
  nn::Matrix embed(vocabulary, config_.d_model);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (Eigen::Index i = 0; i < embed.size(); ++i) embed.data()[i] = dist(rng);
  embedding_ = nn::Parameter("vq.embedding", std::move(embed), false);
  context_in_ = nn::Linear("vq.context_in", config_.context_width, config_.d_model, rng);
  for (int l = 0; l < config_.n_layers; ++l)
    blocks_.emplace_back("vq.block" + std::to_string(l), config_.d_model, config_.n_heads, config_.feedforward_width,
                         config_.dropout, rng);
  final_norm_ = nn::LayerNorm("vq.final_norm", config_.d_model);
  head_ = nn::Linear("vq.head", config_.d_model, vocabulary, rng);
}

nn::Var TokenTransformer::logits(nn::Tape& tape, std::span<const std::vector<int>> tokens, nn::Var context) {
  if (tokens.empty() || tokens.front().empty()) throw ContractError("token forward needs non-empty sequences");
  const int batch = static_cast<int>(tokens.size());
  const auto horizon = static_cast<Eigen::Index>(tokens.front().size());
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(batch * horizon));
  for (const auto& seq : tokens) {
    if (static_cast<Eigen::Index>(seq.size()) != horizon) throw ShapeError("token sequences must share a length");
    for (int t : seq) {
      if (t < 0 || t >= vocabulary_) throw ContractError("token index out of range");
      flat.push_back(t);
    }
  }
  if (context.cols() != config_.context_width || context.rows() % batch != 0 || context.rows() == 0)
    throw ShapeError("context shape does not match the token batch");
  const Eigen::Index ctx_rows = context.rows() / batch;
  const Eigen::Index pe_rows = std::max(horizon, ctx_rows);
  if (pe_.rows() < pe_rows) pe_ = nn::sinusoidal_encoding(pe_rows, config_.d_model);

  nn::Var h = nn::gather_rows(tape.parameter(embedding_), flat);
  nn::Matrix tiled(batch * horizon, config_.d_model);
  for (int b = 0; b < batch; ++b) tiled.middleRows(b * horizon, horizon) = pe_.topRows(horizon);
  h = nn::add_constant(h, tiled);
  nn::Var memory = context_in_(tape, context);
  nn::Matrix ctx_pe(batch * ctx_rows, config_.d_model);
  for (int b = 0; b < batch; ++b) ctx_pe.middleRows(b * ctx_rows, ctx_rows) = pe_.topRows(ctx_rows);
  memory = nn::add_constant(memory, ctx_pe);
  for (auto& block : blocks_) h = block(tape, h, memory, batch, true);
  h = final_norm_(tape, h);
  forward_calls_ += static_cast<std::uint64_t>(batch);
  return head_(tape, h);
}

std::vector<std::vector<int>> TokenTransformer::generate(std::span<const int> first_tokens,
                                                         std::span<const ContextFeatures> contexts, int horizon) {
  if (first_tokens.empty() || first_tokens.size() != contexts.size())
    throw ContractError("generate needs one context per sequence");
  if (horizon < 1) throw ContractError("horizon must be at least 1");
  const auto batch = first_tokens.size();
  const Eigen::Index ctx_rows = contexts.front().rows();
  nn::Matrix ctx(static_cast<Eigen::Index>(batch) * ctx_rows, contexts.front().cols());
  for (std::size_t b = 0; b < batch; ++b) {
    if (contexts[b].rows() != ctx_rows || contexts[b].cols() != ctx.cols())
      throw ShapeError("context features in one batch must share a shape");
    ctx.middleRows(static_cast<Eigen::Index>(b) * ctx_rows, ctx_rows) = contexts[b].matrix();
  }
  std::vector<std::vector<int>> inputs(batch);
  for (std::size_t b = 0; b < batch; ++b) inputs[b].push_back(first_tokens[b]);
  std::vector<std::vector<int>> predicted(batch);
  for (int step = 1; step <= horizon; ++step) {
    nn::Tape tape = nn::Tape::inference();
    const nn::Matrix& out = logits(tape, inputs, tape.constant(ctx)).value();
    for (std::size_t b = 0; b < batch; ++b) {
      const auto row = out.row(static_cast<Eigen::Index>(b) * step + step - 1);
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < row.size(); ++k)
        if (row(k) > row(best)) best = k;
      predicted[b].push_back(static_cast<int>(best));
      inputs[b].push_back(static_cast<int>(best));
    }
  }
  return predicted;
}

nn::ParameterList TokenTransformer::parameters() {
  nn::ParameterList out;
  out.push_back(&embedding_);
  context_in_.collect(out);
  for (auto& b : blocks_) b.collect(out);
  final_norm_.collect(out);
  head_.collect(out);
  return out;
}

}  // namespace posecast::baselines
