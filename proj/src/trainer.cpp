// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "posecast/error.hpp"

namespace posecast {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trainer::Trainer(Forecaster& model, const TrainConfig& config, std::span<const Sample> train,
                 std::span<const Sample> val)
    : model_(model), config_(config), train_(train.begin(), train.end()), val_(val.begin(), val.end()),
      rng_(config.seed) {
  config_.validate();
  if (train_.empty()) throw ConfigError("training set is empty");
  if (!model_.trainable()) throw ConfigError(std::string(to_string(model_.kind())) + " is not trainable");
  if (config_.eval_samples > 0 && val_.size() > static_cast<std::size_t>(config_.eval_samples))
    val_.resize(static_cast<std::size_t>(config_.eval_samples));
  model_.prepare(train_);
  state_.order.resize(train_.size());
  std::iota(state_.order.begin(), state_.order.end(), 0);
  std::shuffle(state_.order.begin(), state_.order.end(), rng_);
}

void Trainer::ensure_optimizer() {
  if (optimizer_) return;
  nn::AdamWOptions opts;
  opts.learning_rate = config_.learning_rate;
  opts.weight_decay = config_.weight_decay;
  opts.clip_norm = config_.clip_norm;
  optimizer_ = std::make_unique<nn::AdamW>(model_.parameters(), opts);
}

void Trainer::resume(const Checkpoint& ckpt) {
  check_compatible(ckpt.method, model_.config());
  std::map<std::string, nn::Matrix> buffers;
  for (const auto& [name, m] : ckpt.tensors)
    if (name.rfind("buffer/", 0) == 0) buffers.emplace(name.substr(7), m);
  if (!buffers.empty()) model_.load_buffers(buffers);
  optimizer_.reset();
  restore_parameters(model_, ckpt);
  ensure_optimizer();
  const auto& params = optimizer_->params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto* m = ckpt.find("adam_m/" + params[i]->name);
    const auto* v = ckpt.find("adam_v/" + params[i]->name);
    if (m == nullptr || v == nullptr) throw FormatError("checkpoint lacks optimizer state for " + params[i]->name);
    optimizer_->first_moments()[i] = *m;
    optimizer_->second_moments()[i] = *v;
  }
  optimizer_->set_steps(ckpt.state.optimizer_steps);
  state_ = ckpt.state;
  if (state_.order.size() != train_.size()) throw ConfigError("checkpoint was trained on a different number of samples");
  std::istringstream rs(state_.rng_state);
  rs >> rng_;
  best_.clear();
  if (state_.best_step >= 0) {
    for (const auto* p : params) {
      const auto* b = ckpt.find("best/" + p->name);
      if (b == nullptr) throw FormatError("checkpoint lacks best-model tensor for " + p->name);
      best_.push_back(*b);
    }
  }
}

std::vector<const Sample*> Trainer::next_batch() {
  const std::size_t size = std::min<std::size_t>(static_cast<std::size_t>(config_.batch_size), train_.size());
  std::vector<const Sample*> batch;
  batch.reserve(size);
  while (batch.size() < size) {
    if (state_.cursor >= state_.order.size()) {
      std::shuffle(state_.order.begin(), state_.order.end(), rng_);
      state_.cursor = 0;
    }
    batch.push_back(&train_[state_.order[state_.cursor++]]);
  }
  return batch;
}

double Trainer::validate() {
  if (val_.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto preds = model_.predict(val_);
  double total = 0.0;
  for (std::size_t i = 0; i < val_.size(); ++i) total += ade(preds[i], val_[i].future);
  return total / static_cast<double>(val_.size());
}

Checkpoint Trainer::snapshot() {
  ensure_optimizer();
  Checkpoint ckpt;
  ckpt.method = model_.config();
  ckpt.train = config_;
  ckpt.state = state_;
  ckpt.state.optimizer_steps = optimizer_->steps();
  std::ostringstream rs;
  rs << rng_;
  ckpt.state.rng_state = rs.str();
  store_model(ckpt, model_);
  const auto& params = optimizer_->params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ckpt.tensors.emplace_back("adam_m/" + params[i]->name, optimizer_->first_moments()[i]);
    ckpt.tensors.emplace_back("adam_v/" + params[i]->name, optimizer_->second_moments()[i]);
  }
  for (std::size_t i = 0; i < best_.size(); ++i) ckpt.tensors.emplace_back("best/" + params[i]->name, best_[i]);
  return ckpt;
}

void Trainer::save(const std::filesystem::path& path) { write_checkpoint(path, snapshot()); }

void Trainer::append_log(const LogEntry& e) {
  if (config_.checkpoint_dir.empty()) return;
  std::filesystem::create_directories(config_.checkpoint_dir);
  std::ofstream out(config_.checkpoint_dir / "train_log.jsonl", std::ios::app);
  nlohmann::json j = {{"step", e.step}, {"loss", e.loss}, {"grad_norm", e.grad_norm}};
  if (e.val_ade) j["val_ade"] = *e.val_ade;
  out << j.dump() << '\n';
}

TrainResult Trainer::run(int stop_at_step) {
  ensure_optimizer();
  TrainResult result;
  result.parameter_count = nn::parameter_count(optimizer_->params());
  const bool persist = !config_.checkpoint_dir.empty();
  const auto last_path = config_.checkpoint_dir / "last.ckpt";
  const auto best_path = config_.checkpoint_dir / "best.ckpt";
  std::filesystem::path last_good;
  if (persist && std::filesystem::exists(last_path)) last_good = last_path;

  bool interrupted = false;
  while (state_.step < config_.max_steps) {
    if (stop_at_step >= 0 && state_.step >= stop_at_step) {
      interrupted = true;
      break;
    }
    const auto batch = next_batch();
    const double loss = model_.train_step(batch, config_.loss, mix_seed(config_.seed, static_cast<std::uint64_t>(state_.step)));
    if (!std::isfinite(loss)) {
      throw DivergenceError("loss became non-finite at step " + std::to_string(state_.step + 1), last_good.string());
    }
    LogEntry entry{state_.step + 1, loss, optimizer_->step(), std::nullopt};
    if (!std::isfinite(entry.grad_norm))
      throw DivergenceError("gradient became non-finite at step " + std::to_string(entry.step), last_good.string());
    ++state_.step;

    const bool final_step = state_.step == config_.max_steps;
    if (state_.step % config_.eval_every == 0 || final_step) {
      const double v = validate();
      entry.val_ade = v;
      if (std::isfinite(v) && v < state_.best_val_ade) {
        state_.best_val_ade = v;
        state_.best_step = state_.step;
        state_.evals_since_best = 0;
        best_.clear();
        for (const auto* p : optimizer_->params()) best_.push_back(p->value);
        if (persist) {
          save(best_path);
          result.best_checkpoint = best_path;
        }
      } else {
        ++state_.evals_since_best;
      }
      if (persist) {
        save(last_path);
        last_good = last_path;
      }
    }
    append_log(entry);
    result.log.push_back(entry);
    if (config_.patience > 0 && state_.evals_since_best >= config_.patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (persist) {
    save(last_path);
    result.last_checkpoint = last_path;
    if (std::filesystem::exists(best_path)) result.best_checkpoint = best_path;
  }
  if (!interrupted && !best_.empty()) {
    const auto& params = optimizer_->params();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_[i];
  }
  result.final_step = state_.step;
  result.best_step = state_.best_step;
  result.best_val_ade = state_.best_val_ade;
  return result;
}

}  // namespace posecast
