// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "posecast/error.hpp"

namespace posecast {

namespace {

constexpr std::pair<MethodKind, std::string_view> kMethodNames[] = {
    {MethodKind::ours, "ours"},   {MethodKind::tf_ntp, "tf-ntp"}, {MethodKind::lstm, "lstm"},
    {MethodKind::vq_tf, "vq-tf"}, {MethodKind::nn_p, "nn-p"},     {MethodKind::nn_vl, "nn-vl"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

int to_int32(const std::string& key, const std::string& v) { return static_cast<int>(to_int(key, v)); }

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Key {
  Setter set;
  Getter get;
};

const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table = [] {
    std::vector<std::pair<std::string, Key>> k;
    auto add = [&k](std::string name, Setter s, Getter g) { k.emplace_back(std::move(name), Key{std::move(s), std::move(g)}); };
#define POSECAST_INT(NAME, FIELD)                                                                        \
  add(NAME, [](ExperimentConfig& c, const std::string& key, const std::string& v) { c.FIELD = to_int32(key, v); }, \
      [](const ExperimentConfig& c) { return std::to_string(c.FIELD); })
#define POSECAST_DOUBLE(NAME, FIELD)                                                                     \
  add(NAME, [](ExperimentConfig& c, const std::string& key, const std::string& v) { c.FIELD = to_double(key, v); }, \
      [](const ExperimentConfig& c) { return fmt(c.FIELD); })
#define POSECAST_BOOL(NAME, FIELD)                                                                       \
  add(NAME, [](ExperimentConfig& c, const std::string& key, const std::string& v) { c.FIELD = to_bool(key, v); }, \
      [](const ExperimentConfig& c) { return std::string(c.FIELD ? "true" : "false"); })

    add("method", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.method.kind = parse_method(v); },
        [](const ExperimentConfig& c) { return std::string(to_string(c.method.kind)); });
    add("seed", [](ExperimentConfig& c, const std::string& key, const std::string& v) {
          c.method.seed = to_u64(key, v);
          c.train.seed = c.method.seed;
        },
        [](const ExperimentConfig& c) { return std::to_string(c.method.seed); });
    POSECAST_INT("model.d_model", method.model.d_model);
    POSECAST_INT("model.n_heads", method.model.n_heads);
    POSECAST_INT("model.n_layers", method.model.n_layers);
    POSECAST_INT("model.feedforward_width", method.model.feedforward_width);
    add("model.attention",
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.method.model.attention = parse_attention_mode(v); },
        [](const ExperimentConfig& c) { return std::string(to_string(c.method.model.attention)); });
    POSECAST_INT("model.horizon", method.model.horizon);
    add("model.topology",
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.method.model.topology = parse_topology_kind(v); },
        [](const ExperimentConfig& c) { return std::string(to_string(c.method.model.topology)); });
    POSECAST_DOUBLE("model.dropout", method.model.dropout);
    POSECAST_BOOL("model.positional_encoding", method.model.positional_encoding);
    POSECAST_BOOL("model.learned_prd", method.model.learned_prd);
    POSECAST_BOOL("model.center_p0", method.model.center_p0);
    POSECAST_INT("lstm.hidden", method.lstm_hidden);
    POSECAST_INT("vq.codebook_size", method.codebook_size);
    add("context.kind",
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.method.context.kind = parse_context_kind(v); },
        [](const ExperimentConfig& c) { return std::string(to_string(c.method.context.kind)); });
    add("context.d_m", [](ExperimentConfig& c, const std::string& key, const std::string& v) {
          c.method.context.d_m = to_int32(key, v);
          c.method.model.context_width = c.method.context.d_m;
        },
        [](const ExperimentConfig& c) { return std::to_string(c.method.context.d_m); });
    add("context.vocabulary",
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.method.context.vocabulary = split_list(v); },
        [](const ExperimentConfig& c) {
          std::string out;
          for (const auto& l : c.method.context.vocabulary) out += (out.empty() ? "" : ",") + l;
          return out;
        });
    add("context.feature_file",
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.method.context.feature_file = v; },
        [](const ExperimentConfig& c) { return c.method.context.feature_file.string(); });
    POSECAST_DOUBLE("train.learning_rate", train.learning_rate);
    POSECAST_INT("train.batch_size", train.batch_size);
    POSECAST_INT("train.max_steps", train.max_steps);
    POSECAST_DOUBLE("train.weight_decay", train.weight_decay);
    POSECAST_DOUBLE("train.clip_norm", train.clip_norm);
    POSECAST_INT("train.eval_every", train.eval_every);
    POSECAST_INT("train.patience", train.patience);
    POSECAST_INT("train.eval_samples", train.eval_samples);
    add("train.checkpoint_dir",
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.train.checkpoint_dir = v; },
        [](const ExperimentConfig& c) { return c.train.checkpoint_dir.string(); });
    POSECAST_DOUBLE("loss.alpha", train.loss.alpha);
    POSECAST_DOUBLE("loss.beta", train.loss.beta);
    POSECAST_DOUBLE("loss.theta", train.loss.theta);
    POSECAST_INT("benchmark.per_family", benchmark.per_family);
    add("benchmark.horizon", [](ExperimentConfig& c, const std::string& key, const std::string& v) {
          c.benchmark.horizon = to_int32(key, v);
          c.method.model.horizon = c.benchmark.horizon;
        },
        [](const ExperimentConfig& c) { return std::to_string(c.benchmark.horizon); });
    add("benchmark.topology",
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.benchmark.topology = parse_topology_kind(v); },
        [](const ExperimentConfig& c) { return std::string(to_string(c.benchmark.topology)); });
    POSECAST_DOUBLE("benchmark.train_fraction", benchmark.train_fraction);
    add("benchmark.seeds",
        [](ExperimentConfig& c, const std::string& key, const std::string& v) {
          c.benchmark.seeds.clear();
          for (const auto& s : split_list(v)) c.benchmark.seeds.push_back(to_u64(key, s));
        },
        [](const ExperimentConfig& c) {
          std::string out;
          for (auto s : c.benchmark.seeds) out += (out.empty() ? "" : ",") + std::to_string(s);
          return out;
        });
#undef POSECAST_INT
#undef POSECAST_DOUBLE
#undef POSECAST_BOOL
    return k;
  }();
  return table;
}

}  // namespace

std::string_view to_string(MethodKind kind) {
  for (const auto& [k, name] : kMethodNames)
    if (k == kind) return name;
  return "?";
}

MethodKind parse_method(std::string_view name) {
  for (const auto& [k, n] : kMethodNames)
    if (n == name) return k;
  std::string known;
  for (const auto& [k, n] : kMethodNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw ConfigError("unknown method '" + std::string(name) + "' (expected one of: " + known + ")");
}

const std::vector<MethodKind>& all_methods() {
  static const std::vector<MethodKind> all = {MethodKind::ours, MethodKind::tf_ntp, MethodKind::lstm,
                                              MethodKind::vq_tf, MethodKind::nn_p, MethodKind::nn_vl};
  return all;
}

bool is_trainable(MethodKind kind) { return kind != MethodKind::nn_p && kind != MethodKind::nn_vl; }

void MethodConfig::validate() const {
  model.validate();
  context.validate();
  if (model.context_width != context.d_m)
    throw ConfigError("model context width " + std::to_string(model.context_width) + " differs from provider d_M " +
                      std::to_string(context.d_m));
  if (lstm_hidden <= 0) throw ConfigError("lstm.hidden must be positive");
  if (codebook_size < 1) throw ConfigError("vq.codebook_size must be positive");
}

baselines::LstmConfig MethodConfig::lstm_config() const {
  baselines::LstmConfig c;
  c.hidden = lstm_hidden;
  c.context_width = context.d_m;
  c.topology = model.topology;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (max_steps < 0) throw ConfigError("max_steps must be non-negative");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be positive");
  if (eval_every < 1) throw ConfigError("eval_every must be positive");
  if (patience < 0 || eval_samples < 0) throw ConfigError("patience and eval_samples must be non-negative");
  loss.validate();
}

void BenchmarkConfig::validate() const {
  if (per_family < 1) throw ConfigError("benchmark.per_family must be positive");
  if (horizon < 1) throw ConfigError("benchmark.horizon must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("benchmark.train_fraction must lie in (0, 1)");
  if (seeds.empty()) throw ConfigError("benchmark.seeds must list at least one seed");
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, k] : keys()) {
    if (name == key) {
      k.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

std::string render_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [name, k] : keys()) out += name + " = " + k.get(cfg) + "\n";
  return out;
}

nlohmann::json to_json(const MethodConfig& c) {
  nlohmann::json j;
  j["method"] = to_string(c.kind);
  j["seed"] = c.seed;
  j["model"] = {{"d_model", c.model.d_model},
                {"n_heads", c.model.n_heads},
                {"n_layers", c.model.n_layers},
                {"feedforward_width", c.model.feedforward_width},
                {"attention", to_string(c.model.attention)},
                {"horizon", c.model.horizon},
                {"topology", to_string(c.model.topology)},
                {"dropout", c.model.dropout},
                {"context_width", c.model.context_width},
                {"positional_encoding", c.model.positional_encoding},
                {"learned_prd", c.model.learned_prd},
                {"center_p0", c.model.center_p0}};
  j["lstm_hidden"] = c.lstm_hidden;
  j["codebook_size"] = c.codebook_size;
  j["context"] = {{"kind", to_string(c.context.kind)},
                  {"d_m", c.context.d_m},
                  {"vocabulary", c.context.vocabulary},
                  {"feature_file", c.context.feature_file.string()}};
  return j;
}

MethodConfig method_config_from_json(const nlohmann::json& j) {
  try {
    MethodConfig c;
    c.kind = parse_method(j.at("method").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& m = j.at("model");
    c.model.d_model = m.at("d_model");
    c.model.n_heads = m.at("n_heads");
    c.model.n_layers = m.at("n_layers");
    c.model.feedforward_width = m.at("feedforward_width");
    c.model.attention = parse_attention_mode(m.at("attention").get<std::string>());
    c.model.horizon = m.at("horizon");
    c.model.topology = parse_topology_kind(m.at("topology").get<std::string>());
    c.model.dropout = m.at("dropout");
    c.model.context_width = m.at("context_width");
    c.model.positional_encoding = m.at("positional_encoding");
    c.model.learned_prd = m.at("learned_prd");
    c.model.center_p0 = m.at("center_p0");
    c.lstm_hidden = j.at("lstm_hidden");
    c.codebook_size = j.at("codebook_size");
    const auto& ctx = j.at("context");
    c.context.kind = parse_context_kind(ctx.at("kind").get<std::string>());
    c.context.d_m = ctx.at("d_m");
    c.context.vocabulary = ctx.at("vocabulary").get<std::vector<std::string>>();
    c.context.feature_file = ctx.at("feature_file").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed method configuration: ") + e.what());
  }
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"max_steps", c.max_steps},
          {"seed", c.seed},
          {"weight_decay", c.weight_decay},
          {"clip_norm", c.clip_norm},
          {"loss", {{"alpha", c.loss.alpha}, {"beta", c.loss.beta}, {"theta", c.loss.theta}}},
          {"eval_every", c.eval_every},
          {"patience", c.patience},
          {"eval_samples", c.eval_samples},
          {"checkpoint_dir", c.checkpoint_dir.string()}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  try {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate");
    c.batch_size = j.at("batch_size");
    c.max_steps = j.at("max_steps");
    c.seed = j.at("seed");
    c.weight_decay = j.at("weight_decay");
    c.clip_norm = j.at("clip_norm");
    c.loss.alpha = j.at("loss").at("alpha");
    c.loss.beta = j.at("loss").at("beta");
    c.loss.theta = j.at("loss").at("theta");
    c.eval_every = j.at("eval_every");
    c.patience = j.at("patience");
    c.eval_samples = j.at("eval_samples");
    c.checkpoint_dir = j.at("checkpoint_dir").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed training configuration: ") + e.what());
  }
}

void check_compatible(const MethodConfig& ckpt, const MethodConfig& req) {
  auto fail = [](const std::string& field, const std::string& a, const std::string& b) {
    throw ConfigError("incompatible checkpoint: " + field + " is " + a + " in the checkpoint but " + b +
                      " in the requested configuration");
  };
  if (ckpt.kind != req.kind) fail("method", std::string(to_string(ckpt.kind)), std::string(to_string(req.kind)));
  if (ckpt.model.topology != req.model.topology)
    fail("topology", std::string(to_string(ckpt.model.topology)), std::string(to_string(req.model.topology)));
  if (ckpt.context.d_m != req.context.d_m) fail("d_M", std::to_string(ckpt.context.d_m), std::to_string(req.context.d_m));
  if (ckpt.context.kind != req.context.kind)
    fail("context kind", std::string(to_string(ckpt.context.kind)), std::string(to_string(req.context.kind)));
  if (ckpt.model.horizon != req.model.horizon)
    fail("horizon", std::to_string(ckpt.model.horizon), std::to_string(req.model.horizon));
  auto same_int = [&](const char* field, int a, int b) {
    if (a != b) fail(field, std::to_string(a), std::to_string(b));
  };
  if (ckpt.kind == MethodKind::lstm) {
    same_int("lstm_hidden", ckpt.lstm_hidden, req.lstm_hidden);
    return;
  }
  same_int("d_model", ckpt.model.d_model, req.model.d_model);
  same_int("n_heads", ckpt.model.n_heads, req.model.n_heads);
  same_int("n_layers", ckpt.model.n_layers, req.model.n_layers);
  same_int("feedforward_width", ckpt.model.feedforward_width, req.model.feedforward_width);
  if (ckpt.kind == MethodKind::vq_tf) same_int("codebook_size", ckpt.codebook_size, req.codebook_size);
}

}  // namespace posecast
