// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "posecast/error.hpp"

namespace posecast {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[] = "posecast-ckpt-v1\n";
constexpr std::size_t kMagicSize = sizeof(kMagic) - 1;

}  // namespace

const nn::Matrix* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return &m;
  return nullptr;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["format"] = kCheckpointFormat;
  header["method"] = to_json(ckpt.method);
  header["train"] = to_json(ckpt.train);
  const auto& s = ckpt.state;
  header["state"] = {{"step", s.step},
                     {"optimizer_steps", s.optimizer_steps},
                     {"rng", s.rng_state},
                     {"order", s.order},
                     {"cursor", s.cursor},
                     {"best_val_ade", std::isfinite(s.best_val_ade) ? nlohmann::json(s.best_val_ade) : nlohmann::json()},
                     {"best_step", s.best_step},
                     {"evals_since_best", s.evals_since_best}};
  auto& list = header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, m] : ckpt.tensors) {
    list.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(m.size()) * sizeof(double);
  }
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out.write(kMagic, kMagicSize);
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, m] : ckpt.tensors)
      out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!out) throw IoError("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[kMagicSize];
  in.read(magic, kMagicSize);
  if (!in || std::memcmp(magic, kMagic, kMagicSize) != 0)
    throw FormatError(path.string() + " is not a " + std::string(kCheckpointFormat) + " checkpoint");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1ULL << 32)) throw FormatError("corrupt checkpoint header length in " + path.string());
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw FormatError("truncated checkpoint header in " + path.string());

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    if (header.at("format") != kCheckpointFormat) throw FormatError("unsupported checkpoint format");
    ckpt.method = method_config_from_json(header.at("method"));
    ckpt.train = train_config_from_json(header.at("train"));
    const auto& s = header.at("state");
    ckpt.state.step = s.at("step");
    ckpt.state.optimizer_steps = s.at("optimizer_steps");
    ckpt.state.rng_state = s.at("rng");
    ckpt.state.order = s.at("order").get<std::vector<std::uint64_t>>();
    ckpt.state.cursor = s.at("cursor");
    if (!s.at("best_val_ade").is_null()) ckpt.state.best_val_ade = s.at("best_val_ade");
    ckpt.state.best_step = s.at("best_step");
    ckpt.state.evals_since_best = s.at("evals_since_best");
    const auto data_start = static_cast<std::uint64_t>(kMagicSize + sizeof(len) + len);
    for (const auto& t : header.at("tensors")) {
      const Eigen::Index rows = t.at("rows"), cols = t.at("cols");
      const std::uint64_t offset = t.at("offset");
      if (rows < 0 || cols < 0) throw FormatError("negative tensor shape");
      nn::Matrix m(rows, cols);
      in.seekg(static_cast<std::streamoff>(data_start + offset));
      in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
      if (!in) throw FormatError("truncated tensor '" + t.at("name").get<std::string>() + "'");
      ckpt.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed checkpoint header in " + path.string() + ": " + e.what());
  }
  return ckpt;
}

void store_model(Checkpoint& ckpt, Forecaster& model) {
  for (auto& [name, m] : model.buffers()) ckpt.tensors.emplace_back("buffer/" + name, m);
  for (const auto* p : model.parameters()) ckpt.tensors.emplace_back("param/" + p->name, p->value);
}

void restore_parameters(Forecaster& model, const Checkpoint& ckpt, const std::string& prefix) {
  for (auto* p : model.parameters()) {
    const auto* m = ckpt.find(prefix + p->name);
    if (m == nullptr) throw FormatError("checkpoint lacks tensor '" + prefix + p->name + "'");
    if (m->rows() != p->value.rows() || m->cols() != p->value.cols())
      throw ShapeError("tensor '" + p->name + "' is " + std::to_string(m->rows()) + "x" + std::to_string(m->cols()) +
                       " in the checkpoint but " + std::to_string(p->value.rows()) + "x" +
                       std::to_string(p->value.cols()) + " in the model");
    p->value = *m;
  }
}

std::unique_ptr<Forecaster> load_forecaster(const Checkpoint& ckpt) {
  auto model = make_forecaster(ckpt.method);
  std::map<std::string, nn::Matrix> buffers;
  for (const auto& [name, m] : ckpt.tensors)
    if (name.rfind("buffer/", 0) == 0) buffers.emplace(name.substr(7), m);
  if (!buffers.empty()) model->load_buffers(buffers);
  restore_parameters(*model, ckpt);
  return model;
}

}  // namespace posecast
