// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/context.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "posecast/error.hpp"

namespace posecast {

namespace {

using json = nlohmann::json;

std::filesystem::path index_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void put_f32(std::ostream& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                         static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
  out.write(bytes, 4);
}

float get_f32(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

ContextFeatures::ContextFeatures(nn::Matrix m) : matrix_(std::move(m)) {
  if (!matrix_.allFinite()) throw ContractError("context features must be finite");
}

std::string_view to_string(ContextKind kind) {
  return kind == ContextKind::label_embedding ? "label_embedding" : "precomputed_file";
}

ContextKind parse_context_kind(std::string_view name) {
  if (name == "label_embedding" || name == "label") return ContextKind::label_embedding;
  if (name == "precomputed_file" || name == "file") return ContextKind::precomputed_file;
  throw ConfigError("unknown context kind '" + std::string(name) + "'");
}

void ContextProviderConfig::validate() const {
  if (d_m <= 0) throw ConfigError("context width d_M must be positive");
  if (kind == ContextKind::label_embedding && vocabulary.empty())
    throw ConfigError("label embedding needs a non-empty vocabulary");
  if (kind == ContextKind::precomputed_file && feature_file.empty())
    throw ConfigError("precomputed context needs a feature file");
}

void write_feature_file(const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, ContextFeatures>>& entries) {
  std::ofstream bin(path, std::ios::binary | std::ios::trunc);
  if (!bin) throw IoError("cannot write feature file " + path.string());
  bin.write(kFeatureFormat.data(), static_cast<std::streamsize>(kFeatureFormat.size()));
  std::uint64_t offset = kFeatureFormat.size();
  json index;
  index["format"] = kFeatureFormat;
  index["d_M"] = entries.empty() ? 0 : entries.front().second.cols();
  index["entries"] = json::array();
  for (const auto& [id, feat] : entries) {
    if (feat.cols() != entries.front().second.cols())
      throw ShapeError("feature entries must share one width");
    for (Eigen::Index r = 0; r < feat.rows(); ++r)
      for (Eigen::Index c = 0; c < feat.cols(); ++c) put_f32(bin, static_cast<float>(feat.matrix()(r, c)));
    index["entries"].push_back({{"id", id}, {"rows", feat.rows()}, {"cols", feat.cols()}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(feat.rows() * feat.cols()) * 4;
  }
  if (!bin) throw IoError("failed writing " + path.string());
  std::ofstream idx(index_path(path), std::ios::trunc);
  if (!idx) throw IoError("cannot write feature index " + index_path(path).string());
  idx << index.dump(2) << '\n';
}

FeatureStore::FeatureStore(const std::filesystem::path& path, int expected_width) : path_(path) {
  if (!std::filesystem::exists(path)) throw IoError("feature file not found: " + path.string());
  const auto idx_path = index_path(path);
  std::ifstream idx(idx_path);
  if (!idx) throw IoError("feature index not found: " + idx_path.string());
  json index;
  try {
    idx >> index;
  } catch (const json::exception& e) {
    throw FormatError("feature index " + idx_path.string() + " is not valid JSON: " + e.what());
  }
  if (index.value("format", std::string{}) != kFeatureFormat)
    throw FormatError("feature index " + idx_path.string() + " is not " + std::string(kFeatureFormat));

  std::ifstream bin(path, std::ios::binary);
  char magic[16] = {};
  bin.read(magic, sizeof magic);
  if (!bin || std::string_view(magic, sizeof magic) != kFeatureFormat)
    throw FormatError("feature file " + path.string() + " has a bad magic header");

  const auto file_size = std::filesystem::file_size(path);
  width_ = index.at("d_M").get<int>();
  bool first = true;
  for (const auto& e : index.at("entries")) {
    const auto id = e.at("id").get<std::string>();
    const int rows = e.at("rows").get<int>();
    const int cols = e.at("cols").get<int>();
    const auto offset = e.at("offset").get<std::uint64_t>();
    if (cols != width_) throw FormatError("feature entry '" + id + "' width differs from d_M");
    if (offset + static_cast<std::uint64_t>(rows) * cols * 4 > file_size)
      throw FormatError("feature entry '" + id + "' runs past the end of " + path.string());
    if (first) rows_ = rows;
    first = false;
    index_[id] = Entry{offset, rows};
  }
  if (expected_width > 0 && width_ != expected_width)
    throw ShapeError("feature file width " + std::to_string(width_) + " does not match expected d_M " +
                     std::to_string(expected_width));
}

ContextFeatures FeatureStore::load(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("no precomputed features for id '" + id + "'");
  std::ifstream bin(path_, std::ios::binary);
  if (!bin) throw IoError("cannot open " + path_.string());
  const std::size_t count = static_cast<std::size_t>(it->second.rows) * width_;
  std::vector<unsigned char> buf(count * 4);
  bin.seekg(static_cast<std::streamoff>(it->second.offset));
  bin.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!bin) throw FormatError("truncated feature blob for id '" + id + "'");
  nn::Matrix m(it->second.rows, width_);
  for (std::size_t i = 0; i < count; ++i) m.data()[i] = get_f32(buf.data() + 4 * i);
  return ContextFeatures(std::move(m));
}

ContextFeatures load_precomputed(const std::filesystem::path& path, const std::string& sample_id,
                                 int expected_width) {
  return FeatureStore(path, expected_width).load(sample_id);
}

ContextProvider::ContextProvider(const ContextProviderConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  if (config_.kind == ContextKind::label_embedding) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    nn::Matrix table(static_cast<Eigen::Index>(config_.vocabulary.size()), config_.d_m);
    for (Eigen::Index i = 0; i < table.size(); ++i) table.data()[i] = dist(rng);
    table_ = nn::Parameter("context.label_table", std::move(table), false);
    for (std::size_t i = 0; i < config_.vocabulary.size(); ++i) {
      if (!vocab_index_.emplace(config_.vocabulary[i], static_cast<int>(i)).second)
        throw ConfigError("duplicate vocabulary label '" + config_.vocabulary[i] + "'");
    }
    rows_ = 1;
  } else {
    store_ = std::make_shared<FeatureStore>(config_.feature_file, config_.d_m);
    rows_ = store_->rows();
  }
}

int ContextProvider::label_index(const std::string& label) const {
  const auto it = vocab_index_.find(label);
  if (it != vocab_index_.end()) return it->second;
  std::string known;
  for (const auto& v : config_.vocabulary) known += (known.empty() ? "" : ", ") + v;
  throw VocabularyError("unknown label '" + label + "'; known labels: " + known);
}

ContextFeatures ContextProvider::encode_label(const std::string& label) const {
  if (config_.kind != ContextKind::label_embedding)
    throw ConfigError("provider does not hold label embeddings");
  return ContextFeatures(table_.value.row(label_index(label)));
}

ContextFeatures ContextProvider::features(const ContextKey& key) const {
  if (config_.kind == ContextKind::label_embedding) return encode_label(key.label);
  auto f = store_->load(key.ref);
  if (f.rows() != rows_) throw ShapeError("feature id '" + key.ref + "' has a different row count");
  return f;
}

nn::Var ContextProvider::batch(nn::Tape& tape, std::span<const ContextKey> keys) {
  if (config_.kind == ContextKind::label_embedding) {
    std::vector<int> idx;
    idx.reserve(keys.size());
    for (const auto& k : keys) idx.push_back(label_index(k.label));
    return nn::gather_rows(tape.parameter(table_), idx);
  }
  nn::Matrix stacked(static_cast<Eigen::Index>(keys.size()) * rows_, config_.d_m);
  for (std::size_t i = 0; i < keys.size(); ++i)
    stacked.middleRows(static_cast<Eigen::Index>(i) * rows_, rows_) = features(keys[i]).matrix();
  return tape.constant(std::move(stacked));
}

nn::ParameterList ContextProvider::parameters() {
  if (config_.kind == ContextKind::label_embedding) return {&table_};
  return {};
}

}  // namespace posecast
