// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

// Conditioning context for the forecasters. Two providers stand in for a frozen
// vision-language encoder: a learned per-label embedding, and a container of
// feature matrices exported offline ("posecast-feat-v1").

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posecast/nn/layers.hpp"

namespace posecast {

/// N_M x d_M feature matrix.
class ContextFeatures {
 public:
  ContextFeatures() = default;
  /// Throws ContractError on non-finite entries.
  explicit ContextFeatures(nn::Matrix m);

  Eigen::Index rows() const { return matrix_.rows(); }
  Eigen::Index cols() const { return matrix_.cols(); }
  const nn::Matrix& matrix() const noexcept { return matrix_; }

  friend bool operator==(const ContextFeatures& a, const ContextFeatures& b) {
    return a.matrix_.rows() == b.matrix_.rows() && a.matrix_.cols() == b.matrix_.cols() &&
           a.matrix_ == b.matrix_;
  }

 private:
  nn::Matrix matrix_;
};

enum class ContextKind { label_embedding, precomputed_file };

std::string_view to_string(ContextKind kind);
ContextKind parse_context_kind(std::string_view name);

struct ContextProviderConfig {
  ContextKind kind = ContextKind::label_embedding;
  int d_m = 16;
  std::vector<std::string> vocabulary;  ///< label_embedding only
  std::filesystem::path feature_file;   ///< precomputed_file only

  void validate() const;
};

inline constexpr std::string_view kFeatureFormat = "posecast-feat-v1";

/// Writes a feature container: `path` holds the 16-byte magic followed by
/// float32 little-endian row-major blobs; `path` + ".json" is the index.
void write_feature_file(const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, ContextFeatures>>& entries);

/// Read-only view of a feature container.
class FeatureStore {
 public:
  /// Throws IoError if either file is missing, FormatError on a bad container,
  /// ShapeError if `expected_width` > 0 and differs from the stored width.
  explicit FeatureStore(const std::filesystem::path& path, int expected_width = 0);

  /// Throws NotFoundError naming the id.
  ContextFeatures load(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  int width() const noexcept { return width_; }
  int rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return index_.size(); }

 private:
  struct Entry {
    std::uint64_t offset;
    int rows;
  };
  std::filesystem::path path_;
  std::map<std::string, Entry> index_;
  int width_ = 0;
  int rows_ = 0;
};

/// Loads one matrix from a container.
ContextFeatures load_precomputed(const std::filesystem::path& path, const std::string& sample_id,
                                 int expected_width = 0);

/// What a sample contributes to the context lookup.
struct ContextKey {
  std::string label;
  std::string ref;  ///< precomputed-feature id; empty means "use the sample id"
};

/// Provider shared by every forecaster in an experiment.
class ContextProvider {
 public:
  ContextProvider(const ContextProviderConfig& config, std::uint64_t seed);

  const ContextProviderConfig& config() const noexcept { return config_; }
  int width() const noexcept { return config_.d_m; }
  /// N_M: 1 for label embeddings, the stored row count for files.
  int rows() const noexcept { return rows_; }

  /// Throws VocabularyError listing the known labels.
  int label_index(const std::string& label) const;
  ContextFeatures encode_label(const std::string& label) const;
  ContextFeatures features(const ContextKey& key) const;

  /// Stacked (batch * N_M) x d_M context rows; label rows stay differentiable.
  nn::Var batch(nn::Tape& tape, std::span<const ContextKey> keys);
  /// Trainable parameters (the label table), empty for files.
  nn::ParameterList parameters();

 private:
  ContextProviderConfig config_;
  nn::Parameter table_;
  std::map<std::string, int> vocab_index_;
  std::shared_ptr<FeatureStore> store_;
  int rows_ = 1;
};

}  // namespace posecast
