// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <regex>
#include <set>

#include <json.hpp>

#include "posecast/error.hpp"

namespace posecast {

namespace {

using json = nlohmann::json;
using Kind = ValidationError::Kind;

const json& field(const json& rec, const char* name, std::size_t line) {
  const auto it = rec.find(name);
  if (it == rec.end() || it->is_null())
    throw ValidationError(Kind::missing_field, line, std::string("missing field '") + name + "'");
  return *it;
}

double coordinate(const json& v, std::size_t line, const std::string& where) {
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(Kind::non_finite, line, "non-finite coordinate in " + where);
    return d;
  }
  if (v.is_null() || v.is_string())
    throw ValidationError(Kind::non_finite, line, "non-finite coordinate in " + where);
  throw ValidationError(Kind::bad_value, line, "coordinate in " + where + " is not a number");
}

Pose read_pose(const json& arr, int expected_dim, std::size_t line, const std::string& where,
               const std::optional<ImageSize>& pixels, double sigma) {
  if (!arr.is_array()) throw ValidationError(Kind::bad_value, line, where + " must be an array");
  if (static_cast<int>(arr.size()) != expected_dim)
    throw ValidationError(Kind::joint_count, line,
                          where + " has " + std::to_string(arr.size() / 2) + " joints, topology expects " +
                              std::to_string(expected_dim / 2));
  std::vector<double> c;
  c.reserve(arr.size());
  for (const auto& v : arr) c.push_back(coordinate(v, line, where));
  Pose p(std::move(c));
  return pixels ? normalize_pose(p, *pixels, sigma) : p;
}

Sample parse_record(const json& rec, std::size_t line, const LoadOptions& options, int& horizon) {
  if (!rec.is_object()) throw ValidationError(Kind::parse, line, "record is not a JSON object");
  if (const auto it = rec.find("format"); it != rec.end() && *it != kDataFormat)
    throw ValidationError(Kind::bad_value, line, "unsupported format tag " + it->dump());
  Sample s;
  s.id = field(rec, "id", line).get<std::string>();
  try {
    s.topology = parse_topology_kind(field(rec, "topology", line).get<std::string>());
  } catch (const ConfigError& e) {
    throw ValidationError(Kind::bad_value, line, e.what());
  }
  if (s.topology == TopologyKind::custom)
    throw ValidationError(Kind::bad_value, line, "datasets must use a canonical topology");
  s.label = field(rec, "label", line).get<std::string>();
  if (const auto it = rec.find("context_ref"); it != rec.end() && !it->is_null())
    s.context_ref = it->get<std::string>();
  if (const auto it = rec.find("image_dims"); it != rec.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 2)
      throw ValidationError(Kind::bad_value, line, "image_dims must be [width, height]");
    s.image_dims = ImageSize{(*it)[0].get<double>(), (*it)[1].get<double>()};
    if (!(s.image_dims->width > 0.0 && s.image_dims->height > 0.0))
      throw ValidationError(Kind::bad_value, line, "image_dims must be positive");
  }
  const std::string units = rec.value("units", std::string("normalized"));
  std::optional<ImageSize> pixels;
  if (units == "pixels") {
    if (!s.image_dims) throw ValidationError(Kind::missing_field, line, "pixel units require image_dims");
    pixels = s.image_dims;
  } else if (units != "normalized") {
    throw ValidationError(Kind::bad_value, line, "units must be 'normalized' or 'pixels'");
  }

  const int dim = build_topology(s.topology).dim();
  s.p0 = read_pose(field(rec, "p0", line), dim, line, "p0", pixels, options.sigma);
  const json& fut = field(rec, "future", line);
  if (!fut.is_array() || fut.empty())
    throw ValidationError(Kind::bad_value, line, "future must be a non-empty array of frames");
  const int t_len = static_cast<int>(fut.size());
  if (horizon == 0) horizon = t_len;
  if (t_len != horizon)
    throw ValidationError(Kind::bad_value, line,
                          "future has " + std::to_string(t_len) + " frames, expected " + std::to_string(horizon));
  std::vector<Pose> frames;
  frames.reserve(fut.size());
  for (std::size_t t = 0; t < fut.size(); ++t)
    frames.push_back(read_pose(fut[t], dim, line, "future[" + std::to_string(t) + "]", pixels, options.sigma));
  s.future = PoseSequence(std::move(frames));
  return s;
}

}  // namespace

std::vector<Sample> parse_dataset(std::istream& in, const LoadOptions& options) {
  static const std::regex non_finite_token(R"((^|[^A-Za-z"])-?(NaN|nan|Infinity|inf)([^A-Za-z"]|$))");
  std::vector<Sample> samples;
  std::set<std::string> ids;
  int horizon = options.horizon;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      if (std::regex_search(text, non_finite_token))
        throw ValidationError(Kind::non_finite, line, "non-finite coordinate literal");
      throw ValidationError(Kind::parse, line, std::string("invalid JSON: ") + e.what());
    }
    Sample s;
    try {
      s = parse_record(rec, line, options, horizon);
    } catch (const json::exception& e) {
      throw ValidationError(Kind::bad_value, line, std::string("bad field type: ") + e.what());
    }
    if (!ids.insert(s.id).second) throw ValidationError(Kind::duplicate_id, line, "duplicate id '" + s.id + "'");
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<Sample> load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return parse_dataset(in, options);
}

void write_dataset(std::ostream& out, std::span<const Sample> samples) {
  for (const auto& s : samples) {
    json rec;
    rec["format"] = kDataFormat;
    rec["id"] = s.id;
    rec["topology"] = to_string(s.topology);
    rec["label"] = s.label;
    if (s.context_ref) rec["context_ref"] = *s.context_ref;
    if (s.image_dims) rec["image_dims"] = {s.image_dims->width, s.image_dims->height};
    rec["p0"] = std::vector<double>(s.p0.coords().begin(), s.p0.coords().end());
    json frames = json::array();
    for (const auto& f : s.future.frames()) frames.push_back(std::vector<double>(f.coords().begin(), f.coords().end()));
    rec["future"] = std::move(frames);
    out << rec.dump() << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write dataset " + path.string());
  write_dataset(out, samples);
  if (!out) throw IoError("failed writing dataset " + path.string());
}

Split split(std::span<const Sample> samples, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(samples.size()) + 1e-9));
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  Split out;
  for (auto i : train_idx) out.train.push_back(samples[i]);
  for (auto i : test_idx) out.test.push_back(samples[i]);
  return out;
}

}  // namespace posecast
