// Copyright 2026 The spoofcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Utterance-level embedding datasets and their on-disk exchange format.
//
// Numeric payloads live in EMB1 files:
//
//   offset  size  field
//   0       4     magic "EMB1"
//   4       4     u32 version (= 1)
//   8       4     u32 N (rows)
//   12      4     u32 D (columns)
//   16      1     u8 dtype (0 = IEEE-754 binary32)
//   17      4*N*D row-major little-endian floats
//
// Sample ids, labels and sources live in a JSON manifest whose entries point
// at (embedding_file, row_index) pairs. A dataset written with
// WriteEmbeddings() gets a sidecar manifest at "<file>.json".

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spoofcal/error.hpp"
#include "spoofcal/util.hpp"

namespace spoofcal {

inline constexpr std::uint8_t kBonafide = 0;
inline constexpr std::uint8_t kSpoof = 1;

inline const char* LabelName(std::uint8_t label) {
  return label == kSpoof ? "spoof" : "bonafide";
}

inline std::uint8_t ParseLabel(std::string_view name) {
  if (name == "bonafide") return kBonafide;
  if (name == "spoof") return kSpoof;
  throw Error(ErrorCode::kBadLabel, "label must be 'bonafide' or 'spoof', got '" +
                                        std::string(name) + "'");
}

/// N embedding rows of dimension D with binary labels (1 = spoof).
/// Validated on construction and immutable afterwards.
class EmbeddingDataset {
 public:
  EmbeddingDataset(std::vector<std::string> ids, std::vector<float> features,
                   std::size_t dim, std::vector<std::uint8_t> labels,
                   std::string source)
      : ids_(std::move(ids)),
        features_(std::move(features)),
        labels_(std::move(labels)),
        dim_(dim),
        source_(std::move(source)) {
    if (ids_.empty()) throw Error(ErrorCode::kEmptyDimension, "dataset has no rows");
    if (dim_ == 0) throw Error(ErrorCode::kEmptyDimension, "dataset has D = 0");
    if (labels_.size() != ids_.size() ||
        features_.size() != ids_.size() * dim_) {
      throw Error(ErrorCode::kLengthMismatch,
                  "ids, labels and feature rows differ in length");
    }
    for (std::uint8_t y : labels_) {
      if (y > 1) throw Error(ErrorCode::kBadLabel, "labels must be 0 or 1");
    }
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (!std::isfinite(features_[i])) {
        throw Error(ErrorCode::kNonFinite,
                    "non-finite feature in row " + std::to_string(i / dim_));
      }
    }
  }

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& source() const noexcept { return source_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }
  std::span<const float> features() const noexcept { return features_; }

  std::span<const float> row(std::size_t i) const noexcept {
    return std::span<const float>(features_).subspan(i * dim_, dim_);
  }

  std::size_t count(std::uint8_t label) const noexcept {
    return static_cast<std::size_t>(
        std::count(labels_.begin(), labels_.end(), label));
  }

  /// Rows at `indices`, in the given order.
  EmbeddingDataset select(std::span<const std::size_t> indices) const {
    std::vector<std::string> ids;
    std::vector<float> feats;
    std::vector<std::uint8_t> labels;
    ids.reserve(indices.size());
    labels.reserve(indices.size());
    feats.reserve(indices.size() * dim_);
    for (std::size_t i : indices) {
      ids.push_back(ids_.at(i));
      labels.push_back(labels_[i]);
      auto r = row(i);
      feats.insert(feats.end(), r.begin(), r.end());
    }
    return EmbeddingDataset(std::move(ids), std::move(feats), dim_,
                            std::move(labels), source_);
  }

  friend bool operator==(const EmbeddingDataset&, const EmbeddingDataset&) = default;

 private:
  std::vector<std::string> ids_;
  std::vector<float> features_;
  std::vector<std::uint8_t> labels_;
  std::size_t dim_;
  std::string source_;
};

// ---------------------------------------------------------------------------
// EMB1 container

inline constexpr std::array<char, 4> kEmb1Magic = {'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kEmb1Version = 1;
inline constexpr std::uint8_t kEmb1DtypeF32 = 0;
inline constexpr std::size_t kEmb1HeaderSize = 17;

/// Raw numeric content of an EMB1 file.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;  // row-major

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(values).subspan(i * cols, cols);
  }
};

namespace detail {

inline void PutU32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline std::uint32_t GetU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

/// Serializes a row-major float matrix to EMB1 bytes.
inline std::string EncodeEmb1(std::size_t rows, std::size_t cols,
                              std::span<const float> values) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::kEmptyDimension, "EMB1 requires N >= 1 and D >= 1");
  }
  if (rows > UINT32_MAX || cols > UINT32_MAX) {
    throw Error(ErrorCode::kOutOfRange, "EMB1 dimensions exceed u32");
  }
  if (values.size() != rows * cols) {
    throw Error(ErrorCode::kLengthMismatch, "payload size != N * D");
  }
  std::string out;
  out.reserve(kEmb1HeaderSize + 4 * values.size());
  out.append(kEmb1Magic.begin(), kEmb1Magic.end());
  detail::PutU32(out, kEmb1Version);
  detail::PutU32(out, static_cast<std::uint32_t>(rows));
  detail::PutU32(out, static_cast<std::uint32_t>(cols));
  out.push_back(static_cast<char>(kEmb1DtypeF32));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonFinite, "refusing to write non-finite value in row " +
                                             std::to_string(i / cols));
    }
    detail::PutU32(out, std::bit_cast<std::uint32_t>(values[i]));
  }
  return out;
}

inline EmbeddingMatrix DecodeEmb1(std::string_view bytes,
                                  const std::string& what = "EMB1 data") {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 4 || !std::equal(kEmb1Magic.begin(), kEmb1Magic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, what + ": bad magic (expected EMB1)");
  }
  if (bytes.size() < kEmb1HeaderSize) {
    throw Error(ErrorCode::kTruncated, what + ": truncated header");
  }
  const std::uint32_t version = detail::GetU32(p + 4);
  if (version != kEmb1Version) {
    throw Error(ErrorCode::kVersionMismatch,
                what + ": unsupported version " + std::to_string(version));
  }
  EmbeddingMatrix m;
  m.rows = detail::GetU32(p + 8);
  m.cols = detail::GetU32(p + 12);
  const std::uint8_t dtype = p[16];
  if (dtype != kEmb1DtypeF32) {
    throw Error(ErrorCode::kUnsupportedDtype,
                what + ": unsupported dtype code " + std::to_string(dtype));
  }
  if (m.rows == 0 || m.cols == 0) {
    throw Error(ErrorCode::kEmptyDimension, what + ": header declares N = 0 or D = 0");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(m.rows) * m.cols;
  const std::uint64_t expected = kEmb1HeaderSize + 4 * count;
  if (bytes.size() < expected) {
    throw Error(ErrorCode::kTruncated,
                what + ": truncated payload (" + std::to_string(bytes.size()) +
                    " bytes, header implies " + std::to_string(expected) + ")");
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::kTruncated, what + ": trailing bytes after payload");
  }
  m.values.resize(count);
  const unsigned char* q = p + kEmb1HeaderSize;
  for (std::size_t i = 0; i < count; ++i, q += 4) {
    const float v = std::bit_cast<float>(detail::GetU32(q));
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite,
                  what + ": non-finite value in row " + std::to_string(i / m.cols));
    }
    m.values[i] = v;
  }
  return m;
}

inline void WriteEmb1(const std::filesystem::path& path, std::size_t rows,
                      std::size_t cols, std::span<const float> values) {
  WriteFileAtomic(path, EncodeEmb1(rows, cols, values));
}

inline EmbeddingMatrix ReadEmb1(const std::filesystem::path& path) {
  return DecodeEmb1(ReadFile(path), path.string());
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  std::string id;
  std::string embedding_file;  // relative to the manifest's directory
  std::size_t row_index = 0;
  std::uint8_t label = kBonafide;
  std::string source;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline nlohmann::ordered_json ToJson(const DatasetManifest& m) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"id", e.id},
                       {"embedding_file", e.embedding_file},
                       {"row_index", e.row_index},
                       {"label", LabelName(e.label)},
                       {"source", e.source}});
  }
  return {{"entries", std::move(entries)}};
}

inline DatasetManifest ManifestFromJson(const nlohmann::json& j) {
  DatasetManifest m;
  try {
    const auto& entries = j.at("entries");
    if (!entries.is_array()) {
      throw Error(ErrorCode::kBadManifest, "'entries' must be an array");
    }
    std::unordered_set<std::string> seen;
    for (const auto& e : entries) {
      ManifestEntry entry;
      entry.id = e.at("id").get<std::string>();
      entry.embedding_file = e.at("embedding_file").get<std::string>();
      const auto& row = e.at("row_index");
      if (!row.is_number_unsigned()) {
        throw Error(ErrorCode::kBadManifest,
                    "row_index must be a non-negative integer (id " + entry.id + ")");
      }
      entry.row_index = row.get<std::size_t>();
      entry.label = ParseLabel(e.at("label").get<std::string>());
      entry.source = e.value("source", std::string());
      if (!seen.insert(entry.id).second) {
        throw Error(ErrorCode::kDuplicateId, "duplicate id in manifest: " + entry.id);
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kBadManifest, std::string("malformed manifest: ") + ex.what());
  }
  if (m.entries.empty()) throw Error(ErrorCode::kEmptyDimension, "manifest has no entries");
  return m;
}

inline DatasetManifest ReadManifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kBadManifest, path.string() + ": " + ex.what());
  }
  return ManifestFromJson(j);
}

inline void WriteManifest(const std::filesystem::path& path, const DatasetManifest& m) {
  WriteFileAtomic(path, ToJson(m).dump(2) + "\n");
}

/// Resolves every manifest entry against its EMB1 file. `cache` maps
/// resolved paths to already decoded matrices and is filled as files load.
inline EmbeddingDataset ResolveManifest(
    const DatasetManifest& manifest, const std::filesystem::path& base_dir,
    std::map<std::filesystem::path, EmbeddingMatrix>& cache) {
  std::vector<std::string> ids;
  std::vector<float> feats;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> sources;
  std::size_t dim = 0;
  for (const auto& e : manifest.entries) {
    const auto file = (base_dir / e.embedding_file).lexically_normal();
    auto it = cache.find(file);
    if (it == cache.end()) it = cache.emplace(file, ReadEmb1(file)).first;
    const EmbeddingMatrix& m = it->second;
    if (dim == 0) dim = m.cols;
    if (m.cols != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "manifest mixes D = " + std::to_string(dim) + " and D = " +
                      std::to_string(m.cols));
    }
    if (e.row_index >= m.rows) {
      throw Error(ErrorCode::kBadManifest,
                  "entry " + e.id + " points at row " + std::to_string(e.row_index) +
                      " but " + e.embedding_file + " has " + std::to_string(m.rows));
    }
    auto r = m.row(e.row_index);
    feats.insert(feats.end(), r.begin(), r.end());
    ids.push_back(e.id);
    labels.push_back(e.label);
    if (std::find(sources.begin(), sources.end(), e.source) == sources.end()) {
      sources.push_back(e.source);
    }
  }
  std::string source;
  for (const auto& s : sources) source += (source.empty() ? "" : "+") + s;
  return EmbeddingDataset(std::move(ids), std::move(feats), dim, std::move(labels),
                          std::move(source));
}

inline EmbeddingDataset LoadManifest(const std::filesystem::path& path) {
  std::map<std::filesystem::path, EmbeddingMatrix> cache;
  return ResolveManifest(ReadManifest(path), path.parent_path(), cache);
}

inline std::filesystem::path SidecarManifestPath(const std::filesystem::path& emb) {
  auto p = emb;
  p += ".json";
  return p;
}

/// Writes `dataset` as an EMB1 file at `destination` plus the sidecar
/// manifest carrying its ids, labels and source.
inline void WriteEmbeddings(const EmbeddingDataset& dataset,
                            const std::filesystem::path& destination) {
  WriteEmb1(destination, dataset.size(), dataset.dim(), dataset.features());
  DatasetManifest m;
  m.entries.reserve(dataset.size());
  const std::string file = destination.filename().string();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    m.entries.push_back({dataset.ids()[i], file, i, dataset.labels()[i], dataset.source()});
  }
  WriteManifest(SidecarManifestPath(destination), m);
}

/// Reads a dataset from an EMB1 file and its sidecar manifest, or from a
/// manifest when `source` names a .json file.
inline EmbeddingDataset ReadEmbeddings(const std::filesystem::path& source) {
  if (source.extension() == ".json") return LoadManifest(source);
  std::map<std::filesystem::path, EmbeddingMatrix> cache;
  cache.emplace(source.lexically_normal(), ReadEmb1(source));
  const auto sidecar = SidecarManifestPath(source);
  if (!std::filesystem::exists(sidecar)) {
    throw Error(ErrorCode::kBadManifest, "missing sidecar manifest " + sidecar.string());
  }
  return ResolveManifest(ReadManifest(sidecar), source.parent_path(), cache);
}

// ---------------------------------------------------------------------------
// Dataset operations

/// Concatenates datasets in order. An id that collides with an earlier one
/// is renamed to "<source>/<id>".
inline EmbeddingDataset Merge(std::span<const EmbeddingDataset> datasets) {
  if (datasets.empty()) throw Error(ErrorCode::kEmptyInput, "merge of zero datasets");
  if (datasets.size() == 1) return datasets.front();
  const std::size_t dim = datasets.front().dim();
  std::vector<std::string> ids;
  std::vector<float> feats;
  std::vector<std::uint8_t> labels;
  std::unordered_set<std::string> seen;
  std::vector<std::string> sources;
  for (const auto& ds : datasets) {
    if (ds.dim() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "cannot merge D = " + std::to_string(dim) + " with D = " +
                      std::to_string(ds.dim()));
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
      std::string id = ds.ids()[i];
      if (seen.contains(id)) id = ds.source() + "/" + id;
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::kDuplicateId, "id collision after prefixing: " + id);
      }
      ids.push_back(std::move(id));
    }
    feats.insert(feats.end(), ds.features().begin(), ds.features().end());
    labels.insert(labels.end(), ds.labels().begin(), ds.labels().end());
    if (std::find(sources.begin(), sources.end(), ds.source()) == sources.end()) {
      sources.push_back(ds.source());
    }
  }
  std::string source;
  for (const auto& s : sources) source += (source.empty() ? "" : "+") + s;
  return EmbeddingDataset(std::move(ids), std::move(feats), dim, std::move(labels),
                          std::move(source));
}

/// Per-class sample counts for a stratified draw of `n` rows. Uses largest
/// remainder so each class is within one sample of its exact quota; a
/// present class is never left empty while n >= 2.
inline std::array<std::size_t, 2> StratifiedCounts(std::size_t n, std::size_t n_bona,
                                                   std::size_t n_spoof) {
  const std::size_t total = n_bona + n_spoof;
  std::array<std::size_t, 2> have = {n_bona, n_spoof};
  std::array<std::size_t, 2> take{};
  std::array<std::size_t, 2> rem{};
  for (int c = 0; c < 2; ++c) {
    // exact quota n * have / total as integer part + remainder / total
    take[c] = n * have[c] / total;
    rem[c] = n * have[c] % total;
  }
  std::size_t left = n - take[0] - take[1];
  // ties go to the larger class
  while (left > 0) {
    int c = rem[1] > rem[0] || (rem[1] == rem[0] && have[1] >= have[0]) ? 1 : 0;
    if (take[c] == have[c]) c = 1 - c;
    ++take[c];
    rem[c] = 0;
    --left;
  }
  for (int c = 0; c < 2; ++c) {
    if (have[c] > 0 && take[c] == 0 && take[1 - c] > 0) {
      if (take[1 - c] < 2) {
        throw Error(ErrorCode::kOutOfRange,
                    "subsample of " + std::to_string(n) +
                        " rows cannot keep both classes");
      }
      ++take[c];
      --take[1 - c];
    }
  }
  return take;
}

/// Stratified uniform draw of `n` rows without replacement. Selected rows keep
/// their original relative order. Deterministic in (dataset, n, seed).
inline EmbeddingDataset Subsample(const EmbeddingDataset& dataset, std::size_t n,
                                  std::uint64_t seed) {
  if (n < 1 || n > dataset.size()) {
    throw Error(ErrorCode::kOutOfRange, "subsample size " + std::to_string(n) +
                                            " outside [1, " +
                                            std::to_string(dataset.size()) + "]");
  }
  const auto take = StratifiedCounts(n, dataset.count(kBonafide), dataset.count(kSpoof));
  rng::Engine gen(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  for (std::uint8_t c : {kBonafide, kSpoof}) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.labels()[i] == c) pool.push_back(i);
    }
    rng::Shuffle(pool, gen);
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::sort(chosen.begin(), chosen.end());
  return dataset.select(chosen);
}

}  // namespace spoofcal
