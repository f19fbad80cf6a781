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

// CSV tables emitted by the command-line tool, with matching readers.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spoofcal/dataset.hpp"
#include "spoofcal/error.hpp"
#include "spoofcal/selective.hpp"
#include "spoofcal/util.hpp"

namespace spoofcal {

namespace csv {

inline std::string Escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Splits RFC 4180 text into rows of fields.
inline std::vector<std::vector<std::string>> Parse(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::kBadManifest, "unterminated quote in CSV");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace csv

struct ScoreRow {
  std::string id;
  double y_hat = 0.0;
  double unit_entropy = 0.0;
  std::uint8_t label = kBonafide;
};

/// id,y_hat,unit_entropy,label (label as 0/1).
inline std::string ScoresToCsv(std::span<const Prediction> predictions,
                               std::span<const std::uint8_t> labels) {
  std::ostringstream out;
  out << "id,y_hat,unit_entropy,label\n";
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    out << csv::Escape(p.id) << ',' << FormatDouble(p.y_hat) << ','
        << FormatDouble(p.unit_entropy) << ',' << static_cast<int>(labels[i]) << '\n';
  }
  return out.str();
}

inline std::vector<ScoreRow> ScoresFromCsv(std::string_view text) {
  auto rows = csv::Parse(text);
  if (rows.empty() || rows[0] != std::vector<std::string>{"id", "y_hat", "unit_entropy", "label"}) {
    throw Error(ErrorCode::kBadManifest, "scores CSV has an unexpected header");
  }
  std::vector<ScoreRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != 4) throw Error(ErrorCode::kBadManifest, "scores CSV row has wrong width");
    if (f[3] != "0" && f[3] != "1") throw Error(ErrorCode::kBadLabel, "label must be 0 or 1");
    out.push_back({f[0], ParseDouble(f[1]), ParseDouble(f[2]),
                   static_cast<std::uint8_t>(f[3] == "1" ? kSpoof : kBonafide)});
  }
  return out;
}

/// One line of the training-size study table. Replicate rows carry a seed;
/// aggregate rows carry mean metrics and their population std over seeds.
struct StudyRow {
  bool aggregate = false;
  std::string dataset;
  std::size_t size = 0;
  std::optional<std::uint64_t> seed;
  double eer = 0.0;
  double ece = 0.0;
  std::optional<double> eer_std;
  std::optional<double> ece_std;
};

inline std::string StudyToCsv(std::span<const StudyRow> rows) {
  std::ostringstream out;
  out << "row_type,dataset,size,seed,eer,ece,eer_std,ece_std\n";
  for (const auto& r : rows) {
    out << (r.aggregate ? "aggregate" : "replicate") << ',' << csv::Escape(r.dataset) << ','
        << r.size << ',';
    if (r.seed) out << *r.seed;
    out << ',' << FormatDouble(r.eer) << ',' << FormatDouble(r.ece) << ',';
    if (r.eer_std) out << FormatDouble(*r.eer_std);
    out << ',';
    if (r.ece_std) out << FormatDouble(*r.ece_std);
    out << '\n';
  }
  return out.str();
}

inline std::vector<StudyRow> StudyFromCsv(std::string_view text) {
  auto rows = csv::Parse(text);
  const std::vector<std::string> header = {"row_type", "dataset", "size", "seed",
                                           "eer",      "ece",     "eer_std", "ece_std"};
  if (rows.empty() || rows[0] != header) {
    throw Error(ErrorCode::kBadManifest, "study CSV has an unexpected header");
  }
  std::vector<StudyRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != header.size()) throw Error(ErrorCode::kBadManifest, "study CSV row has wrong width");
    StudyRow row;
    row.aggregate = f[0] == "aggregate";
    row.dataset = f[1];
    row.size = std::stoul(f[2]);
    if (!f[3].empty()) row.seed = std::stoull(f[3]);
    row.eer = ParseDouble(f[4]);
    row.ece = ParseDouble(f[5]);
    if (!f[6].empty()) row.eer_std = ParseDouble(f[6]);
    if (!f[7].empty()) row.ece_std = ParseDouble(f[7]);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace spoofcal
