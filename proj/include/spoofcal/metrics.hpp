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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spoofcal/dataset.hpp"
#include "spoofcal/error.hpp"
#include "spoofcal/util.hpp"

namespace spoofcal {

inline constexpr std::size_t kDefaultEceBins = 15;

/// Spoof probabilities paired with labels (1 = spoof). Non-owning.
struct ScoredSet {
  std::span<const double> scores;
  std::span<const std::uint8_t> labels;

  void validate() const {
    if (scores.size() != labels.size()) {
      throw Error(ErrorCode::kLengthMismatch, "scores and labels differ in length");
    }
    for (double s : scores) {
      if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
        throw Error(ErrorCode::kOutOfRange, "scores must be finite and within [0, 1]");
      }
    }
    for (std::uint8_t y : labels) {
      if (y > 1) throw Error(ErrorCode::kBadLabel, "labels must be 0 or 1");
    }
  }
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;  // may be +-infinity
};

/// Equal error rate under the rule "spoof iff score >= t", evaluated at
/// t in {-inf} + distinct scores + {+inf}. Returns (FPR + FNR) / 2 at the
/// threshold minimizing |FPR - FNR|; ties go to the smaller (FPR + FNR) and
/// then to the smaller threshold.
///
/// Only order matters, so any finite scores are accepted here.
inline EerResult ComputeEer(std::span<const double> scores,
                            std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::int64_t n_spoof = 0, n_bona = 0;
  for (std::uint8_t y : labels) (y == kSpoof ? n_spoof : n_bona)++;
  if (n_spoof == 0 || n_bona == 0) {
    throw Error(ErrorCode::kSingleClass, "EER needs both bonafide and spoof samples");
  }

  // Rates are compared exactly as integers scaled by n_spoof * n_bona:
  // FPR - FNR ~ fp * n_spoof - fn * n_bona.
  std::int64_t fp = n_bona, fn = 0;  // threshold -inf: everything is spoof
  std::int64_t best_diff = std::abs(fp * n_spoof - fn * n_bona);
  std::int64_t best_sum = fp * n_spoof + fn * n_bona;
  double best_t = -std::numeric_limits<double>::infinity();
  auto consider = [&](double t) {
    const std::int64_t diff = std::abs(fp * n_spoof - fn * n_bona);
    const std::int64_t sum = fp * n_spoof + fn * n_bona;
    if (diff < best_diff || (diff == best_diff && sum < best_sum)) {
      best_diff = diff;
      best_sum = sum;
      best_t = t;
    }
  };
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = scores[order[i]];
    // Raising the threshold to t rejects everything strictly below t.
    consider(t);
    while (i < order.size() && scores[order[i]] == t) {
      if (labels[order[i]] == kSpoof) {
        ++fn;
      } else {
        --fp;
      }
      ++i;
    }
  }
  consider(std::numeric_limits<double>::infinity());
  const double denom = 2.0 * static_cast<double>(n_spoof) * static_cast<double>(n_bona);
  return {static_cast<double>(best_sum) / denom, best_t};
}

inline EerResult ComputeEer(const ScoredSet& set) {
  set.validate();
  return ComputeEer(set.scores, set.labels);
}

struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_pred = 0.0;   // 0 when empty
  double frac_spoof = 0.0;  // 0 when empty

  friend bool operator==(const CalibrationBin&, const CalibrationBin&) = default;
};

struct EceResult {
  double ece = 0.0;
  std::vector<CalibrationBin> bins;
};

inline double BinEdge(std::size_t k, std::size_t n_bins) {
  return static_cast<double>(k) / static_cast<double>(n_bins);
}

/// Index k with BinEdge(k) <= p < BinEdge(k + 1); the last bin also holds 1.
inline std::size_t BinIndex(double p, std::size_t n_bins) {
  std::size_t k = static_cast<std::size_t>(std::floor(p * static_cast<double>(n_bins)));
  k = std::min(k, n_bins - 1);
  while (k > 0 && p < BinEdge(k, n_bins)) --k;
  while (k + 1 < n_bins && p >= BinEdge(k + 1, n_bins)) ++k;
  return k;
}

/// Expected calibration error over equal-width bins of the spoof probability:
/// sum_k (n_k / N) |mean prediction_k - spoof fraction_k| over non-empty bins.
inline EceResult ComputeEce(const ScoredSet& set, std::size_t n_bins = kDefaultEceBins) {
  if (n_bins < 1) throw Error(ErrorCode::kInvalidArgument, "n_bins must be >= 1");
  set.validate();
  if (set.scores.empty()) throw Error(ErrorCode::kEmptyInput, "ECE of an empty set");
  EceResult r;
  r.bins.resize(n_bins);
  std::vector<double> pred_sum(n_bins, 0.0);
  std::vector<std::size_t> spoof(n_bins, 0);
  for (std::size_t i = 0; i < set.scores.size(); ++i) {
    const std::size_t k = BinIndex(set.scores[i], n_bins);
    pred_sum[k] += set.scores[i];
    spoof[k] += set.labels[i];
    ++r.bins[k].count;
  }
  const double n = static_cast<double>(set.scores.size());
  for (std::size_t k = 0; k < n_bins; ++k) {
    auto& bin = r.bins[k];
    bin.lo = BinEdge(k, n_bins);
    bin.hi = BinEdge(k + 1, n_bins);
    if (bin.count == 0) continue;
    const double c = static_cast<double>(bin.count);
    bin.mean_pred = pred_sum[k] / c;
    bin.frac_spoof = static_cast<double>(spoof[k]) / c;
    r.ece += (c / n) * std::abs(bin.mean_pred - bin.frac_spoof);
  }
  return r;
}

/// Fraction of samples where (score >= threshold) agrees with the label.
inline double Accuracy(const ScoredSet& set, double decision_threshold = 0.5) {
  set.validate();
  if (set.scores.empty()) throw Error(ErrorCode::kEmptyInput, "accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < set.scores.size(); ++i) {
    const std::uint8_t pred = set.scores[i] >= decision_threshold ? kSpoof : kBonafide;
    hits += pred == set.labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(set.scores.size());
}

struct MetricsReport {
  std::size_t n = 0;
  double eer = 0.0;
  double eer_threshold = 0.0;
  double ece = 0.0;
  double accuracy = 0.0;
  double decision_threshold = 0.5;
  std::vector<CalibrationBin> bins;
};

inline MetricsReport ComputeMetrics(const ScoredSet& set, double decision_threshold = 0.5,
                                    std::size_t n_bins = kDefaultEceBins) {
  MetricsReport r;
  r.n = set.scores.size();
  const auto eer = ComputeEer(set);
  r.eer = eer.eer;
  r.eer_threshold = eer.threshold;
  auto ece = ComputeEce(set, n_bins);
  r.ece = ece.ece;
  r.bins = std::move(ece.bins);
  r.accuracy = Accuracy(set, decision_threshold);
  r.decision_threshold = decision_threshold;
  return r;
}

namespace detail {

// JSON has no infinities; thresholds at +-inf are written as strings.
inline nlohmann::ordered_json ThresholdJson(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

inline double ThresholdFromJson(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return ParseDouble(s);
  }
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::ordered_json ToJson(const MetricsReport& r) {
  auto bins = nlohmann::ordered_json::array();
  for (const auto& b : r.bins) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"count", b.count},
                    {"mean_pred", b.mean_pred},
                    {"frac_spoof", b.frac_spoof}});
  }
  return {{"n", r.n},
          {"eer", r.eer},
          {"eer_threshold", detail::ThresholdJson(r.eer_threshold)},
          {"ece", r.ece},
          {"accuracy", r.accuracy},
          {"decision_threshold", r.decision_threshold},
          {"bins", std::move(bins)}};
}

inline MetricsReport MetricsReportFromJson(const nlohmann::json& j) {
  MetricsReport r;
  r.n = j.at("n").get<std::size_t>();
  r.eer = j.at("eer").get<double>();
  r.eer_threshold = detail::ThresholdFromJson(j.at("eer_threshold"));
  r.ece = j.at("ece").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.decision_threshold = j.at("decision_threshold").get<double>();
  for (const auto& b : j.at("bins")) {
    r.bins.push_back({b.at("lo").get<double>(), b.at("hi").get<double>(),
                      b.at("count").get<std::size_t>(), b.at("mean_pred").get<double>(),
                      b.at("frac_spoof").get<double>()});
  }
  return r;
}

/// Reliability-diagram table: lo,hi,count,mean_pred,frac_spoof.
inline std::string BinsToCsv(std::span<const CalibrationBin> bins) {
  std::ostringstream out;
  out << "lo,hi,count,mean_pred,frac_spoof\n";
  for (const auto& b : bins) {
    out << FormatDouble(b.lo) << ',' << FormatDouble(b.hi) << ',' << b.count << ','
        << FormatDouble(b.mean_pred) << ',' << FormatDouble(b.frac_spoof) << '\n';
  }
  return out.str();
}

}  // namespace spoofcal
