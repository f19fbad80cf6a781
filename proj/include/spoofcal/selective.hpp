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

// Entropy-based rejection: predictions whose unit-scaled binary entropy
// exceeds a threshold tau are abstained on, and accuracy is measured on the
// rest.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "spoofcal/dataset.hpp"
#include "spoofcal/error.hpp"
#include "spoofcal/metrics.hpp"
#include "spoofcal/util.hpp"

namespace spoofcal {

/// Binary entropy in nats, with 0 log 0 = 0.
inline double BinaryEntropyNats(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

/// H(p) / H(0.5), in [0, 1]. Equals 1 exactly at p = 0.5 and 0 at p in {0, 1}.
inline double UnitEntropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "probability outside [0, 1]");
  }
  static const double kMaxEntropy = BinaryEntropyNats(0.5);
  return std::min(1.0, BinaryEntropyNats(p) / kMaxEntropy);
}

struct Prediction {
  std::string id;
  double y_hat = 0.0;
  double unit_entropy = 0.0;
  std::uint8_t hard_label = kBonafide;
};

inline std::vector<Prediction> MakePredictions(std::span<const std::string> ids,
                                               std::span<const double> y_hat,
                                               double decision_threshold = 0.5) {
  if (ids.size() != y_hat.size()) {
    throw Error(ErrorCode::kLengthMismatch, "ids and probabilities differ in length");
  }
  std::vector<Prediction> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.push_back({ids[i], y_hat[i], UnitEntropy(y_hat[i]),
                   y_hat[i] >= decision_threshold ? kSpoof : kBonafide});
  }
  return out;
}

struct RejectionPoint {
  double tau = 0.0;
  double kept_fraction = 0.0;
  std::optional<double> accuracy;  // empty when nothing is kept
};

struct RejectionCurve {
  std::vector<RejectionPoint> points;
};

/// Sweeps tau = 0, step, ..., 1 and keeps samples with unit entropy <= tau.
inline RejectionCurve ComputeRejectionCurve(std::span<const Prediction> predictions,
                                            std::span<const std::uint8_t> labels,
                                            double step = 0.01,
                                            double decision_threshold = 0.5) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "predictions and labels differ in length");
  }
  if (predictions.empty()) throw Error(ErrorCode::kEmptyInput, "no predictions");
  if (!(step > 0.0 && step <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step must be in (0, 1]");
  }
  const double steps_real = std::round(1.0 / step);
  if (std::abs(steps_real * step - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "step must divide 1 evenly");
  }
  const auto n_steps = static_cast<std::size_t>(steps_real);

  // Sort by entropy once; each tau then keeps a prefix.
  std::vector<std::size_t> order(predictions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].unit_entropy < predictions[b].unit_entropy;
  });

  RejectionCurve curve;
  curve.points.reserve(n_steps + 1);
  const double n = static_cast<double>(predictions.size());
  std::size_t kept = 0, correct = 0;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double tau = static_cast<double>(k) / static_cast<double>(n_steps);
    while (kept < order.size() && predictions[order[kept]].unit_entropy <= tau) {
      const auto& p = predictions[order[kept]];
      const std::uint8_t pred = p.y_hat >= decision_threshold ? kSpoof : kBonafide;
      correct += pred == labels[order[kept]];
      ++kept;
    }
    RejectionPoint pt{tau, static_cast<double>(kept) / n, std::nullopt};
    if (kept > 0) pt.accuracy = static_cast<double>(correct) / static_cast<double>(kept);
    curve.points.push_back(pt);
  }
  return curve;
}

/// tau,kept_fraction,accuracy with an empty accuracy cell when undefined.
inline std::string RejectionCurveToCsv(const RejectionCurve& curve) {
  std::ostringstream out;
  out << "tau,kept_fraction,accuracy\n";
  for (const auto& p : curve.points) {
    out << FormatDouble(p.tau) << ',' << FormatDouble(p.kept_fraction) << ',';
    if (p.accuracy) out << FormatDouble(*p.accuracy);
    out << '\n';
  }
  return out.str();
}

struct Evaluation {
  MetricsReport metrics;
  RejectionCurve rejection;
};

inline Evaluation EvaluateAll(std::span<const Prediction> predictions,
                              std::span<const std::uint8_t> labels,
                              double decision_threshold = 0.5,
                              std::size_t n_bins = kDefaultEceBins, double step = 0.01) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "predictions and labels differ in length");
  }
  std::vector<double> scores(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) scores[i] = predictions[i].y_hat;
  Evaluation e;
  e.metrics = ComputeMetrics({scores, labels}, decision_threshold, n_bins);
  e.rejection = ComputeRejectionCurve(predictions, labels, step, decision_threshold);
  return e;
}

}  // namespace spoofcal
