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

#include "spoofcal/selective.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "spoofcal/classifier.hpp"
#include "spoofcal/synthetic.hpp"

namespace spoofcal {
namespace {

std::vector<Prediction> Preds(const std::vector<double>& p) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < p.size(); ++i) ids.push_back("u" + std::to_string(i));
  return MakePredictions(ids, p);
}

TEST(UnitEntropy, SpotValues) {
  EXPECT_EQ(UnitEntropy(0.5), 1.0);
  EXPECT_EQ(UnitEntropy(0.0), 0.0);
  EXPECT_EQ(UnitEntropy(1.0), 0.0);
  EXPECT_NEAR(UnitEntropy(0.9), 0.46900, 1e-4);
  // -(p log2 p + q log2 q) evaluated separately
  EXPECT_NEAR(UnitEntropy(0.99), 0.0807931, 1e-6);
  EXPECT_NEAR(UnitEntropy(0.8), 0.7219281, 1e-6);
  EXPECT_NEAR(UnitEntropy(0.55), 0.9927745, 1e-6);
}

TEST(UnitEntropy, RejectsOutOfRange) {
  EXPECT_THROW(UnitEntropy(-0.1), Error);
  EXPECT_THROW(UnitEntropy(1.0001), Error);
  EXPECT_THROW(UnitEntropy(std::nan("")), Error);
}

TEST(UnitEntropy, ShapeOnGrid) {
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double p = static_cast<double>(i) / n;
    const double f = UnitEntropy(p);
    EXPECT_NEAR(f, UnitEntropy(1.0 - p), 1e-15);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    if (i != 0 && i != n) {
      EXPECT_GT(f, 0.0);
    }
    if (i != n / 2) {
      EXPECT_LT(f, 1.0);
    }
    if (i > 0 && i < n) {
      // midpoint concavity
      const double h = 1.0 / n;
      EXPECT_GE(f + 1e-12, 0.5 * (UnitEntropy(p - h) + UnitEntropy(p + h)));
    }
  }
}

TEST(UnitEntropy, BaseInvariance) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(gen);
    const double log2_direct = -(p * std::log2(p) + (1 - p) * std::log2(1 - p));
    EXPECT_NEAR(UnitEntropy(p), log2_direct, 1e-12);
  }
}

TEST(RejectionCurve, ZeroEntropyKeepsEverything) {
  const auto preds = Preds({0.0, 1.0, 1.0});
  const auto c = ComputeRejectionCurve(preds, std::vector<std::uint8_t>{0, 1, 0});
  ASSERT_EQ(c.points.size(), 101u);
  for (const auto& p : c.points) EXPECT_EQ(p.kept_fraction, 1.0);
}

TEST(RejectionCurve, HandExample) {
  const auto preds = Preds({0.99, 0.8, 0.55});
  const std::vector<std::uint8_t> labels = {1, 0, 1};
  const auto c = ComputeRejectionCurve(preds, labels);
  const auto& at_half = c.points[50];
  EXPECT_EQ(at_half.tau, 0.5);
  EXPECT_DOUBLE_EQ(at_half.kept_fraction, 1.0 / 3.0);
  ASSERT_TRUE(at_half.accuracy.has_value());
  EXPECT_EQ(*at_half.accuracy, 1.0);
  // nothing kept below the smallest entropy
  EXPECT_EQ(c.points[0].kept_fraction, 0.0);
  EXPECT_FALSE(c.points[0].accuracy.has_value());
  // tau = 1 is plain accuracy
  EXPECT_EQ(c.points.back().tau, 1.0);
  EXPECT_EQ(c.points.back().kept_fraction, 1.0);
  EXPECT_DOUBLE_EQ(*c.points.back().accuracy, 2.0 / 3.0);
}

TEST(RejectionCurve, TausAreHundredthsAndKeptIsMonotone) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 64; ++i) {
      p.push_back(u(gen));
      y.push_back(static_cast<std::uint8_t>(gen() & 1));
    }
    const auto c = ComputeRejectionCurve(Preds(p), y);
    ASSERT_EQ(c.points.size(), 101u);
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      EXPECT_NEAR(c.points[k].tau, 0.01 * static_cast<double>(k), 1e-15);
      if (k > 0) {
        EXPECT_GT(c.points[k].tau, c.points[k - 1].tau);
        EXPECT_GE(c.points[k].kept_fraction, c.points[k - 1].kept_fraction);
      }
    }
  }
}

TEST(RejectionCurve, Errors) {
  const auto preds = Preds({0.3, 0.6});
  EXPECT_THROW(ComputeRejectionCurve(preds, std::vector<std::uint8_t>{1}), Error);
  EXPECT_THROW(ComputeRejectionCurve(preds, std::vector<std::uint8_t>{1, 0}, 0.3), Error);
  EXPECT_EQ(ComputeRejectionCurve(preds, std::vector<std::uint8_t>{1, 0}, 0.25).points.size(), 5u);
}

TEST(RejectionCurve, CsvMarksUndefinedAccuracy) {
  const auto c = ComputeRejectionCurve(Preds({0.6}), std::vector<std::uint8_t>{1}, 0.5);
  EXPECT_EQ(RejectionCurveToCsv(c), "tau,kept_fraction,accuracy\n0,0,\n0.5,0,\n1,1,1\n");
}

TEST(RejectionCurve, TradesCoverageForAccuracyOnOverlappingClasses) {
  GaussianClassesOptions o;
  o.n = 3000;
  o.dim = 8;
  o.separation = 2.0;
  o.per_coordinate = false;
  const auto train = MakeGaussianClasses(o);
  o.seed = 1;
  const auto test = MakeGaussianClasses(o);
  const auto probs = PredictProba(TrainLogistic(train, TrainConfig{}), test);
  const auto c = ComputeRejectionCurve(MakePredictions(test.ids(), probs), test.labels());
  const auto& full = c.points.back();
  for (const auto& p : c.points) {
    if (p.kept_fraction >= 0.1) {
      EXPECT_GT(*p.accuracy, *full.accuracy + 0.05);
      break;
    }
  }
}

TEST(EvaluateAll, ConsistentWithIndividualOps) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 200; ++i) {
    p.push_back(u(gen));
    y.push_back(static_cast<std::uint8_t>(u(gen) < p.back()));
  }
  const auto preds = Preds(p);
  const auto e = EvaluateAll(preds, y);
  const ScoredSet s{p, y};
  EXPECT_EQ(e.metrics.eer, ComputeEer(s).eer);
  EXPECT_EQ(e.metrics.ece, ComputeEce(s).ece);
  EXPECT_EQ(e.metrics.accuracy, Accuracy(s));
  EXPECT_EQ(*e.rejection.points.back().accuracy, e.metrics.accuracy);
}

TEST(EvaluateAll, SeparablePredictions) {
  const std::vector<double> p = {kProbEpsilon, 1 - kProbEpsilon, 0.01, 0.97};
  const std::vector<std::uint8_t> y = {0, 1, 0, 1};
  const auto e = EvaluateAll(Preds(p), y);
  EXPECT_EQ(e.metrics.eer, 0.0);
  EXPECT_LT(e.metrics.ece, 0.02);
  for (const auto& pt : e.rejection.points) {
    if (pt.accuracy) {
      EXPECT_EQ(*pt.accuracy, 1.0);
    }
  }
}

}  // namespace
}  // namespace spoofcal
