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

// Release checks. Prints one PASS/FAIL line per check and exits non-zero if
// any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "spoofcal/cli.hpp"

namespace spoofcal {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int failures = 0;

void Report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct RandomScores {
  std::vector<double> s;
  std::vector<std::uint8_t> y;
};

RandomScores Draw(std::mt19937_64& gen, std::size_t max_n, bool ties) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomScores r;
  const std::size_t n = 2 + gen() % (max_n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    r.s.push_back(ties ? std::round(u(gen) * 8.0) / 8.0 : u(gen));
    r.y.push_back(static_cast<std::uint8_t>(gen() & 1));
  }
  // both classes present, at random positions
  const std::size_t a = gen() % n, b = (a + 1 + gen() % (n - 1)) % n;
  r.y[a] = 0;
  r.y[b] = 1;
  return r;
}

void EerOracle() {
  const auto start = Clock::now();
  std::mt19937_64 gen(2026);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto r = Draw(gen, 50, t % 2 == 0);
    worst = std::max(worst, std::abs(ComputeEer(r.s, r.y).eer - testing::BruteForceEer(r.s, r.y)));
  }
  const double secs = Seconds(start);
  Report("eer_oracle", worst <= 1e-9 && secs < 5.0,
         Fmt("200 sets, max |diff| %.3g, %.3f s", worst, secs));
}

void EceOracle() {
  const auto start = Clock::now();
  std::mt19937_64 gen(2027);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    auto r = Draw(gen, 200, t % 3 == 0);
    for (std::size_t i = 0; i < r.s.size(); i += 7) r.s[i] = static_cast<double>(gen() % 16) / 15.0;
    if (ComputeEce(ScoredSet{r.s, r.y}).ece != testing::BruteForceEce(r.s, r.y, kDefaultEceBins)) {
      ++mismatches;
    }
  }
  const double secs = Seconds(start);
  Report("ece_oracle", mismatches == 0 && secs < 5.0,
         Fmt("200 sets, %.0f not bit-identical, %.3f s", mismatches, secs));
}

void EntropySpotValues() {
  const double f9 = UnitEntropy(0.9);
  const bool ok = UnitEntropy(0.5) == 1.0 && UnitEntropy(0.0) == 0.0 && UnitEntropy(1.0) == 0.0 &&
                  std::abs(f9 - 0.46900) <= 1e-4;
  Report("entropy_spot_values", ok,
         Fmt("f(0.5)=%.17g f(0)=%.17g f(0.9)=%.6f", UnitEntropy(0.5), UnitEntropy(0.0), f9));
}

EmbeddingDataset SmallRandom(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  std::normal_distribution<float> nd(0.f, 1.5f);
  std::vector<float> x(n * d);
  for (auto& v : x) v = nd(gen) + 1.f;
  std::vector<std::uint8_t> y(n);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<std::uint8_t>(i % 2);
    ids.push_back(std::to_string(i));
  }
  return EmbeddingDataset(ids, x, d, y, "gradcheck");
}

void GradientChecks() {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd(0.0, 0.7);
  double worst_lin = 0.0, worst_mlp = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 4 + gen() % 8, d = 1 + gen() % 5, h = 1 + gen() % 6;
    const auto data = SmallRandom(gen, n, d);
    const double lambda = 0.01 * static_cast<double>(gen() % 50);

    // logistic
    const auto st = Standardizer::Fit(data);
    const Standardizer* sp = t % 2 == 0 ? &st : nullptr;
    std::vector<double> theta(d + 1);
    for (auto& v : theta) v = nd(gen);
    std::vector<double> gw;
    double gb = 0.0;
    LogisticObjective(data, sp, lambda, std::span(theta).first(d), theta[d], &gw, &gb);
    gw.push_back(gb);
    auto f = [&](const std::vector<double>& p) {
      return LogisticObjective(data, sp, lambda, std::span(p).first(d), p[d]);
    };
    for (std::size_t i = 0; i <= d; ++i) {
      worst_lin = std::max(worst_lin, testing::RelativeError(gw[i], testing::CentralDifference(f, theta, i)));
    }

    // mlp; pack every parameter into one vector
    MlpModel m;
    m.input_dim = d;
    m.hidden = h;
    m.w1.resize(d * h);
    m.b1.resize(h);
    m.w2.resize(h);
    for (auto& v : m.w1) v = nd(gen);
    for (auto& v : m.b1) v = nd(gen);
    for (auto& v : m.w2) v = nd(gen);
    m.b2 = nd(gen);
    if (t % 2 == 0) m.standardizer = st;
    auto flatten = [](const std::vector<double>& a, const std::vector<double>& b,
                      const std::vector<double>& c, double e) {
      std::vector<double> out(a);
      out.insert(out.end(), b.begin(), b.end());
      out.insert(out.end(), c.begin(), c.end());
      out.push_back(e);
      return out;
    };
    auto unflatten = [&](const std::vector<double>& p) {
      MlpModel r = m;
      std::copy_n(p.begin(), d * h, r.w1.begin());
      std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(d * h), h, r.b1.begin());
      std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(d * h + h), h, r.w2.begin());
      r.b2 = p.back();
      return r;
    };
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    MlpGradient g;
    MlpObjective(m, data, rows, lambda, &g);
    const auto analytic = flatten(g.w1, g.b1, g.w2, g.b2);
    const auto params = flatten(m.w1, m.b1, m.w2, m.b2);
    auto fm = [&](const std::vector<double>& p) {
      return MlpObjective(unflatten(p), data, rows, lambda);
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
      worst_mlp = std::max(worst_mlp,
                           testing::RelativeError(analytic[i], testing::CentralDifference(fm, params, i)));
    }
  }
  Report("gradient_check_logistic", worst_lin < 1e-5, Fmt("20 instances, max rel err %.3g", worst_lin));
  Report("gradient_check_mlp", worst_mlp < 1e-5, Fmt("20 instances, max rel err %.3g", worst_mlp));
}

int Cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::Run(args, out, err);
  if (code != 0) std::printf("  command failed (%d): %s\n", code, err.str().c_str());
  return code;
}

struct SyntheticPaths {
  std::string train, test;
};

SyntheticPaths WriteSynthetic(const fs::path& dir) {
  const SyntheticPaths p{(dir / "train.emb").string(), (dir / "test.emb").string()};
  Cli({"synth", "--output", p.train, "--n", "2000", "--dim", "16", "--separation", "4", "--seed", "0",
       "--source", "train"});
  Cli({"synth", "--output", p.test, "--n", "2000", "--dim", "16", "--separation", "4", "--seed", "1",
       "--source", "test"});
  return p;
}

// Overlapping classes (separation along one axis only), so the study trend
// is not flattened at zero error.
SyntheticPaths WriteOverlapping(const fs::path& dir) {
  const SyntheticPaths p{(dir / "overlap_train.emb").string(), (dir / "overlap_test.emb").string()};
  Cli({"synth", "--output", p.train, "--n", "2000", "--dim", "16", "--separation", "2",
       "--along-axis", "--seed", "0", "--source", "train"});
  Cli({"synth", "--output", p.test, "--n", "2000", "--dim", "16", "--separation", "2",
       "--along-axis", "--seed", "1", "--source", "test"});
  return p;
}

void SyntheticEndToEnd(const fs::path& dir, const SyntheticPaths& p) {
  const auto start = Clock::now();
  const bool ran = Cli({"train", "--train", p.train, "--seed", "0", "-o", (dir / "e2e").string()}) == 0 &&
                   Cli({"eval", "--model", (dir / "e2e" / "model.json").string(), "--eval", p.test,
                        "-o", (dir / "e2e").string()}) == 0;
  const double secs = Seconds(start);
  if (!ran) {
    Report("synthetic_end_to_end", false, "pipeline failed");
    Report("rejection_curve", false, "pipeline failed");
    return;
  }
  const auto report = nlohmann::json::parse(ReadFile(dir / "e2e" / "test.metrics.json"));
  const auto m = MetricsReportFromJson(report.at("metrics"));
  Report("synthetic_end_to_end", m.eer <= 0.01 && m.ece <= 0.05 && secs < 10.0,
         Fmt("EER %.4f%%, ECE %.4f%%, %.3f s", 100 * m.eer, 100 * m.ece, secs));

  // Rebuild the curve from the emitted per-sample scores.
  std::vector<std::string> ids;
  std::vector<double> y_hat;
  std::vector<std::uint8_t> labels;
  for (const auto& row : ScoresFromCsv(ReadFile(dir / "e2e" / "test.scores.csv"))) {
    ids.push_back(row.id);
    y_hat.push_back(row.y_hat);
    labels.push_back(row.label);
  }
  const auto curve = ComputeRejectionCurve(MakePredictions(ids, y_hat), labels);
  bool monotone = curve.points.size() == 101;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    monotone = monotone && curve.points[k].kept_fraction >= curve.points[k - 1].kept_fraction;
  }
  double small_acc = -1.0, small_tau = -1.0;
  for (const auto& pt : curve.points) {
    if (pt.kept_fraction >= 0.1) {
      small_acc = *pt.accuracy;
      small_tau = pt.tau;
      break;
    }
  }
  const double full_acc = *curve.points.back().accuracy;
  Report("rejection_curve", monotone && small_acc >= full_acc,
         Fmt("101 points monotone; acc %.4f at tau=%.2f vs %.4f at tau=1", small_acc, small_tau, full_acc));
}

std::vector<StudyRow> RunStudy(const fs::path& out, const SyntheticPaths& p) {
  if (Cli({"study", "--train", p.train, "--eval", p.test, "--sizes", "250", "500", "1000", "2000",
           "--seeds", "0", "1", "2", "-o", out.string()}) != 0) {
    return {};
  }
  return StudyFromCsv(ReadFile(out / "study.csv"));
}

void SubsampleStudy(const fs::path& dir, const SyntheticPaths& p) {
  const auto rows = RunStudy(dir / "study", p);
  std::size_t replicates = 0, aggregates = 0;
  double eer_250 = -1, eer_2000 = -1;
  for (const auto& r : rows) {
    (r.aggregate ? aggregates : replicates) += 1;
    if (r.aggregate && r.size == 250) eer_250 = r.eer;
    if (r.aggregate && r.size == 2000) eer_2000 = r.eer;
  }
  const bool ok = replicates == 12 && aggregates == 4 && eer_250 >= 0 && eer_2000 <= eer_250;
  Report("subsample_study", ok,
         Fmt("%.0f replicate + %.0f aggregate rows; ", static_cast<double>(replicates),
             static_cast<double>(aggregates)) +
             Fmt("mean EER %.4f%% at 2000 vs %.4f%% at 250", 100 * eer_2000, 100 * eer_250));
}

void Determinism(const fs::path& dir, const SyntheticPaths& p) {
  bool same = true;
  for (const char* run : {"det_a", "det_b"}) {
    Cli({"train", "--train", p.train, "-o", (dir / run).string()});
    Cli({"train", "--train", p.train, "--classifier", "mlp", "--hidden-size", "16", "--epochs", "5",
         "-o", (dir / run / "mlp").string()});
    RunStudy(dir / run / "study", p);
  }
  std::size_t compared = 0;
  for (const char* f : {"model.json", "train_report.json", "mlp/model.json", "mlp/train_report.json",
                        "study/study.csv"}) {
    const auto a = dir / "det_a" / f, b = dir / "det_b" / f;
    same = same && fs::exists(a) && fs::exists(b) && ReadFile(a) == ReadFile(b);
    ++compared;
  }
  Report("determinism", same, Fmt("%.0f artifacts compared byte for byte", static_cast<double>(compared)));
}

}  // namespace
}  // namespace spoofcal

int main() {
  using namespace spoofcal;
  const auto dir = testing::MakeTempDir("acceptance");
  EerOracle();
  EceOracle();
  EntropySpotValues();
  GradientChecks();
  const auto paths = WriteSynthetic(dir);
  SyntheticEndToEnd(dir, paths);
  const auto overlapping = WriteOverlapping(dir);
  SubsampleStudy(dir, overlapping);
  Determinism(dir, overlapping);
  std::filesystem::remove_all(dir);
  std::printf("%s: %d failed\n", failures == 0 ? "ALL PASS" : "SOME FAILED", failures);
  return failures == 0 ? 0 : 1;
}
