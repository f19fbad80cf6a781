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

// The spoofcal command-line front end. Kept in a header so tests can drive
// Run() in-process.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error.

#pragma once

#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spoofcal/classifier.hpp"
#include "spoofcal/dataset.hpp"
#include "spoofcal/error.hpp"
#include "spoofcal/metrics.hpp"
#include "spoofcal/report.hpp"
#include "spoofcal/selective.hpp"
#include "spoofcal/synthetic.hpp"
#include "spoofcal/util.hpp"

namespace spoofcal::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

inline int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kNumeric: return kExitNumeric;
  }
  return kExitData;
}

struct ExperimentConfig {
  std::string train_manifest;
  std::vector<std::string> eval_manifests;
  std::vector<std::string> models;
  std::string classifier = "logistic";
  TrainConfig train;
  std::vector<std::size_t> subsample_sizes;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::string output_dir = ".";
  double decision_threshold = 0.5;
};

/// Reads an ExperimentConfig from JSON. Keys mirror the command-line flags
/// with underscores; unknown keys are rejected.
inline ExperimentConfig ConfigFromJson(const nlohmann::json& j) {
  static const std::set<std::string> kKnown = {
      "train_manifest", "eval_manifests", "models",      "classifier",  "lambda",
      "tol",            "max_iters",      "standardize", "seed",        "hidden_size",
      "step_size",      "momentum",       "batch_size",  "epochs",      "subsample_sizes",
      "seeds",          "output_dir",     "decision_threshold"};
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (!kKnown.contains(key)) {
        throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
      }
    }
    auto get = [&](const char* key, auto& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get("train_manifest", c.train_manifest);
    get("eval_manifests", c.eval_manifests);
    get("models", c.models);
    get("classifier", c.classifier);
    get("lambda", c.train.lambda);
    get("tol", c.train.tol);
    get("max_iters", c.train.max_iters);
    get("standardize", c.train.standardize);
    get("seed", c.train.seed);
    get("hidden_size", c.train.hidden_size);
    get("step_size", c.train.step_size);
    get("momentum", c.train.momentum);
    get("batch_size", c.train.batch_size);
    get("epochs", c.train.epochs);
    get("subsample_sizes", c.subsample_sizes);
    get("seeds", c.seeds);
    get("output_dir", c.output_dir);
    get("decision_threshold", c.decision_threshold);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad config value: ") + ex.what());
  }
  return c;
}

/// Report name for a dataset file: "data/itw.json" -> "itw".
inline std::string DatasetName(const fs::path& p) {
  auto name = p.filename().string();
  for (const char* ext : {".json", ".emb1", ".emb"}) {
    const std::string e = ext;
    if (name.size() > e.size() && name.ends_with(e)) name.resize(name.size() - e.size());
  }
  return name;
}

/// Unique report names, suffixing repeats with _2, _3, ...
inline std::vector<std::string> DatasetNames(const std::vector<std::string>& paths) {
  std::vector<std::string> names;
  std::map<std::string, int> seen;
  for (const auto& p : paths) {
    std::string n = DatasetName(p);
    const int k = ++seen[n];
    if (k > 1) n += "_" + std::to_string(k);
    names.push_back(n);
  }
  return names;
}

namespace detail {

inline void RequireEvalSets(const ExperimentConfig& c) {
  if (c.eval_manifests.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one --eval dataset is required");
  }
}

inline void RequireTrainSet(const ExperimentConfig& c) {
  if (c.train_manifest.empty()) throw Error(ErrorCode::kInvalidArgument, "--train is required");
}

inline Model TrainModel(const EmbeddingDataset& train, const ExperimentConfig& c) {
  if (c.classifier == "logistic") return TrainLogistic(train, c.train);
  if (c.classifier == "mlp") return TrainMlp(train, c.train);
  throw Error(ErrorCode::kInvalidArgument,
              "classifier must be 'logistic' or 'mlp', got '" + c.classifier + "'");
}

inline std::string Percent(double fraction) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * fraction << '%';
  return s.str();
}

/// Scores one dataset and writes <name>.{metrics.json,bins.csv,rejection.csv,scores.csv}.
inline Evaluation WriteEvaluation(const fs::path& dir, const std::string& name,
                                  const EmbeddingDataset& data, std::span<const double> probs,
                                  std::size_t n_models, double decision_threshold,
                                  std::ostream& out) {
  const auto preds = MakePredictions(data.ids(), probs, decision_threshold);
  Evaluation e = EvaluateAll(preds, data.labels(), decision_threshold);

  auto rejection = nlohmann::ordered_json::array();
  for (const auto& p : e.rejection.points) {
    rejection.push_back({{"tau", p.tau},
                         {"kept_fraction", p.kept_fraction},
                         {"accuracy", p.accuracy ? nlohmann::ordered_json(*p.accuracy)
                                                 : nlohmann::ordered_json(nullptr)}});
  }
  nlohmann::ordered_json report = {{"dataset", name},
                                   {"n_models", n_models},
                                   {"metrics", ToJson(e.metrics)},
                                   {"rejection_curve", std::move(rejection)}};
  WriteFileAtomic(dir / (name + ".metrics.json"), report.dump(2) + "\n");
  WriteFileAtomic(dir / (name + ".bins.csv"), BinsToCsv(e.metrics.bins));
  WriteFileAtomic(dir / (name + ".rejection.csv"), RejectionCurveToCsv(e.rejection));
  WriteFileAtomic(dir / (name + ".scores.csv"), ScoresToCsv(preds, data.labels()));
  out << name << ": n=" << data.size() << " EER " << Percent(e.metrics.eer) << " ECE "
      << Percent(e.metrics.ece) << " accuracy " << Percent(e.metrics.accuracy) << '\n';
  return e;
}

}  // namespace detail

/// Trains one model; writes model.json and train_report.json.
inline void CmdTrain(const ExperimentConfig& c, std::ostream& out) {
  detail::RequireTrainSet(c);
  const auto train = ReadEmbeddings(c.train_manifest);
  const Model model = detail::TrainModel(train, c);
  const fs::path dir = c.output_dir;
  SaveModel(dir / "model.json", model);
  const TrainMeta& meta = std::visit([](const auto& m) -> const TrainMeta& { return m.meta; }, model);
  nlohmann::ordered_json report = {{"classifier", c.classifier},
                                   {"n_train", train.size()},
                                   {"dim", train.dim()},
                                   {"final_loss", meta.final_loss},
                                   {"iterations", meta.iterations},
                                   {"converged", meta.converged}};
  WriteFileAtomic(dir / "train_report.json", report.dump(2) + "\n");
  out << "trained " << c.classifier << " on " << train.size() << " x " << train.dim()
      << ": loss " << FormatDouble(meta.final_loss) << ", " << meta.iterations
      << " iterations, converged=" << (meta.converged ? "true" : "false") << '\n';
}

/// Scores every eval set with the mean probability of `c.models`.
inline void CmdEnsemble(const ExperimentConfig& c, std::ostream& out) {
  detail::RequireEvalSets(c);
  if (c.models.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one --model is required");
  std::vector<Model> models;
  for (const auto& p : c.models) models.push_back(LoadModel(p));
  for (const auto& m : models) {
    if (ModelDim(m) != ModelDim(models.front())) {
      throw Error(ErrorCode::kDimensionMismatch, "ensemble members disagree on input dimension");
    }
  }
  const auto names = DatasetNames(c.eval_manifests);
  for (std::size_t k = 0; k < c.eval_manifests.size(); ++k) {
    const auto data = ReadEmbeddings(c.eval_manifests[k]);
    const auto probs = EnsemblePredict(models, data);
    detail::WriteEvaluation(c.output_dir, names[k], data, probs, models.size(),
                            c.decision_threshold, out);
  }
}

inline void CmdEval(const ExperimentConfig& c, std::ostream& out) {
  if (c.models.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "eval takes exactly one --model (use ensemble)");
  }
  CmdEnsemble(c, out);
}

/// Trains on stratified subsets of each size with each seed and writes
/// study.csv: replicate rows, then one aggregate row per (dataset, size).
inline void CmdStudy(const ExperimentConfig& c, std::ostream& out) {
  detail::RequireTrainSet(c);
  detail::RequireEvalSets(c);
  if (c.subsample_sizes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--sizes is required for study");
  }
  if (c.seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "--seeds must be non-empty");
  const auto train = ReadEmbeddings(c.train_manifest);
  for (std::size_t n : c.subsample_sizes) {
    if (n < 1 || n > train.size()) {
      throw Error(ErrorCode::kOutOfRange, "study size " + std::to_string(n) +
                                              " outside [1, " + std::to_string(train.size()) + "]");
    }
  }
  std::vector<EmbeddingDataset> evals;
  for (const auto& p : c.eval_manifests) evals.push_back(ReadEmbeddings(p));
  const auto names = DatasetNames(c.eval_manifests);

  std::vector<StudyRow> replicates, aggregates;
  for (std::size_t n : c.subsample_sizes) {
    std::vector<std::vector<double>> eers(evals.size()), eces(evals.size());
    for (std::uint64_t seed : c.seeds) {
      ExperimentConfig run = c;
      run.train.seed = seed;
      const auto subset = Subsample(train, n, seed);
      const Model model = detail::TrainModel(subset, run);
      for (std::size_t k = 0; k < evals.size(); ++k) {
        const auto probs = PredictProba(model, evals[k]);
        const auto m = ComputeMetrics({probs, evals[k].labels()}, c.decision_threshold);
        replicates.push_back({false, names[k], n, seed, m.eer, m.ece, std::nullopt, std::nullopt});
        eers[k].push_back(m.eer);
        eces[k].push_back(m.ece);
      }
    }
    for (std::size_t k = 0; k < evals.size(); ++k) {
      aggregates.push_back({true, names[k], n, std::nullopt, Mean(eers[k]), Mean(eces[k]),
                            StdDev(eers[k]), StdDev(eces[k])});
      out << names[k] << " size " << n << ": EER " << detail::Percent(Mean(eers[k])) << " +- "
          << detail::Percent(StdDev(eers[k])) << ", ECE " << detail::Percent(Mean(eces[k]))
          << " +- " << detail::Percent(StdDev(eces[k])) << '\n';
    }
  }
  replicates.insert(replicates.end(), aggregates.begin(), aggregates.end());
  WriteFileAtomic(fs::path(c.output_dir) / "study.csv", StudyToCsv(replicates));
}

/// Validates EMB1 files (and their sidecar manifests) or manifests. Prints
/// one JSON line per file; returns the exit code.
inline int CmdExtractCheck(const std::vector<std::string>& files, std::ostream& out,
                           std::ostream& err) {
  int code = kExitOk;
  for (const auto& f : files) {
    nlohmann::ordered_json line = {{"file", f}};
    try {
      const fs::path p = f;
      std::size_t n = 0, d = 0;
      bool labelled = false;
      if (p.extension() == ".json") {
        const auto ds = LoadManifest(p);
        n = ds.size();
        d = ds.dim();
        labelled = true;
      } else {
        const auto m = ReadEmb1(p);
        n = m.rows;
        d = m.cols;
        if (fs::exists(SidecarManifestPath(p))) {
          const auto ds = ReadEmbeddings(p);
          labelled = true;
          if (ds.size() != n) {
            // a sidecar may reference only part of the file; report both
            line["manifest_rows"] = ds.size();
          }
        }
      }
      line["ok"] = true;
      line["n"] = n;
      line["d"] = d;
      line["manifest"] = labelled;
      out << line.dump() << '\n';
    } catch (const Error& e) {
      line["ok"] = false;
      line["error"] = ToString(e.code());
      line["message"] = e.what();
      err << line.dump() << '\n';
      code = std::max(code, ExitCodeFor(e.kind()));
    }
  }
  return code;
}

inline void WriteErrorJson(std::ostream& err, ErrorKind kind, const std::string& code,
                           const std::string& message) {
  nlohmann::ordered_json j = {
      {"error", {{"kind", ToString(kind)}, {"code", code}, {"message", message}}}};
  err << j.dump() << '\n';
}

/// Parses `args` (without the program name) and runs the chosen subcommand.
inline int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calibrated spoof/bonafide classifiers on frozen speech embeddings", "spoofcal"};
  app.require_subcommand(1);

  std::string config_file;
  ExperimentConfig flags;
  bool standardize = true;
  GaussianClassesOptions synth;
  std::string synth_out;
  std::vector<std::string> check_files;

  auto* train = app.add_subcommand("train", "Train a classifier on one dataset");
  auto* eval = app.add_subcommand("eval", "Score eval sets with a trained model");
  auto* ensemble = app.add_subcommand("ensemble", "Score eval sets with averaged probabilities");
  auto* study = app.add_subcommand("study", "Training-set size study over seeds");
  auto* check = app.add_subcommand("extract-check", "Validate EMB1 files and manifests");
  auto* synth_cmd = app.add_subcommand("synth", "Write a two-Gaussian synthetic dataset");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON file with experiment settings")
                        ->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", flags.output_dir, "Output directory");
    sub->add_option("--decision-threshold", flags.decision_threshold,
                        "Spoof iff P(spoof) >= threshold");
  };
  auto add_eval = [&](CLI::App* sub) {
    sub->add_option("--eval", flags.eval_manifests,
                                  "Evaluation manifest or EMB1 file (repeatable)");
  };
  auto add_training = [&](CLI::App* sub) {
    sub->add_option("--train", flags.train_manifest, "Training manifest or EMB1 file");
    sub->add_option("--classifier", flags.classifier, "logistic or mlp")
                            ->check(CLI::IsMember({"logistic", "mlp"}));
    sub->add_option("--lambda", flags.train.lambda, "L2 coefficient (default 1e-4)");
    sub->add_option("--tol", flags.train.tol, "Gradient inf-norm tolerance (default 1e-7)");
    sub->add_option("--max-iters", flags.train.max_iters, "Iteration cap (default 10000)");
    sub->add_flag("--standardize,!--no-standardize", standardize,
                                       "Standardize features (default on)");
    sub->add_option("--seed", flags.train.seed, "Training seed");
    sub->add_option("--hidden-size", flags.train.hidden_size,
                                         "MLP hidden units (implementation default 256)");
    sub->add_option("--step-size", flags.train.step_size,
                                       "MLP SGD step size (implementation default 0.01)");
    sub->add_option("--momentum", flags.train.momentum,
                                      "MLP momentum (implementation default 0.9)");
    sub->add_option("--batch-size", flags.train.batch_size,
                                        "MLP batch size (implementation default 64)");
    sub->add_option("--epochs", flags.train.epochs,
                                    "MLP epochs (implementation default 50)");
  };

  add_common(train);
  add_training(train);

  add_common(eval);
  add_eval(eval);
  eval->add_option("--model", flags.models, "Model file");

  add_common(ensemble);
  add_eval(ensemble);
  ensemble->add_option("--model", flags.models, "Member model file (repeatable)");

  add_common(study);
  add_training(study);
  add_eval(study);
  study->add_option("--sizes", flags.subsample_sizes, "Training subset sizes");
  study->add_option("--seeds", flags.seeds, "Replicate seeds (default 0 1 2)");

  check->add_option("files", check_files, "EMB1 files or manifests")->required();

  synth_cmd->add_option("--output", synth_out, "EMB1 path (sidecar manifest alongside)")->required();
  synth_cmd->add_option("--n", synth.n, "Rows");
  synth_cmd->add_option("--dim", synth.dim, "Dimension");
  synth_cmd->add_option("--separation", synth.separation, "Mean separation in standard deviations");
  synth_cmd->add_flag("--per-coordinate,!--along-axis", synth.per_coordinate,
                      "Apply the separation on every axis (default) or only the first");
  synth_cmd->add_option("--spoof-fraction", synth.spoof_fraction, "Fraction of spoof rows");
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->add_option("--source", synth.source, "Source name and id prefix");

  std::vector<const char*> argv = {"spoofcal"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    WriteErrorJson(err, ErrorKind::kUsage, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (*check) return CmdExtractCheck(check_files, out, err);
    if (*synth_cmd) {
      WriteEmbeddings(MakeGaussianClasses(synth), synth_out);
      return kExitOk;
    }

    // Config file first, explicit flags on top. Only flags of the active
    // subcommand are consulted.
    CLI::App* active = app.get_subcommands().front();
    ExperimentConfig c;
    if (!config_file.empty()) c = ConfigFromJson(nlohmann::json::parse(ReadFile(config_file)));
    auto given = [&](const char* name) {
      for (auto* o : active->get_options()) {
        if (o->check_lname(name) && o->count() > 0) return true;
      }
      return false;
    };
    if (given("output-dir")) c.output_dir = flags.output_dir;
    if (given("decision-threshold")) c.decision_threshold = flags.decision_threshold;
    if (given("eval")) c.eval_manifests = flags.eval_manifests;
    if (given("model")) c.models = flags.models;
    if (given("train")) c.train_manifest = flags.train_manifest;
    if (given("classifier")) c.classifier = flags.classifier;
    if (given("lambda")) c.train.lambda = flags.train.lambda;
    if (given("tol")) c.train.tol = flags.train.tol;
    if (given("max-iters")) c.train.max_iters = flags.train.max_iters;
    if (given("standardize") || given("no-standardize")) c.train.standardize = standardize;
    if (given("seed")) c.train.seed = flags.train.seed;
    if (given("hidden-size")) c.train.hidden_size = flags.train.hidden_size;
    if (given("step-size")) c.train.step_size = flags.train.step_size;
    if (given("momentum")) c.train.momentum = flags.train.momentum;
    if (given("batch-size")) c.train.batch_size = flags.train.batch_size;
    if (given("epochs")) c.train.epochs = flags.train.epochs;
    if (given("sizes")) c.subsample_sizes = flags.subsample_sizes;
    if (given("seeds")) c.seeds = flags.seeds;

    if (*train) CmdTrain(c, out);
    else if (*eval) CmdEval(c, out);
    else if (*ensemble) CmdEnsemble(c, out);
    else if (*study) CmdStudy(c, out);
    return kExitOk;
  } catch (const Error& e) {
    WriteErrorJson(err, e.kind(), ToString(e.code()), e.what());
    return ExitCodeFor(e.kind());
  } catch (const nlohmann::json::exception& e) {
    WriteErrorJson(err, ErrorKind::kUsage, "bad_config", e.what());
    return kExitUsage;
  }
}

}  // namespace spoofcal::cli
