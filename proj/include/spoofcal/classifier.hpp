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

// Back-end classifiers on frozen embeddings: L2-regularized logistic
// regression trained by full-batch gradient descent, and a one-hidden-layer
// ReLU network trained by momentum SGD. Both minimize mean cross-entropy on
// the spoof probability.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "spoofcal/dataset.hpp"
#include "spoofcal/error.hpp"
#include "spoofcal/util.hpp"

namespace spoofcal {

/// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon].
inline constexpr double kProbEpsilon = 1e-12;

struct TrainConfig {
  double lambda = 1e-4;
  double tol = 1e-7;
  std::size_t max_iters = 10000;
  bool standardize = true;
  std::uint64_t seed = 0;
  // MLP only. These are implementation defaults, not tuned values.
  std::size_t hidden_size = 256;
  double step_size = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and >= 0");
    }
    if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be > 0");
    if (max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "max_iters must be >= 1");
    if (hidden_size < 1) throw Error(ErrorCode::kInvalidArgument, "hidden_size must be >= 1");
    if (!(step_size > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step_size must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "momentum must be in [0, 1)");
    }
    if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
    if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  }
};

/// Per-dimension affine map x -> (x - mean) / stddev.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer Fit(const EmbeddingDataset& data) {
    const std::size_t d = data.dim();
    const double n = static_cast<double>(data.size());
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto r = data.row(i);
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
    }
    for (double& m : s.mean) m /= n;
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto r = data.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        const double c = r[j] - s.mean[j];
        s.stddev[j] += c * c;
      }
    }
    for (double& v : s.stddev) {
      v = std::sqrt(v / n);
      if (!(v > 0.0)) v = 1.0;  // constant column
    }
    return s;
  }

  void apply(std::span<const float> x, std::span<double> out) const {
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / stddev[j];
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

struct TrainMeta {
  std::uint64_t train_seed = 0;
  double lambda = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double final_loss = 0.0;
  double grad_norm = 0.0;  // infinity norm at return (logistic only)

  friend bool operator==(const TrainMeta&, const TrainMeta&) = default;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::optional<Standardizer> standardizer;
  TrainMeta meta;

  std::size_t dim() const noexcept { return weights.size(); }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// One hidden ReLU layer. layer1 is stored row-major as [input j][hidden h].
struct MlpModel {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
  std::optional<Standardizer> standardizer;
  TrainMeta meta;

  std::size_t dim() const noexcept { return input_dim; }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

using Model = std::variant<LinearModel, MlpModel>;

inline std::size_t ModelDim(const Model& m) {
  return std::visit([](const auto& x) { return x.dim(); }, m);
}

inline double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(t)) without overflow.
inline double Softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

/// Cross-entropy of label y in {0, 1} given logit z.
inline double LogitCrossEntropy(double z, std::uint8_t y) {
  return Softplus(y == kSpoof ? -z : z);
}

inline double ClampProbability(double p) {
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

namespace detail {

inline void RequireBothClasses(const EmbeddingDataset& train) {
  if (train.count(kBonafide) == 0 || train.count(kSpoof) == 0) {
    throw Error(ErrorCode::kSingleClass,
                "training data must contain both bonafide and spoof samples");
  }
}

inline void CheckDim(std::size_t model_dim, const EmbeddingDataset& data) {
  if (model_dim != data.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model expects D = " + std::to_string(model_dim) + ", data has D = " +
                    std::to_string(data.dim()));
  }
}

inline double InfNorm(std::span<const double> v, double extra) {
  double m = std::abs(extra);
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Logistic regression

/// Mean cross-entropy + (lambda / 2) ||w||^2, with w acting on standardized
/// features when `standardizer` is non-null. The bias is not penalized.
/// Fills the gradient when both output pointers are non-null.
inline double LogisticObjective(const EmbeddingDataset& data, const Standardizer* standardizer,
                                double lambda, std::span<const double> w, double b,
                                std::vector<double>* grad_w = nullptr,
                                double* grad_b = nullptr) {
  const std::size_t d = data.dim();
  // Fold the standardizer into effective raw-space weights.
  std::vector<double> v(w.begin(), w.end());
  double offset = b;
  if (standardizer != nullptr) {
    for (std::size_t j = 0; j < d; ++j) {
      v[j] = w[j] / standardizer->stddev[j];
      offset -= v[j] * standardizer->mean[j];
    }
  }
  const bool want_grad = grad_w != nullptr && grad_b != nullptr;
  std::vector<double> acc(want_grad ? d : 0, 0.0);
  double residual_sum = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto x = data.row(i);
    double z = offset;
    for (std::size_t j = 0; j < d; ++j) z += v[j] * x[j];
    const std::uint8_t y = data.labels()[i];
    loss += LogitCrossEntropy(z, y);
    if (want_grad) {
      const double r = Sigmoid(z) - static_cast<double>(y);
      residual_sum += r;
      for (std::size_t j = 0; j < d; ++j) acc[j] += r * x[j];
    }
  }
  const double n = static_cast<double>(data.size());
  double penalty = 0.0;
  for (double wj : w) penalty += wj * wj;
  loss = loss / n + 0.5 * lambda * penalty;
  if (want_grad) {
    grad_w->assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      double g = acc[j];
      if (standardizer != nullptr) {
        g = (g - standardizer->mean[j] * residual_sum) / standardizer->stddev[j];
      }
      (*grad_w)[j] = g / n + lambda * w[j];
    }
    *grad_b = residual_sum / n;
  }
  return loss;
}

/// Full-batch gradient descent with Armijo backtracking. Deterministic: the
/// same inputs give bit-identical weights.
inline LinearModel TrainLogistic(const EmbeddingDataset& train, const TrainConfig& config) {
  config.validate();
  detail::RequireBothClasses(train);

  LinearModel model;
  if (config.standardize) model.standardizer = Standardizer::Fit(train);
  const Standardizer* std_ptr = model.standardizer ? &*model.standardizer : nullptr;
  const std::size_t d = train.dim();

  std::vector<double> w(d, 0.0), gw, trial_w(d);
  double b = 0.0, gb = 0.0;
  double loss = LogisticObjective(train, std_ptr, config.lambda, w, b, &gw, &gb);
  if (!std::isfinite(loss)) throw Error(ErrorCode::kNonFiniteLoss, "initial loss is not finite");

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;
  double step = 1.0;
  std::size_t iter = 0;
  bool converged = false;
  for (; iter < config.max_iters; ++iter) {
    const double gnorm = detail::InfNorm(gw, gb);
    if (gnorm <= config.tol) {
      converged = true;
      break;
    }
    double gsq = gb * gb;
    for (double g : gw) gsq += g * g;

    bool accepted = false;
    double trial_loss = 0.0;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      for (std::size_t j = 0; j < d; ++j) trial_w[j] = w[j] - step * gw[j];
      const double trial_b = b - step * gb;
      trial_loss = LogisticObjective(train, std_ptr, config.lambda, trial_w, trial_b);
      if (std::isfinite(trial_loss) && trial_loss <= loss - kArmijo * step * gsq) {
        accepted = true;
        b = trial_b;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at machine precision
    w.swap(trial_w);
    loss = LogisticObjective(train, std_ptr, config.lambda, w, b, &gw, &gb);
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kNonFiniteLoss, "loss became non-finite at iteration " +
                                                 std::to_string(iter));
    }
    step *= 2.0;
  }
  const double gnorm = detail::InfNorm(gw, gb);
  if (!converged && gnorm <= config.tol) converged = true;

  model.weights = std::move(w);
  model.bias = b;
  model.meta = {config.seed, config.lambda, converged, iter, loss, gnorm};
  return model;
}

inline double Logit(const LinearModel& m, std::span<const float> x) {
  double z = m.bias;
  if (m.standardizer) {
    const auto& s = *m.standardizer;
    for (std::size_t j = 0; j < x.size(); ++j) {
      z += m.weights[j] * ((x[j] - s.mean[j]) / s.stddev[j]);
    }
  } else {
    for (std::size_t j = 0; j < x.size(); ++j) z += m.weights[j] * x[j];
  }
  return z;
}

// ---------------------------------------------------------------------------
// Two-layer perceptron

struct MlpGradient {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;
};

namespace detail {

/// Forward pass on an already standardized input. Fills pre-activations.
inline double MlpForward(const MlpModel& m, std::span<const double> x,
                         std::span<double> pre) {
  const std::size_t h = m.hidden;
  std::copy(m.b1.begin(), m.b1.end(), pre.begin());
  for (std::size_t j = 0; j < m.input_dim; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const double* row = &m.w1[j * h];
    for (std::size_t k = 0; k < h; ++k) pre[k] += xj * row[k];
  }
  double z = m.b2;
  for (std::size_t k = 0; k < h; ++k) z += m.w2[k] * std::max(pre[k], 0.0);
  return z;
}

inline void StandardizedRow(const MlpModel& m, std::span<const float> raw,
                            std::span<double> out) {
  if (m.standardizer) {
    m.standardizer->apply(raw, out);
  } else {
    std::copy(raw.begin(), raw.end(), out.begin());
  }
}

}  // namespace detail

inline double MlpLogit(const MlpModel& m, std::span<const float> x) {
  std::vector<double> xs(m.input_dim), pre(m.hidden);
  detail::StandardizedRow(m, x, xs);
  return detail::MlpForward(m, xs, pre);
}

/// Mean cross-entropy over `rows` + (lambda / 2)(||w1||^2 + ||w2||^2).
/// Fills `grad` when non-null.
inline double MlpObjective(const MlpModel& m, const EmbeddingDataset& data,
                           std::span<const std::size_t> rows, double lambda,
                           MlpGradient* grad = nullptr) {
  const std::size_t d = m.input_dim, h = m.hidden;
  std::vector<double> xs(d), pre(h);
  if (grad != nullptr) {
    grad->w1.assign(d * h, 0.0);
    grad->b1.assign(h, 0.0);
    grad->w2.assign(h, 0.0);
    grad->b2 = 0.0;
  }
  double loss = 0.0;
  for (std::size_t i : rows) {
    detail::StandardizedRow(m, data.row(i), xs);
    const double z = detail::MlpForward(m, xs, pre);
    const std::uint8_t y = data.labels()[i];
    loss += LogitCrossEntropy(z, y);
    if (grad == nullptr) continue;
    const double dz = Sigmoid(z) - static_cast<double>(y);
    grad->b2 += dz;
    for (std::size_t k = 0; k < h; ++k) {
      if (pre[k] <= 0.0) continue;
      grad->w2[k] += dz * pre[k];
      const double dpre = dz * m.w2[k];
      grad->b1[k] += dpre;
      for (std::size_t j = 0; j < d; ++j) grad->w1[j * h + k] += dpre * xs[j];
    }
  }
  const double n = static_cast<double>(rows.size());
  double penalty = 0.0;
  for (double v : m.w1) penalty += v * v;
  for (double v : m.w2) penalty += v * v;
  loss = loss / n + 0.5 * lambda * penalty;
  if (grad != nullptr) {
    for (std::size_t t = 0; t < grad->w1.size(); ++t) grad->w1[t] = grad->w1[t] / n + lambda * m.w1[t];
    for (std::size_t k = 0; k < h; ++k) {
      grad->b1[k] /= n;
      grad->w2[k] = grad->w2[k] / n + lambda * m.w2[k];
    }
    grad->b2 /= n;
  }
  return loss;
}

/// Mini-batch SGD with momentum. Initialization and shuffling derive from
/// config.seed only.
inline MlpModel TrainMlp(const EmbeddingDataset& train, const TrainConfig& config) {
  config.validate();
  detail::RequireBothClasses(train);
  const std::size_t d = train.dim(), h = config.hidden_size;

  MlpModel m;
  m.input_dim = d;
  m.hidden = h;
  if (config.standardize) m.standardizer = Standardizer::Fit(train);
  rng::Engine gen(config.seed);
  const double a1 = std::sqrt(6.0 / static_cast<double>(d));
  const double a2 = std::sqrt(6.0 / static_cast<double>(h + 1));
  m.w1.resize(d * h);
  for (double& v : m.w1) v = (2.0 * rng::Uniform(gen) - 1.0) * a1;
  m.b1.assign(h, 0.0);
  m.w2.resize(h);
  for (double& v : m.w2) v = (2.0 * rng::Uniform(gen) - 1.0) * a2;
  m.b2 = 0.0;

  MlpGradient g, vel{std::vector<double>(d * h, 0.0), std::vector<double>(h, 0.0),
                     std::vector<double>(h, 0.0), 0.0};
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double mu = config.momentum, eta = config.step_size;
  std::size_t steps = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng::Shuffle(order, gen);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      const double loss = MlpObjective(m, train, batch, config.lambda, &g);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    "MLP loss became non-finite in epoch " + std::to_string(epoch));
      }
      for (std::size_t t = 0; t < m.w1.size(); ++t) {
        vel.w1[t] = mu * vel.w1[t] - eta * g.w1[t];
        m.w1[t] += vel.w1[t];
      }
      for (std::size_t k = 0; k < h; ++k) {
        vel.b1[k] = mu * vel.b1[k] - eta * g.b1[k];
        m.b1[k] += vel.b1[k];
        vel.w2[k] = mu * vel.w2[k] - eta * g.w2[k];
        m.w2[k] += vel.w2[k];
      }
      vel.b2 = mu * vel.b2 - eta * g.b2;
      m.b2 += vel.b2;
      ++steps;
    }
  }
  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double final_loss = MlpObjective(m, train, all, config.lambda);
  if (!std::isfinite(final_loss)) {
    throw Error(ErrorCode::kNonFiniteLoss, "MLP final loss is not finite");
  }
  m.meta = {config.seed, config.lambda, true, steps, final_loss, 0.0};
  return m;
}

// ---------------------------------------------------------------------------
// Prediction

/// P(spoof) per row, clamped to [1e-12, 1 - 1e-12].
inline std::vector<double> PredictProba(const Model& model, const EmbeddingDataset& data) {
  detail::CheckDim(ModelDim(model), data);
  std::vector<double> out(data.size());
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          for (std::size_t i = 0; i < data.size(); ++i) {
            out[i] = ClampProbability(Sigmoid(Logit(m, data.row(i))));
          }
        } else {
          std::vector<double> xs(m.input_dim), pre(m.hidden);
          for (std::size_t i = 0; i < data.size(); ++i) {
            detail::StandardizedRow(m, data.row(i), xs);
            out[i] = ClampProbability(Sigmoid(detail::MlpForward(m, xs, pre)));
          }
        }
      },
      model);
  return out;
}

/// Arithmetic mean of the members' probabilities.
inline std::vector<double> EnsemblePredict(std::span<const Model> models,
                                           const EmbeddingDataset& data) {
  if (models.empty()) throw Error(ErrorCode::kEmptyInput, "ensemble has no members");
  std::vector<double> sum(data.size(), 0.0);
  for (const auto& m : models) {
    const auto p = PredictProba(m, data);
    for (std::size_t i = 0; i < p.size(); ++i) sum[i] += p[i];
  }
  const double k = static_cast<double>(models.size());
  for (double& s : sum) s /= k;
  return sum;
}

// ---------------------------------------------------------------------------
// Serialization. Reals are written as JSON strings holding the shortest
// decimal that round-trips, so reloading is bit-exact.

namespace detail {

inline nlohmann::ordered_json RealArray(std::span<const double> v) {
  auto a = nlohmann::ordered_json::array();
  for (double x : v) a.push_back(FormatDouble(x));
  return a;
}

inline double RealFromJson(const nlohmann::json& j) {
  if (j.is_string()) return ParseDouble(j.get<std::string>());
  if (j.is_number()) return j.get<double>();
  throw Error(ErrorCode::kBadModel, "expected a real number");
}

inline std::vector<double> RealArrayFromJson(const nlohmann::json& j, std::size_t expected,
                                             const char* field) {
  if (!j.is_array() || j.size() != expected) {
    throw Error(ErrorCode::kBadModel, std::string("field '") + field + "' must hold " +
                                          std::to_string(expected) + " values");
  }
  std::vector<double> v;
  v.reserve(expected);
  for (const auto& e : j) {
    const double x = RealFromJson(e);
    if (!std::isfinite(x)) throw Error(ErrorCode::kBadModel, std::string("non-finite value in ") + field);
    v.push_back(x);
  }
  return v;
}

inline nlohmann::ordered_json StandardizerJson(const std::optional<Standardizer>& s) {
  if (!s) return nullptr;
  return {{"mean", RealArray(s->mean)}, {"std", RealArray(s->stddev)}};
}

inline std::optional<Standardizer> StandardizerFromJson(const nlohmann::json& j, std::size_t d) {
  if (j.is_null()) return std::nullopt;
  Standardizer s{RealArrayFromJson(j.at("mean"), d, "standardizer.mean"),
                 RealArrayFromJson(j.at("std"), d, "standardizer.std")};
  for (double v : s.stddev) {
    if (!(v > 0.0)) throw Error(ErrorCode::kBadModel, "standardizer std must be > 0");
  }
  return s;
}

inline nlohmann::ordered_json MetaJson(const TrainMeta& m) {
  return {{"train_seed", m.train_seed},
          {"lambda", FormatDouble(m.lambda)},
          {"converged", m.converged},
          {"iterations", m.iterations},
          {"final_loss", FormatDouble(m.final_loss)},
          {"grad_norm", FormatDouble(m.grad_norm)}};
}

inline TrainMeta MetaFromJson(const nlohmann::json& j) {
  TrainMeta m;
  m.train_seed = j.at("train_seed").get<std::uint64_t>();
  m.lambda = RealFromJson(j.at("lambda"));
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.final_loss = RealFromJson(j.at("final_loss"));
  m.grad_norm = RealFromJson(j.value("grad_norm", nlohmann::json("0")));
  return m;
}

}  // namespace detail

inline nlohmann::ordered_json ToJson(const Model& model) {
  return std::visit(
      [](const auto& m) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return {{"type", "logistic"},
                  {"dim", m.dim()},
                  {"weights", detail::RealArray(m.weights)},
                  {"bias", FormatDouble(m.bias)},
                  {"standardizer", detail::StandardizerJson(m.standardizer)},
                  {"meta", detail::MetaJson(m.meta)}};
        } else {
          return {{"type", "mlp"},
                  {"dim", m.input_dim},
                  {"hidden", m.hidden},
                  {"layer1_weights", detail::RealArray(m.w1)},
                  {"layer1_bias", detail::RealArray(m.b1)},
                  {"layer2_weights", detail::RealArray(m.w2)},
                  {"layer2_bias", FormatDouble(m.b2)},
                  {"activation", "relu"},
                  {"standardizer", detail::StandardizerJson(m.standardizer)},
                  {"meta", detail::MetaJson(m.meta)}};
        }
      },
      model);
}

inline Model ModelFromJson(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    const std::size_t d = j.at("dim").get<std::size_t>();
    if (d == 0) throw Error(ErrorCode::kBadModel, "model dim must be >= 1");
    if (type == "logistic") {
      LinearModel m;
      m.weights = detail::RealArrayFromJson(j.at("weights"), d, "weights");
      m.bias = detail::RealFromJson(j.at("bias"));
      m.standardizer = detail::StandardizerFromJson(j.at("standardizer"), d);
      m.meta = detail::MetaFromJson(j.at("meta"));
      return m;
    }
    if (type == "mlp") {
      MlpModel m;
      m.input_dim = d;
      m.hidden = j.at("hidden").get<std::size_t>();
      if (m.hidden == 0) throw Error(ErrorCode::kBadModel, "hidden size must be >= 1");
      m.w1 = detail::RealArrayFromJson(j.at("layer1_weights"), d * m.hidden, "layer1_weights");
      m.b1 = detail::RealArrayFromJson(j.at("layer1_bias"), m.hidden, "layer1_bias");
      m.w2 = detail::RealArrayFromJson(j.at("layer2_weights"), m.hidden, "layer2_weights");
      m.b2 = detail::RealFromJson(j.at("layer2_bias"));
      m.standardizer = detail::StandardizerFromJson(j.at("standardizer"), d);
      m.meta = detail::MetaFromJson(j.at("meta"));
      return m;
    }
    throw Error(ErrorCode::kBadModel, "unknown model type '" + type + "'");
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kBadModel, std::string("malformed model file: ") + ex.what());
  }
}

inline void SaveModel(const std::filesystem::path& path, const Model& model) {
  WriteFileAtomic(path, ToJson(model).dump(2) + "\n");
}

inline Model LoadModel(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kBadModel, path.string() + ": " + ex.what());
  }
  return ModelFromJson(j);
}

}  // namespace spoofcal
