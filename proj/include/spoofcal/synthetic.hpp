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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "spoofcal/dataset.hpp"
#include "spoofcal/util.hpp"

namespace spoofcal {

/// Two isotropic unit-variance Gaussian classes. Class means sit at
/// -separation/2 (bonafide) and +separation/2 (spoof). With per_coordinate
/// set the offset applies on every axis; otherwise only along the first
/// axis, so `separation` is then the Euclidean distance between the means.
struct GaussianClassesOptions {
  std::size_t n = 2000;
  std::size_t dim = 16;
  double separation = 4.0;
  bool per_coordinate = true;
  double spoof_fraction = 0.5;
  std::uint64_t seed = 0;
  std::string source = "synthetic";
};

inline EmbeddingDataset MakeGaussianClasses(const GaussianClassesOptions& opt) {
  if (opt.n < 1 || opt.dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic data needs n >= 1 and dim >= 1");
  }
  if (!(opt.spoof_fraction >= 0.0 && opt.spoof_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "spoof_fraction must be in [0, 1]");
  }
  rng::Engine gen(opt.seed);
  const auto n_spoof = static_cast<std::size_t>(
      std::llround(opt.spoof_fraction * static_cast<double>(opt.n)));
  std::vector<std::uint8_t> labels(opt.n, kBonafide);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_spoof), kSpoof);
  rng::Shuffle(labels, gen);

  std::vector<float> feats(opt.n * opt.dim);
  std::vector<std::string> ids(opt.n);
  const double half = 0.5 * opt.separation;
  for (std::size_t i = 0; i < opt.n; ++i) {
    const double sign = labels[i] == kSpoof ? 1.0 : -1.0;
    for (std::size_t j = 0; j < opt.dim; ++j) {
      const double offset = (opt.per_coordinate || j == 0) ? sign * half : 0.0;
      feats[i * opt.dim + j] = static_cast<float>(offset + rng::Normal(gen));
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06zu", i);
    ids[i] = opt.source + "-" + buf;
  }
  return EmbeddingDataset(std::move(ids), std::move(feats), opt.dim, std::move(labels),
                          opt.source);
}

}  // namespace spoofcal
