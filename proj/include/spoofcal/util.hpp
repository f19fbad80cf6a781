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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spoofcal/error.hpp"

namespace spoofcal {

// Random helpers built only on the bit stream of std::mt19937_64, whose output
// is fixed by the standard. The library distributions are not, so results
// would otherwise differ between standard library implementations.
namespace rng {

using Engine = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double Uniform(Engine& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound), bound > 0, without modulo bias.
inline std::uint64_t Below(Engine& gen, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = gen();
  } while (v >= limit);
  return v % bound;
}

/// Standard normal via Box-Muller (one draw per call, the cosine branch).
inline double Normal(Engine& gen) {
  double u1;
  do {
    u1 = Uniform(gen);
  } while (u1 <= 0.0);
  const double u2 = Uniform(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

template <typename T>
void Shuffle(std::vector<T>& v, Engine& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(Below(gen, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace rng

/// Shortest decimal string that parses back to exactly `v`.
inline std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double ParseDouble(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kBadModel,
                "cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

/// Writes `content` to a sibling temp file and renames it over `path`, so
/// readers never observe a partially written file.
inline void WriteFileAtomic(const std::filesystem::path& path,
                            std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "rename to " + path.string() + " failed: " +
                                    ec.message());
  }
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Population standard deviation (divides by n).
inline double StdDev(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace spoofcal
