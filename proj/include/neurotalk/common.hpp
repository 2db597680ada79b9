// Copyright 2026 The Neurotalk Authors
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
#include <stdexcept>
#include <string>
#include <vector>

namespace neurotalk {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Tensor/matrix extents disagree.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Invalid user-supplied configuration (filter cutoffs, unknown ids, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// API used out of order (backward twice, untrained model, ...).
class StateError : public Error {
public:
  using Error::Error;
};

/// Non-finite values or numerically infeasible request.
class NumericError : public Error {
public:
  using Error::Error;
};

/// File read/write failures and malformed containers.
class IoError : public Error {
public:
  using Error::Error;
};

/// Pipeline stage invoked before its prerequisite artifact exists.
class PrerequisiteError : public Error {
public:
  using Error::Error;
};

/// Deterministic random source. All randomness in the project flows through
/// this class; identical seeds give bit-identical streams on every platform
/// (mt19937_64 output mapped to doubles without library distributions).
class Rng {
public:
  explicit Rng(uint64_t seed) : s_(seed == 0 ? 0x9e3779b97f4a7c15ull : seed) {
    // splitmix64 warm-up so nearby seeds decorrelate
    for (int i = 0; i < 4; ++i) next();
  }

  uint64_t next() {
    // xorshift* variant; fixed algorithm, never changes across versions
    s_ ^= s_ >> 12;
    s_ ^= s_ << 25;
    s_ ^= s_ >> 27;
    return s_ * 0x2545f4914f6cdd1dull;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (deterministic, no cached spare).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Uniform integer in [0, n).
  size_t below(size_t n) { return n == 0 ? 0 : static_cast<size_t>(next() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  uint64_t s_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace neurotalk
