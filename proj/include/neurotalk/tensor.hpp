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

#include <cstddef>
#include <string>
#include <vector>

#include "neurotalk/common.hpp"

namespace neurotalk::nn {

/// Dense row-major tensor of doubles. Values are plain data; gradient
/// tracking lives in Graph, not here.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (numel_of(shape) != data.size())
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
  }

  static size_t numel_of(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t e : s) n *= e;
    return n;
  }

  static std::string shape_str(const std::vector<size_t>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(s[i]);
    }
    return out + "]";
  }

  static Tensor zeros(std::vector<size_t> s) {
    size_t n = numel_of(s);
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
  }

  static Tensor full(std::vector<size_t> s, double v) {
    size_t n = numel_of(s);
    return Tensor(std::move(s), std::vector<double>(n, v));
  }

  static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }

  /// 2-D identity.
  static Tensor eye(size_t n) {
    Tensor t = zeros({n, n});
    for (size_t i = 0; i < n; ++i) t.data[i * n + i] = 1.0;
    return t;
  }

  size_t numel() const { return data.size(); }
  size_t rank() const { return shape.size(); }

  size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(size_t r, size_t c) { return data[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data[r * cols() + c]; }

  std::string shape_str() const { return shape_str(shape); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

// Raw (non-recorded) kernels shared by forward ops, gradient rules and the
// optimizer. All expect 2-D operands unless noted.

/// c = a(m,k) * b(k,n)
Tensor matmul(const Tensor& a, const Tensor& b);

/// c += a(m,k) * b(k,n), accumulating in place.
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& c);

/// c += a^T(m,k) * b(m,n) -> (k,n)
void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& c);

/// c += a(m,k) * b^T(n,k) -> (m,n)
void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& c);

Tensor transpose(const Tensor& a);

/// Fills with uniform(-r, r), r = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(size_t fan_in, size_t fan_out, Rng& rng);

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace neurotalk::nn
