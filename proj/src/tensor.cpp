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

#include "neurotalk/tensor.hpp"

namespace neurotalk::nn {

static void check_matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0])
    throw ShapeError("matmul: incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_matmul(a, b);
  Tensor c = Tensor::zeros({a.shape[0], b.shape[1]});
  matmul_acc(a, b, c);
  return c;
}

// i-k-j loop order keeps the inner loop contiguous in both b and c.
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  check_matmul(a, b);
  const size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  const double* ap = a.data.data();
  const double* bp = b.data.data();
  double* cp = c.data.data();
  for (size_t i = 0; i < m; ++i) {
    for (size_t p = 0; p < k; ++p) {
      const double av = ap[i * k + p];
      if (av == 0.0) continue;
      const double* brow = bp + p * n;
      double* crow = cp + i * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  // (k,n) += a^T (k,m) * b (m,n) with a stored (m,k)
  const size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  if (b.shape[0] != m || c.shape[0] != k || c.shape[1] != n)
    throw ShapeError("matmul_tn: incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
  const double* ap = a.data.data();
  const double* bp = b.data.data();
  double* cp = c.data.data();
  for (size_t i = 0; i < m; ++i) {
    const double* arow = ap + i * k;
    const double* brow = bp + i * n;
    for (size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = cp + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  // (m,n) += a (m,k) * b^T with b stored (n,k)
  const size_t m = a.shape[0], k = a.shape[1], n = b.shape[0];
  if (b.shape[1] != k || c.shape[0] != m || c.shape[1] != n)
    throw ShapeError("matmul_nt: incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
  const double* ap = a.data.data();
  const double* bp = b.data.data();
  double* cp = c.data.data();
  for (size_t i = 0; i < m; ++i) {
    const double* arow = ap + i * k;
    double* crow = cp + i * n;
    for (size_t j = 0; j < n; ++j) {
      const double* brow = bp + j * k;
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose: expected 2-D, got " + a.shape_str());
  Tensor t = Tensor::zeros({a.shape[1], a.shape[0]});
  for (size_t i = 0; i < a.shape[0]; ++i)
    for (size_t j = 0; j < a.shape[1]; ++j) t.data[j * a.shape[0] + i] = a.data[i * a.shape[1] + j];
  return t;
}

Tensor glorot_uniform(size_t fan_in, size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t = Tensor::zeros({fan_in, fan_out});
  for (double& v : t.data) v = rng.uniform(-r, r);
  return t;
}

}  // namespace neurotalk::nn
