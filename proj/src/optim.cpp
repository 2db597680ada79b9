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

#include "neurotalk/optim.hpp"

#include <cmath>

namespace neurotalk::nn {

void adam_step(ParameterStore& store, const GradMap& grads, double lr, double beta1, double beta2,
               double eps) {
  store.step += 1;
  const double t = static_cast<double>(store.step);
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (const auto& [name, g] : grads) {
    auto it = store.params.find(name);
    if (it == store.params.end()) throw StateError("adam_step: unknown parameter " + name);
    Tensor& p = it->second;
    check_same_shape(p, g, "adam_step");
    Tensor& m = store.adam_m.emplace(name, Tensor::zeros(p.shape)).first->second;
    Tensor& v = store.adam_v.emplace(name, Tensor::zeros(p.shape)).first->second;
    for (size_t i = 0; i < p.numel(); ++i) {
      m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g.data[i];
      v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      p.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

void sgd_step(ParameterStore& store, const GradMap& grads, double lr) {
  store.step += 1;
  for (const auto& [name, g] : grads) {
    auto it = store.params.find(name);
    if (it == store.params.end()) throw StateError("sgd_step: unknown parameter " + name);
    Tensor& p = it->second;
    check_same_shape(p, g, "sgd_step");
    for (size_t i = 0; i < p.numel(); ++i) p.data[i] -= lr * g.data[i];
  }
}

double clip_global_norm(GradMap& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.data) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& [name, g] : grads)
      for (double& v : g.data) v *= scale;
  }
  return norm;
}

}  // namespace neurotalk::nn
