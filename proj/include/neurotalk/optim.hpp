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

#include <map>
#include <string>

#include "neurotalk/graph.hpp"
#include "neurotalk/tensor.hpp"

namespace neurotalk::nn {

/// Named trainable tensors plus optimizer state; the unit of checkpointing.
/// std::map keys give a fixed iteration order, so updates are deterministic.
struct ParameterStore {
  std::map<std::string, Tensor> params;
  std::map<std::string, Tensor> adam_m;
  std::map<std::string, Tensor> adam_v;
  uint64_t step = 0;

  Tensor& add(const std::string& name, Tensor t) {
    auto [it, inserted] = params.emplace(name, std::move(t));
    if (!inserted) throw StateError("parameter already registered: " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return params.count(name) != 0; }

  const Tensor& at(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw StateError("unknown parameter: " + name);
    return it->second;
  }
};

/// Puts a stored parameter on a tape.
inline Var lease(Graph& g, const ParameterStore& store, const std::string& name) {
  return g.param(name, store.at(name));
}

/// Bias-corrected Adam update in place; grads may cover a subset of names.
void adam_step(ParameterStore& store, const GradMap& grads, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

void sgd_step(ParameterStore& store, const GradMap& grads, double lr);

/// Scales all gradients so the global L2 norm is at most max_norm.
/// Returns the pre-clip norm.
double clip_global_norm(GradMap& grads, double max_norm);

}  // namespace neurotalk::nn
