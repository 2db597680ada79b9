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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "neurotalk/optim.hpp"

// Shared test-only helpers. Oracles stay independent of the library paths
// they check: plain scalar loops, no Graph, no shared kernels.

namespace nt_test {

using neurotalk::Rng;
using neurotalk::nn::GradMap;
using neurotalk::nn::ParameterStore;
using neurotalk::nn::Tensor;

inline Tensor random_tensor(std::vector<size_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

/// Central finite differences of a scalar loss with respect to every
/// parameter in the store. The loss function must be pure given the store.
inline GradMap finite_difference_grads(ParameterStore& store,
                                       const std::function<double()>& loss_fn,
                                       double step = 1e-5) {
  GradMap out;
  for (auto& [name, p] : store.params) {
    Tensor g = Tensor::zeros(p.shape);
    for (size_t i = 0; i < p.numel(); ++i) {
      const double keep = p.data[i];
      p.data[i] = keep + step;
      const double up = loss_fn();
      p.data[i] = keep - step;
      const double down = loss_fn();
      p.data[i] = keep;
      g.data[i] = (up - down) / (2.0 * step);
    }
    out[name] = std::move(g);
  }
  return out;
}

/// Max relative error between analytic and reference gradients, with an
/// absolute floor so near-zero entries do not blow up the ratio.
inline double max_rel_grad_error(const GradMap& analytic, const GradMap& reference,
                                 double abs_floor = 1e-6) {
  double worst = 0.0;
  for (const auto& [name, ga] : analytic) {
    const Tensor& gr = reference.at(name);
    for (size_t i = 0; i < ga.numel(); ++i) {
      const double denom = std::max({std::fabs(ga.data[i]), std::fabs(gr.data[i]), abs_floor});
      worst = std::max(worst, std::fabs(ga.data[i] - gr.data[i]) / denom);
    }
  }
  return worst;
}

}  // namespace nt_test
