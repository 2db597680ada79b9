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

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "neurotalk/tensor.hpp"

namespace neurotalk::nn {

using Var = int;
using GradMap = std::map<std::string, Tensor>;

/// Reverse-mode autodiff tape. Ops append nodes in execution order, which is
/// already a topological order, so backward() is a single reverse sweep that
/// visits each reached node exactly once. One tape serves one forward/backward
/// pass; build a fresh Graph per training step.
class Graph {
public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf value, not associated with any trainable parameter.
  Var leaf(Tensor value);

  /// Leaf tied to a parameter name; backward() reports its gradient.
  Var param(const std::string& name, const Tensor& value);

  const Tensor& value(Var v) const { return nodes_[static_cast<size_t>(v)].value; }
  size_t size() const { return nodes_.size(); }

  /// Gradient of the last backward() at v, or nullptr if v was not reached.
  const Tensor* grad_of(Var v) const;

  /// Runs the reverse sweep from a scalar loss. Returns gradients for every
  /// registered parameter; parameters the loss does not reach get zeros.
  /// Calling twice on one tape is a state error.
  GradMap backward(Var loss);

  // ---- primitive ops ------------------------------------------------------

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);             // same shape
  Var add_rowvec(Var a, Var b);      // a:(m,n) + b:(1,n) broadcast over rows
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);             // elementwise
  Var affine(Var a, double alpha, double beta);  // alpha*a + beta
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var sqrt(Var a);
  Var log_clamped(Var a, double floor);  // log(max(x, floor)); zero grad below floor
  Var softmax_rows(Var a);
  Var log_softmax_rows(Var a);       // rows = last dimension for any rank
  Var rows(Var a, size_t r0, size_t r1);
  Var cols(Var a, size_t c0, size_t c1);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(Var a, Var b);
  Var transpose(Var a);
  Var reshape(Var a, std::vector<size_t> shape);
  Var sum_all(Var a);                // -> (1,1)
  Var mean_all(Var a);               // -> (1,1)

  /// Mean negative log-likelihood: -(1/m) sum_i lp[i, target_i].
  Var nll_mean(Var log_probs, const std::vector<int>& targets);

  /// c[t,u,:] = a[t,:] + b[u,:]  with a:(T,A), b:(U,A) -> (T,U,A).
  Var pairwise_sum(Var a, Var b);

  /// Alignment-marginalized sequence losses. Both take log-probabilities
  /// (last dim = classes incl. blank) and run the standard log-space forward
  /// lattice; the backward rule is the matching alpha-beta recursion.
  Var ctc_loss(Var log_probs, const std::vector<int>& labels, int blank);
  Var rnnt_loss(Var log_probs, const std::vector<int>& labels, int blank);

private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool has_grad = false;
    std::function<void(Graph&, int)> backward_fn;  // null for leaves
  };

  Var push(Tensor value, std::function<void(Graph&, int)> backward_fn);
  Tensor& grad_buf(Var v);
  Node& node(Var v) { return nodes_[static_cast<size_t>(v)]; }

  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, Var>> params_;
  bool backward_done_ = false;
};

/// log(exp(a) + exp(b)) tolerating -inf.
double log_add_exp(double a, double b);

}  // namespace neurotalk::nn
