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

#include "neurotalk/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace neurotalk::nn {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

Var Graph::push(Tensor value, std::function<void(Graph&, int)> backward_fn) {
  nodes_.push_back(Node{std::move(value), Tensor{}, false, std::move(backward_fn)});
  return static_cast<Var>(nodes_.size() - 1);
}

Tensor& Graph::grad_buf(Var v) {
  Node& n = node(v);
  if (!n.has_grad) {
    n.grad = Tensor::zeros(n.value.shape);
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor* Graph::grad_of(Var v) const {
  const Node& n = nodes_[static_cast<size_t>(v)];
  return n.has_grad ? &n.grad : nullptr;
}

Var Graph::leaf(Tensor value) { return push(std::move(value), nullptr); }

// Re-leasing a name returns the existing node, so a parameter used through
// several forward paths accumulates one summed gradient.
Var Graph::param(const std::string& name, const Tensor& value) {
  for (const auto& [n, v] : params_)
    if (n == name) return v;
  Var v = leaf(value);
  params_.emplace_back(name, v);
  return v;
}

GradMap Graph::backward(Var loss) {
  if (backward_done_) throw StateError("backward already ran on this tape");
  backward_done_ = true;
  const Tensor& lv = value(loss);
  if (lv.numel() != 1) throw ShapeError("backward: loss must be scalar, got " + lv.shape_str());
  grad_buf(loss).data[0] = 1.0;
  for (int i = loss; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.has_grad && n.backward_fn) n.backward_fn(*this, i);
  }
  GradMap out;
  for (const auto& [name, v] : params_) {
    const Node& n = nodes_[static_cast<size_t>(v)];
    out[name] = n.has_grad ? n.grad : Tensor::zeros(n.value.shape);
  }
  return out;
}

// ---- elementwise helpers ----------------------------------------------------

Var Graph::add(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  check_same_shape(av, bv, "add");
  Tensor out = av;
  for (size_t i = 0; i < out.numel(); ++i) out.data[i] += bv.data[i];
  return push(std::move(out), [a, b](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    Tensor& da = g.grad_buf(a);
    Tensor& db = g.grad_buf(b);
    for (size_t i = 0; i < d.numel(); ++i) {
      da.data[i] += d.data[i];
      db.data[i] += d.data[i];
    }
  });
}

Var Graph::add_rowvec(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  const size_t n = av.cols();
  if (bv.rank() != 2 || bv.shape[0] != 1 || bv.shape[1] != n)
    throw ShapeError("add_rowvec: " + av.shape_str() + " vs " + bv.shape_str());
  Tensor out = av;
  const size_t m = av.rows();
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) out.data[i * n + j] += bv.data[j];
  return push(std::move(out), [a, b, m, n](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    Tensor& da = g.grad_buf(a);
    Tensor& db = g.grad_buf(b);
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < n; ++j) {
        da.data[i * n + j] += d.data[i * n + j];
        db.data[j] += d.data[i * n + j];
      }
  });
}

Var Graph::sub(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  check_same_shape(av, bv, "sub");
  Tensor out = av;
  for (size_t i = 0; i < out.numel(); ++i) out.data[i] -= bv.data[i];
  return push(std::move(out), [a, b](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    Tensor& da = g.grad_buf(a);
    Tensor& db = g.grad_buf(b);
    for (size_t i = 0; i < d.numel(); ++i) {
      da.data[i] += d.data[i];
      db.data[i] -= d.data[i];
    }
  });
}

Var Graph::mul(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  check_same_shape(av, bv, "mul");
  Tensor out = av;
  for (size_t i = 0; i < out.numel(); ++i) out.data[i] *= bv.data[i];
  return push(std::move(out), [a, b](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    const Tensor& av2 = g.value(a);
    const Tensor& bv2 = g.value(b);
    Tensor& da = g.grad_buf(a);
    Tensor& db = g.grad_buf(b);
    for (size_t i = 0; i < d.numel(); ++i) {
      da.data[i] += d.data[i] * bv2.data[i];
      db.data[i] += d.data[i] * av2.data[i];
    }
  });
}

Var Graph::affine(Var a, double alpha, double beta) {
  Tensor out = value(a);
  for (double& v : out.data) v = alpha * v + beta;
  return push(std::move(out), [a, alpha](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < d.numel(); ++i) da.data[i] += alpha * d.data[i];
  });
}

Var Graph::sigmoid(Var a) {
  Tensor out = value(a);
  for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(out), [a](Graph& g, int self) {
    const Node& n = g.node(self);
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < n.value.numel(); ++i) {
      double y = n.value.data[i];
      da.data[i] += n.grad.data[i] * y * (1.0 - y);
    }
  });
}

Var Graph::tanh(Var a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::tanh(v);
  return push(std::move(out), [a](Graph& g, int self) {
    const Node& n = g.node(self);
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < n.value.numel(); ++i) {
      double y = n.value.data[i];
      da.data[i] += n.grad.data[i] * (1.0 - y * y);
    }
  });
}

Var Graph::exp(Var a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::exp(v);
  return push(std::move(out), [a](Graph& g, int self) {
    const Node& n = g.node(self);
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < n.value.numel(); ++i) da.data[i] += n.grad.data[i] * n.value.data[i];
  });
}

Var Graph::sqrt(Var a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::sqrt(v);
  return push(std::move(out), [a](Graph& g, int self) {
    const Node& n = g.node(self);
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < n.value.numel(); ++i)
      da.data[i] += n.grad.data[i] * 0.5 / std::max(n.value.data[i], 1e-150);
  });
}

Var Graph::log_clamped(Var a, double floor) {
  const Tensor& av = value(a);
  Tensor out = av;
  for (double& v : out.data) v = std::log(std::max(v, floor));
  return push(std::move(out), [a, floor](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    const Tensor& av2 = g.value(a);
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < d.numel(); ++i)
      if (av2.data[i] > floor) da.data[i] += d.data[i] / av2.data[i];
  });
}

// ---- softmax family ---------------------------------------------------------

Var Graph::softmax_rows(Var a) {
  const Tensor& av = value(a);
  if (!av.all_finite()) throw NumericError("softmax: non-finite input");
  const size_t n = av.shape.back();
  const size_t m = av.numel() / n;
  Tensor out = av;
  for (size_t i = 0; i < m; ++i) {
    double* row = out.data.data() + i * n;
    double mx = row[0];
    for (size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double s = 0.0;
    for (size_t j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      s += row[j];
    }
    for (size_t j = 0; j < n; ++j) row[j] /= s;
  }
  return push(std::move(out), [a, m, n](Graph& g, int self) {
    const Node& nd = g.node(self);
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < m; ++i) {
      const double* y = nd.value.data.data() + i * n;
      const double* dy = nd.grad.data.data() + i * n;
      double dot = 0.0;
      for (size_t j = 0; j < n; ++j) dot += dy[j] * y[j];
      for (size_t j = 0; j < n; ++j) da.data[i * n + j] += y[j] * (dy[j] - dot);
    }
  });
}

Var Graph::log_softmax_rows(Var a) {
  const Tensor& av = value(a);
  if (!av.all_finite()) throw NumericError("log_softmax: non-finite input");
  const size_t n = av.shape.back();
  const size_t m = av.numel() / n;
  Tensor out = av;
  for (size_t i = 0; i < m; ++i) {
    double* row = out.data.data() + i * n;
    double mx = row[0];
    for (size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double s = 0.0;
    for (size_t j = 0; j < n; ++j) s += std::exp(row[j] - mx);
    double lse = mx + std::log(s);
    for (size_t j = 0; j < n; ++j) row[j] -= lse;
  }
  return push(std::move(out), [a, m, n](Graph& g, int self) {
    const Node& nd = g.node(self);
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < m; ++i) {
      const double* y = nd.value.data.data() + i * n;
      const double* dy = nd.grad.data.data() + i * n;
      double s = 0.0;
      for (size_t j = 0; j < n; ++j) s += dy[j];
      for (size_t j = 0; j < n; ++j) da.data[i * n + j] += dy[j] - std::exp(y[j]) * s;
    }
  });
}

// ---- structure ops ----------------------------------------------------------

Var Graph::matmul(Var a, Var b) {
  Tensor out = nn::matmul(value(a), value(b));
  return push(std::move(out), [a, b](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    matmul_nt_acc(d, g.value(b), g.grad_buf(a));  // dA += dC * B^T
    matmul_tn_acc(g.value(a), d, g.grad_buf(b));  // dB += A^T * dC
  });
}

Var Graph::rows(Var a, size_t r0, size_t r1) {
  const Tensor& av = value(a);
  const size_t n = av.cols();
  if (av.rank() != 2 || r1 > av.rows() || r0 >= r1)
    throw ShapeError("rows: bad range on " + av.shape_str());
  Tensor out({r1 - r0, n}, std::vector<double>(av.data.begin() + static_cast<long>(r0 * n),
                                               av.data.begin() + static_cast<long>(r1 * n)));
  return push(std::move(out), [a, r0, n](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < d.numel(); ++i) da.data[r0 * n + i] += d.data[i];
  });
}

Var Graph::cols(Var a, size_t c0, size_t c1) {
  const Tensor& av = value(a);
  if (av.rank() != 2 || c1 > av.cols() || c0 >= c1)
    throw ShapeError("cols: bad range on " + av.shape_str());
  const size_t m = av.rows(), n = av.cols(), w = c1 - c0;
  Tensor out = Tensor::zeros({m, w});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < w; ++j) out.data[i * w + j] = av.data[i * n + c0 + j];
  return push(std::move(out), [a, c0, m, n, w](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < w; ++j) da.data[i * n + c0 + j] += d.data[i * w + j];
  });
}

Var Graph::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: empty");
  const size_t n = value(parts[0]).cols();
  size_t m = 0;
  for (Var p : parts) {
    if (value(p).cols() != n)
      throw ShapeError("concat_rows: column mismatch " + value(p).shape_str());
    m += value(p).rows();
  }
  Tensor out = Tensor::zeros({m, n});
  size_t off = 0;
  for (Var p : parts) {
    const Tensor& pv = value(p);
    std::copy(pv.data.begin(), pv.data.end(), out.data.begin() + static_cast<long>(off));
    off += pv.numel();
  }
  return push(std::move(out), [parts](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    size_t off = 0;
    for (Var p : parts) {
      Tensor& dp = g.grad_buf(p);
      for (size_t i = 0; i < dp.numel(); ++i) dp.data[i] += d.data[off + i];
      off += dp.numel();
    }
  });
}

Var Graph::concat_cols(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rows() != bv.rows())
    throw ShapeError("concat_cols: row mismatch " + av.shape_str() + " vs " + bv.shape_str());
  const size_t m = av.rows(), na = av.cols(), nb = bv.cols();
  Tensor out = Tensor::zeros({m, na + nb});
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < na; ++j) out.data[i * (na + nb) + j] = av.data[i * na + j];
    for (size_t j = 0; j < nb; ++j) out.data[i * (na + nb) + na + j] = bv.data[i * nb + j];
  }
  return push(std::move(out), [a, b, m, na, nb](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    Tensor& da = g.grad_buf(a);
    Tensor& db = g.grad_buf(b);
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = 0; j < na; ++j) da.data[i * na + j] += d.data[i * (na + nb) + j];
      for (size_t j = 0; j < nb; ++j) db.data[i * nb + j] += d.data[i * (na + nb) + na + j];
    }
  });
}

Var Graph::transpose(Var a) {
  Tensor out = nn::transpose(value(a));
  return push(std::move(out), [a](Graph& g, int self) {
    Tensor dt = nn::transpose(g.node(self).grad);
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < dt.numel(); ++i) da.data[i] += dt.data[i];
  });
}

Var Graph::reshape(Var a, std::vector<size_t> shape) {
  const Tensor& av = value(a);
  if (Tensor::numel_of(shape) != av.numel())
    throw ShapeError("reshape: " + av.shape_str() + " -> " + Tensor::shape_str(shape));
  Tensor out(std::move(shape), av.data);
  return push(std::move(out), [a](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    Tensor& da = g.grad_buf(a);
    for (size_t i = 0; i < d.numel(); ++i) da.data[i] += d.data[i];
  });
}

Var Graph::sum_all(Var a) {
  const Tensor& av = value(a);
  double s = 0.0;
  for (double v : av.data) s += v;
  return push(Tensor::scalar(s), [a](Graph& g, int self) {
    const double d = g.node(self).grad.data[0];
    Tensor& da = g.grad_buf(a);
    for (double& v : da.data) v += d;
  });
}

Var Graph::mean_all(Var a) {
  const Tensor& av = value(a);
  const double inv = 1.0 / static_cast<double>(av.numel());
  double s = 0.0;
  for (double v : av.data) s += v;
  return push(Tensor::scalar(s * inv), [a, inv](Graph& g, int self) {
    const double d = g.node(self).grad.data[0] * inv;
    Tensor& da = g.grad_buf(a);
    for (double& v : da.data) v += d;
  });
}

Var Graph::nll_mean(Var log_probs, const std::vector<int>& targets) {
  const Tensor& lp = value(log_probs);
  const size_t n = lp.shape.back();
  const size_t m = lp.numel() / n;
  if (targets.size() != m)
    throw ShapeError("nll_mean: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(m) + " rows");
  double s = 0.0;
  for (size_t i = 0; i < m; ++i) {
    int t = targets[i];
    if (t < 0 || static_cast<size_t>(t) >= n) throw ConfigError("nll_mean: target id out of range");
    s -= lp.data[i * n + static_cast<size_t>(t)];
  }
  const double inv = 1.0 / static_cast<double>(m);
  return push(Tensor::scalar(s * inv), [log_probs, targets, n, inv](Graph& g, int self) {
    const double d = g.node(self).grad.data[0] * inv;
    Tensor& da = g.grad_buf(log_probs);
    for (size_t i = 0; i < targets.size(); ++i)
      da.data[i * n + static_cast<size_t>(targets[i])] -= d;
  });
}

Var Graph::pairwise_sum(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.shape[1] != bv.shape[1])
    throw ShapeError("pairwise_sum: " + av.shape_str() + " vs " + bv.shape_str());
  const size_t t = av.shape[0], u = bv.shape[0], k = av.shape[1];
  Tensor out = Tensor::zeros({t, u, k});
  for (size_t i = 0; i < t; ++i)
    for (size_t j = 0; j < u; ++j)
      for (size_t c = 0; c < k; ++c)
        out.data[(i * u + j) * k + c] = av.data[i * k + c] + bv.data[j * k + c];
  return push(std::move(out), [a, b, t, u, k](Graph& g, int self) {
    const Tensor& d = g.node(self).grad;
    Tensor& da = g.grad_buf(a);
    Tensor& db = g.grad_buf(b);
    for (size_t i = 0; i < t; ++i)
      for (size_t j = 0; j < u; ++j)
        for (size_t c = 0; c < k; ++c) {
          const double dv = d.data[(i * u + j) * k + c];
          da.data[i * k + c] += dv;
          db.data[j * k + c] += dv;
        }
  });
}

// ---- CTC --------------------------------------------------------------------

Var Graph::ctc_loss(Var log_probs, const std::vector<int>& labels, int blank) {
  const Tensor& lp = value(log_probs);
  if (lp.rank() != 2) throw ShapeError("ctc_loss: log_probs must be (T, V), got " + lp.shape_str());
  const size_t T = lp.shape[0], V = lp.shape[1];
  const size_t U = labels.size();
  size_t repeats = 0;
  for (size_t i = 0; i < U; ++i) {
    if (labels[i] == blank || labels[i] < 0 || static_cast<size_t>(labels[i]) >= V)
      throw ConfigError("ctc_loss: label id out of range or blank");
    if (i > 0 && labels[i] == labels[i - 1]) ++repeats;
  }
  if (T < U + repeats)
    throw NumericError("ctc_loss: no feasible alignment, T=" + std::to_string(T) + " < " +
                       std::to_string(U + repeats));

  const size_t S = 2 * U + 1;
  auto lab = [&](size_t s) -> int {
    return (s % 2 == 0) ? blank : labels[s / 2];
  };
  auto lpat = [&](size_t t, int k) { return lp.data[t * V + static_cast<size_t>(k)]; };

  std::vector<double> la(T * S, kNegInf);
  la[0] = lpat(0, blank);
  if (U > 0) la[1] = lpat(0, lab(1));
  for (size_t t = 1; t < T; ++t) {
    for (size_t s = 0; s < S; ++s) {
      double best = la[(t - 1) * S + s];
      if (s >= 1) best = log_add_exp(best, la[(t - 1) * S + s - 1]);
      if (s >= 2 && lab(s) != blank && lab(s) != lab(s - 2))
        best = log_add_exp(best, la[(t - 1) * S + s - 2]);
      la[t * S + s] = (best == kNegInf) ? kNegInf : best + lpat(t, lab(s));
    }
  }
  double log_p = la[(T - 1) * S + S - 1];
  if (U > 0) log_p = log_add_exp(log_p, la[(T - 1) * S + S - 2]);
  if (!std::isfinite(log_p)) throw NumericError("ctc_loss: zero-probability alignment set");

  // Backward pass recomputes beta; alpha is captured by value.
  auto backward = [log_probs, labels, blank, la, log_p, T, V, U, S](Graph& g, int self) {
    const Tensor& lp2 = g.value(log_probs);
    auto lab2 = [&](size_t s) -> int { return (s % 2 == 0) ? blank : labels[s / 2]; };
    auto lpat2 = [&](size_t t, int k) { return lp2.data[t * V + static_cast<size_t>(k)]; };
    std::vector<double> lb(T * S, kNegInf);
    lb[(T - 1) * S + S - 1] = lpat2(T - 1, lab2(S - 1));
    if (U > 0) lb[(T - 1) * S + S - 2] = lpat2(T - 1, lab2(S - 2));
    for (size_t t = T - 1; t-- > 0;) {
      for (size_t s = 0; s < S; ++s) {
        double best = lb[(t + 1) * S + s];
        if (s + 1 < S) best = log_add_exp(best, lb[(t + 1) * S + s + 1]);
        if (s + 2 < S && lab2(s + 2) != blank && lab2(s + 2) != lab2(s))
          best = log_add_exp(best, lb[(t + 1) * S + s + 2]);
        lb[t * S + s] = (best == kNegInf) ? kNegInf : best + lpat2(t, lab2(s));
      }
    }
    const double dloss = g.node(self).grad.data[0];
    Tensor& da = g.grad_buf(log_probs);
    // d(-logP)/d lp[t][k] = -exp(LSE_{s: lab(s)=k}(alpha+beta) - lp[t][k] - logP)
    std::vector<double> acc(V);
    for (size_t t = 0; t < T; ++t) {
      std::fill(acc.begin(), acc.end(), kNegInf);
      for (size_t s = 0; s < S; ++s) {
        double ab = la[t * S + s] + lb[t * S + s];
        if (ab == kNegInf) continue;
        size_t k = static_cast<size_t>(lab2(s));
        acc[k] = log_add_exp(acc[k], ab);
      }
      for (size_t k = 0; k < V; ++k) {
        if (acc[k] == kNegInf) continue;
        da.data[t * V + k] += dloss * -std::exp(acc[k] - lpat2(t, static_cast<int>(k)) - log_p);
      }
    }
  };
  return push(Tensor::scalar(-log_p), backward);
}

// ---- RNN-T ------------------------------------------------------------------

Var Graph::rnnt_loss(Var log_probs, const std::vector<int>& labels, int blank) {
  const Tensor& lp = value(log_probs);
  if (lp.rank() != 3)
    throw ShapeError("rnnt_loss: log_probs must be (T, U+1, V), got " + lp.shape_str());
  const size_t T = lp.shape[0], Urows = lp.shape[1], V = lp.shape[2];
  const size_t U = labels.size();
  if (Urows != U + 1)
    throw ShapeError("rnnt_loss: label length " + std::to_string(U) + " needs " +
                     std::to_string(U + 1) + " prediction rows, got " + std::to_string(Urows));
  for (int l : labels)
    if (l == blank || l < 0 || static_cast<size_t>(l) >= V)
      throw ConfigError("rnnt_loss: label id out of range or blank");

  auto lpat = [&](size_t t, size_t u, int k) {
    return lp.data[(t * Urows + u) * V + static_cast<size_t>(k)];
  };

  std::vector<double> al(T * Urows, kNegInf);
  al[0] = 0.0;
  for (size_t t = 0; t < T; ++t) {
    for (size_t u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) continue;
      double v = kNegInf;
      if (t > 0) v = al[(t - 1) * Urows + u] + lpat(t - 1, u, blank);
      if (u > 0) v = log_add_exp(v, al[t * Urows + u - 1] + lpat(t, u - 1, labels[u - 1]));
      al[t * Urows + u] = v;
    }
  }
  const double log_p = al[(T - 1) * Urows + U] + lpat(T - 1, U, blank);
  if (!std::isfinite(log_p)) throw NumericError("rnnt_loss: zero-probability lattice");

  auto backward = [log_probs, labels, blank, al, log_p, T, Urows, V, U](Graph& g, int self) {
    const Tensor& lp2 = g.value(log_probs);
    auto lpat2 = [&](size_t t, size_t u, int k) {
      return lp2.data[(t * Urows + u) * V + static_cast<size_t>(k)];
    };
    // beta[t][u]: completion log-prob from (t,u), including its own emissions
    std::vector<double> be(T * Urows, kNegInf);
    for (size_t ti = T; ti-- > 0;) {
      for (size_t ui = Urows; ui-- > 0;) {
        double v = kNegInf;
        if (ti == T - 1 && ui == U) {
          v = lpat2(ti, ui, blank);
        } else if (ti + 1 < T) {
          v = lpat2(ti, ui, blank) + be[(ti + 1) * Urows + ui];
        }
        if (ui < U) v = log_add_exp(v, lpat2(ti, ui, labels[ui]) + be[ti * Urows + ui + 1]);
        be[ti * Urows + ui] = v;
      }
    }
    const double dloss = g.node(self).grad.data[0];
    Tensor& da = g.grad_buf(log_probs);
    for (size_t t = 0; t < T; ++t) {
      for (size_t u = 0; u <= U; ++u) {
        const double a = al[t * Urows + u];
        if (a == kNegInf) continue;
        // blank edge
        double bnext;
        if (t == T - 1 && u == U)
          bnext = 0.0;
        else if (t + 1 < T)
          bnext = be[(t + 1) * Urows + u];
        else
          bnext = kNegInf;
        if (bnext != kNegInf) {
          double occ = a + lpat2(t, u, blank) + bnext - log_p;
          da.data[(t * Urows + u) * V + static_cast<size_t>(blank)] += dloss * -std::exp(occ);
        }
        // emit edge
        if (u < U) {
          double occ = a + lpat2(t, u, labels[u]) + be[t * Urows + u + 1] - log_p;
          da.data[(t * Urows + u) * V + static_cast<size_t>(labels[u])] += dloss * -std::exp(occ);
        }
      }
    }
  };
  return push(Tensor::scalar(-log_p), backward);
}

}  // namespace neurotalk::nn
