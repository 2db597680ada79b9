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

#include "neurotalk/rnn.hpp"

namespace neurotalk::nn {

void init_gru(ParameterStore& store, const std::string& prefix, size_t in_dim, size_t hidden,
              Rng& rng) {
  store.add(prefix + "/w_x", glorot_uniform(in_dim, 3 * hidden, rng));
  store.add(prefix + "/w_h", glorot_uniform(hidden, 3 * hidden, rng));
  store.add(prefix + "/b", Tensor::zeros({1, 3 * hidden}));
}

void init_lstm(ParameterStore& store, const std::string& prefix, size_t in_dim, size_t hidden,
               Rng& rng) {
  store.add(prefix + "/w_x", glorot_uniform(in_dim, 4 * hidden, rng));
  store.add(prefix + "/w_h", glorot_uniform(hidden, 4 * hidden, rng));
  Tensor b = Tensor::zeros({1, 4 * hidden});
  for (size_t j = hidden; j < 2 * hidden; ++j) b.data[j] = 1.0;  // forget gate
  store.add(prefix + "/b", std::move(b));
}

GruParams lease_gru(Graph& g, const ParameterStore& store, const std::string& prefix) {
  GruParams p;
  p.w_x = lease(g, store, prefix + "/w_x");
  p.w_h = lease(g, store, prefix + "/w_h");
  p.b = lease(g, store, prefix + "/b");
  p.hidden = g.value(p.w_h).shape[0];
  return p;
}

LstmParams lease_lstm(Graph& g, const ParameterStore& store, const std::string& prefix) {
  LstmParams p;
  p.w_x = lease(g, store, prefix + "/w_x");
  p.w_h = lease(g, store, prefix + "/w_h");
  p.b = lease(g, store, prefix + "/b");
  p.hidden = g.value(p.w_h).shape[0];
  return p;
}

// xp_t is the precomputed row x_t*W_x + b.
static Var gru_step(Graph& g, Var xp_t, Var h_prev, const GruParams& p) {
  const size_t H = p.hidden;
  Var hp = g.matmul(h_prev, p.w_h);
  Var r = g.sigmoid(g.add(g.cols(xp_t, 0, H), g.cols(hp, 0, H)));
  Var z = g.sigmoid(g.add(g.cols(xp_t, H, 2 * H), g.cols(hp, H, 2 * H)));
  Var n = g.tanh(g.add(g.cols(xp_t, 2 * H, 3 * H), g.mul(r, g.cols(hp, 2 * H, 3 * H))));
  return g.add(g.mul(z, h_prev), g.mul(g.affine(z, -1.0, 1.0), n));
}

static std::pair<Var, Var> lstm_step(Graph& g, Var xp_t, Var h_prev, Var c_prev,
                                     const LstmParams& p) {
  const size_t H = p.hidden;
  Var hp = g.matmul(h_prev, p.w_h);
  Var i = g.sigmoid(g.add(g.cols(xp_t, 0, H), g.cols(hp, 0, H)));
  Var f = g.sigmoid(g.add(g.cols(xp_t, H, 2 * H), g.cols(hp, H, 2 * H)));
  Var cand = g.tanh(g.add(g.cols(xp_t, 2 * H, 3 * H), g.cols(hp, 2 * H, 3 * H)));
  Var o = g.sigmoid(g.add(g.cols(xp_t, 3 * H, 4 * H), g.cols(hp, 3 * H, 4 * H)));
  Var c = g.add(g.mul(f, c_prev), g.mul(i, cand));
  Var h = g.mul(o, g.tanh(c));
  return {h, c};
}

Var gru_cell(Graph& g, Var x_t, Var h_prev, const GruParams& p) {
  Var xp = g.add_rowvec(g.matmul(x_t, p.w_x), p.b);
  return gru_step(g, xp, h_prev, p);
}

std::pair<Var, Var> lstm_cell(Graph& g, Var x_t, Var h_prev, Var c_prev, const LstmParams& p) {
  Var xp = g.add_rowvec(g.matmul(x_t, p.w_x), p.b);
  return lstm_step(g, xp, h_prev, c_prev, p);
}

Var gru_sequence(Graph& g, Var x, const GruParams& p, Var* h_last) {
  const size_t T = g.value(x).rows();
  Var xp = g.add_rowvec(g.matmul(x, p.w_x), p.b);
  Var h = g.leaf(Tensor::zeros({1, p.hidden}));
  std::vector<Var> outs;
  outs.reserve(T);
  for (size_t t = 0; t < T; ++t) {
    h = gru_step(g, g.rows(xp, t, t + 1), h, p);
    outs.push_back(h);
  }
  if (h_last) *h_last = h;
  return g.concat_rows(outs);
}

Var lstm_sequence(Graph& g, Var x, const LstmParams& p, Var* h_last) {
  const size_t T = g.value(x).rows();
  Var xp = g.add_rowvec(g.matmul(x, p.w_x), p.b);
  Var h = g.leaf(Tensor::zeros({1, p.hidden}));
  Var c = g.leaf(Tensor::zeros({1, p.hidden}));
  std::vector<Var> outs;
  outs.reserve(T);
  for (size_t t = 0; t < T; ++t) {
    auto [nh, nc] = lstm_step(g, g.rows(xp, t, t + 1), h, c, p);
    h = nh;
    c = nc;
    outs.push_back(h);
  }
  if (h_last) *h_last = h;
  return g.concat_rows(outs);
}

Var dense(Graph& g, Var x, Var w, Var b) { return g.add_rowvec(g.matmul(x, w), b); }

}  // namespace neurotalk::nn
