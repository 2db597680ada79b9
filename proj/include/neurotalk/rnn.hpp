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

#include <string>

#include "neurotalk/graph.hpp"
#include "neurotalk/optim.hpp"

namespace neurotalk::nn {

// Recurrent cells over the autodiff tape. State vectors are (1,H) rows;
// sequences are time-major (T,dim). Gate conventions:
//
//   GRU   r = sig(x Wxr + h Whr + br)
//         z = sig(x Wxz + h Whz + bz)
//         n = tanh(x Wxn + r.(h Whn) + bn)
//         h' = z.h + (1-z).n                (z -> 1 keeps the old state)
//
//   LSTM  i,f,o = sig(...), g = tanh(...)
//         c' = f.c + i.g,  h' = o.tanh(c')
//
// Weights per cell: w_x (in, G*H), w_h (H, G*H), b (1, G*H) with gates
// concatenated along columns (GRU: r,z,n; LSTM: i,f,g,o).

struct GruParams {
  Var w_x, w_h, b;
  size_t hidden;
};

struct LstmParams {
  Var w_x, w_h, b;
  size_t hidden;
};

/// Registers freshly initialized GRU weights under prefix + {/w_x,/w_h,/b}.
void init_gru(ParameterStore& store, const std::string& prefix, size_t in_dim, size_t hidden,
              Rng& rng);

/// LSTM init; forget-gate bias starts at +1.
void init_lstm(ParameterStore& store, const std::string& prefix, size_t in_dim, size_t hidden,
               Rng& rng);

GruParams lease_gru(Graph& g, const ParameterStore& store, const std::string& prefix);
LstmParams lease_lstm(Graph& g, const ParameterStore& store, const std::string& prefix);

/// One GRU step: x_t (1,in), h_prev (1,H) -> h (1,H).
Var gru_cell(Graph& g, Var x_t, Var h_prev, const GruParams& p);

/// One LSTM step; returns (h, c).
std::pair<Var, Var> lstm_cell(Graph& g, Var x_t, Var h_prev, Var c_prev, const LstmParams& p);

/// Runs a GRU over all T rows of x; returns (T,H) hidden states.
/// The input projection for the whole sequence is batched into one matmul.
Var gru_sequence(Graph& g, Var x, const GruParams& p, Var* h_last = nullptr);

/// Stacked-LSTM runner (single layer); returns (T,H).
Var lstm_sequence(Graph& g, Var x, const LstmParams& p, Var* h_last = nullptr);

/// y = x W + b with x (m,in), W (in,out), b (1,out).
Var dense(Graph& g, Var x, Var w, Var b);

}  // namespace neurotalk::nn
