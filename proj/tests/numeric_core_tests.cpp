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

#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>

#include "neurotalk/checkpoint.hpp"
#include "neurotalk/graph.hpp"
#include "neurotalk/rnn.hpp"
#include "test_support.hpp"

using namespace neurotalk;
using namespace neurotalk::nn;
using nt_test::finite_difference_grads;
using nt_test::max_rel_grad_error;
using nt_test::random_tensor;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Straight-line scalar oracle for y = xW + b on one row.
std::vector<double> dense_row_oracle(const std::vector<double>& x, const Tensor& w,
                                     const Tensor& b) {
  std::vector<double> y(w.shape[1], 0.0);
  for (size_t j = 0; j < w.shape[1]; ++j) {
    double acc = b.data[j];
    for (size_t k = 0; k < w.shape[0]; ++k) acc += x[k] * w.data[k * w.shape[1] + j];
    y[j] = acc;
  }
  return y;
}

// Scalar GRU recurrence oracle, mirrors the documented gate convention.
std::vector<double> gru_oracle(const std::vector<double>& x, const std::vector<double>& h_prev,
                               const Tensor& wx, const Tensor& wh, const Tensor& b, size_t H) {
  auto col = [&](const Tensor& m, const std::vector<double>& v, size_t j) {
    double acc = 0.0;
    for (size_t k = 0; k < v.size(); ++k) acc += v[k] * m.data[k * m.shape[1] + j];
    return acc;
  };
  std::vector<double> h(H);
  for (size_t j = 0; j < H; ++j) {
    double r = sig(col(wx, x, j) + col(wh, h_prev, j) + b.data[j]);
    double z = sig(col(wx, x, H + j) + col(wh, h_prev, H + j) + b.data[H + j]);
    double n = std::tanh(col(wx, x, 2 * H + j) + r * col(wh, h_prev, 2 * H + j) + b.data[2 * H + j]);
    h[j] = z * h_prev[j] + (1.0 - z) * n;
  }
  return h;
}

std::pair<std::vector<double>, std::vector<double>> lstm_oracle(
    const std::vector<double>& x, const std::vector<double>& h_prev,
    const std::vector<double>& c_prev, const Tensor& wx, const Tensor& wh, const Tensor& b,
    size_t H) {
  auto col = [&](const Tensor& m, const std::vector<double>& v, size_t j) {
    double acc = 0.0;
    for (size_t k = 0; k < v.size(); ++k) acc += v[k] * m.data[k * m.shape[1] + j];
    return acc;
  };
  std::vector<double> h(H), c(H);
  for (size_t j = 0; j < H; ++j) {
    double i = sig(col(wx, x, j) + col(wh, h_prev, j) + b.data[j]);
    double f = sig(col(wx, x, H + j) + col(wh, h_prev, H + j) + b.data[H + j]);
    double gg = std::tanh(col(wx, x, 2 * H + j) + col(wh, h_prev, 2 * H + j) + b.data[2 * H + j]);
    double o = sig(col(wx, x, 3 * H + j) + col(wh, h_prev, 3 * H + j) + b.data[3 * H + j]);
    c[j] = f * c_prev[j] + i * gg;
    h[j] = o * std::tanh(c[j]);
  }
  return {h, c};
}

}  // namespace

TEST_CASE("dense forward identity and all-ones") {
  Graph g;
  Var x = g.leaf(Tensor({1, 2}, {1, 2}));
  Var w = g.leaf(Tensor::eye(2));
  Var b = g.leaf(Tensor::zeros({1, 2}));
  Var y = dense(g, x, w, b);
  CHECK(g.value(y).data[0] == doctest::Approx(1.0));
  CHECK(g.value(y).data[1] == doctest::Approx(2.0));

  Graph g2;
  Var x2 = g2.leaf(Tensor({1, 2}, {1, 1}));
  Var w2 = g2.leaf(Tensor({2, 1}, {1, 1}));
  Var b2 = g2.leaf(Tensor({1, 1}, {1}));
  CHECK(g2.value(dense(g2, x2, w2, b2)).data[0] == doctest::Approx(3.0));
}

TEST_CASE("dense forward matches scalar-loop oracle on seeded input") {
  Rng rng(42);
  Tensor x = random_tensor({3, 5}, rng);
  Tensor w = random_tensor({5, 4}, rng);
  Tensor b = random_tensor({1, 4}, rng);
  Graph g;
  Var y = dense(g, g.leaf(x), g.leaf(w), g.leaf(b));
  for (size_t i = 0; i < 3; ++i) {
    std::vector<double> row(x.data.begin() + i * 5, x.data.begin() + (i + 1) * 5);
    auto expect = dense_row_oracle(row, w, b);
    for (size_t j = 0; j < 4; ++j)
      CHECK(g.value(y).at(i, j) == doctest::Approx(expect[j]).epsilon(1e-12));
  }
}

TEST_CASE("dense shape mismatch names both shapes") {
  Graph g;
  Var x = g.leaf(Tensor::zeros({1, 3}));
  Var w = g.leaf(Tensor::zeros({2, 4}));
  try {
    g.matmul(x, w);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    CHECK(msg.find("[1,3]") != std::string::npos);
    CHECK(msg.find("[2,4]") != std::string::npos);
  }
}

TEST_CASE("softmax basics") {
  Graph g;
  Var s = g.softmax_rows(g.leaf(Tensor({1, 2}, {0, 0})));
  CHECK(g.value(s).data[0] == doctest::Approx(0.5));
  CHECK(g.value(s).data[1] == doctest::Approx(0.5));

  Var sat = g.softmax_rows(g.leaf(Tensor({1, 2}, {1000, 0})));
  CHECK(g.value(sat).data[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.value(sat).data[1] == doctest::Approx(0.0).epsilon(1e-12));

  // direct exp/sum oracle
  Var v = g.softmax_rows(g.leaf(Tensor({1, 3}, {1, 2, 3})));
  double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(g.value(v).data[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));
  CHECK(g.value(v).data[1] == doctest::Approx(std::exp(2.0) / z).epsilon(1e-12));
  CHECK(g.value(v).data[2] == doctest::Approx(std::exp(3.0) / z).epsilon(1e-12));

  CHECK_THROWS_AS(g.softmax_rows(g.leaf(Tensor({1, 2}, {std::nan(""), 0}))), NumericError);
}

TEST_CASE("softmax rows sum to one for |x| <= 700") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    Graph g;
    Tensor x = random_tensor({4, 9}, rng, 700.0);
    Var s = g.softmax_rows(g.leaf(x));
    for (size_t i = 0; i < 4; ++i) {
      double sum = 0.0;
      for (size_t j = 0; j < 9; ++j) sum += g.value(s).at(i, j);
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("gru cell zero fixed point and gate saturation") {
  ParameterStore store;
  store.add("g/w_x", Tensor::zeros({3, 12}));
  store.add("g/w_h", Tensor::zeros({4, 12}));
  store.add("g/b", Tensor::zeros({1, 12}));

  Graph g;
  GruParams p = lease_gru(g, store, "g");
  Var h = gru_cell(g, g.leaf(Tensor({1, 3}, {0.3, -2.0, 5.0})), g.leaf(Tensor::zeros({1, 4})), p);
  for (double v : g.value(h).data) CHECK(v == doctest::Approx(0.0));

  // push update-gate bias high: h stays at h_prev
  for (size_t j = 4; j < 8; ++j) store.params.at("g/b").data[j] = 50.0;
  Graph g2;
  GruParams p2 = lease_gru(g2, store, "g");
  Tensor hp({1, 4}, {0.2, -0.4, 0.9, -0.1});
  Var h2 = gru_cell(g2, g2.leaf(Tensor({1, 3}, {1, 2, 3})), g2.leaf(hp), p2);
  for (size_t j = 0; j < 4; ++j)
    CHECK(g2.value(h2).data[j] == doctest::Approx(hp.data[j]).epsilon(1e-9));
}

TEST_CASE("gru cell matches scalar oracle on seeded params") {
  Rng rng(11);
  for (size_t H : {1u, 3u, 8u}) {
    ParameterStore store;
    init_gru(store, "g", 4, H, rng);
    std::vector<double> x{0.5, -1.2, 0.7, 0.1};
    std::vector<double> hp(H);
    for (auto& v : hp) v = rng.uniform(-0.9, 0.9);

    Graph g;
    GruParams p = lease_gru(g, store, "g");
    Var h = gru_cell(g, g.leaf(Tensor({1, 4}, x)), g.leaf(Tensor({1, H}, hp)), p);
    auto expect = gru_oracle(x, hp, store.at("g/w_x"), store.at("g/w_h"), store.at("g/b"), H);
    for (size_t j = 0; j < H; ++j)
      CHECK(std::fabs(g.value(h).data[j] - expect[j]) < 1e-12);
  }
}

TEST_CASE("lstm cell zero case, forget-gate saturation, scalar oracle") {
  // zero params, zero state -> (0,0)
  ParameterStore z;
  z.add("l/w_x", Tensor::zeros({2, 16}));
  z.add("l/w_h", Tensor::zeros({4, 16}));
  z.add("l/b", Tensor::zeros({1, 16}));
  Graph g0;
  LstmParams p0 = lease_lstm(g0, z, "l");
  auto [h0, c0] = lstm_cell(g0, g0.leaf(Tensor({1, 2}, {1, -1})), g0.leaf(Tensor::zeros({1, 4})),
                            g0.leaf(Tensor::zeros({1, 4})), p0);
  for (double v : g0.value(h0).data) CHECK(v == doctest::Approx(0.0));
  for (double v : g0.value(c0).data) CHECK(v == doctest::Approx(0.0));

  // forget gate saturated to 1, input gate to 0 -> c = c_prev
  for (size_t j = 0; j < 4; ++j) z.params.at("l/b").data[j] = -50.0;        // input gate off
  for (size_t j = 4; j < 8; ++j) z.params.at("l/b").data[j] = 50.0;         // forget gate on
  Graph g1;
  LstmParams p1 = lease_lstm(g1, z, "l");
  Tensor cp({1, 4}, {0.3, -0.2, 0.8, 0.05});
  auto [h1, c1] = lstm_cell(g1, g1.leaf(Tensor({1, 2}, {2, 3})), g1.leaf(Tensor::zeros({1, 4})),
                            g1.leaf(cp), p1);
  for (size_t j = 0; j < 4; ++j)
    CHECK(g1.value(c1).data[j] == doctest::Approx(cp.data[j]).epsilon(1e-9));

  // seeded scalar oracle
  Rng rng(13);
  for (size_t H : {2u, 8u}) {
    ParameterStore store;
    init_lstm(store, "l", 3, H, rng);
    std::vector<double> x{0.4, -0.6, 1.1};
    std::vector<double> hp(H), cpv(H);
    for (auto& v : hp) v = rng.uniform(-0.9, 0.9);
    for (auto& v : cpv) v = rng.uniform(-0.9, 0.9);
    Graph g;
    LstmParams p = lease_lstm(g, store, "l");
    auto [h, c] = lstm_cell(g, g.leaf(Tensor({1, 3}, x)), g.leaf(Tensor({1, H}, hp)),
                            g.leaf(Tensor({1, H}, cpv)), p);
    auto [eh, ec] =
        lstm_oracle(x, hp, cpv, store.at("l/w_x"), store.at("l/w_h"), store.at("l/b"), H);
    for (size_t j = 0; j < H; ++j) {
      CHECK(std::fabs(g.value(h).data[j] - eh[j]) < 1e-12);
      CHECK(std::fabs(g.value(c).data[j] - ec[j]) < 1e-12);
    }
  }
}

TEST_CASE("backward: sum and quadratic closed forms") {
  ParameterStore store;
  store.add("w", Tensor({1, 4}, {0.5, -1.0, 2.0, 3.0}));

  Graph g;
  Var w = lease(g, store, "w");
  auto grads = g.backward(g.sum_all(w));
  for (double v : grads.at("w").data) CHECK(v == doctest::Approx(1.0));

  Graph g2;
  Var w2 = lease(g2, store, "w");
  auto grads2 = g2.backward(g2.sum_all(g2.mul(w2, w2)));
  for (size_t i = 0; i < 4; ++i)
    CHECK(grads2.at("w").data[i] == doctest::Approx(2.0 * store.at("w").data[i]));
}

TEST_CASE("backward twice on one tape is a state error") {
  Graph g;
  Var w = g.param("w", Tensor::scalar(2.0));
  Var l = g.sum_all(w);
  g.backward(l);
  CHECK_THROWS_AS(g.backward(l), StateError);
}

TEST_CASE("unreached parameters get zero gradients") {
  Graph g;
  Var w = g.param("w", Tensor::scalar(2.0));
  g.param("unused", Tensor({1, 3}, {1, 2, 3}));
  auto grads = g.backward(g.sum_all(w));
  for (double v : grads.at("unused").data) CHECK(v == 0.0);
  CHECK(grads.at("w").data[0] == doctest::Approx(1.0));
}

TEST_CASE("finite differences agree with backward through a mixed network") {
  Rng rng(99);
  ParameterStore store;
  init_gru(store, "enc", 3, 5, rng);
  init_lstm(store, "dec", 5, 4, rng);
  store.add("out/w", glorot_uniform(4, 2, rng));
  store.add("out/b", Tensor::zeros({1, 2}));
  Tensor x = random_tensor({6, 3}, rng);

  auto loss_fn = [&]() {
    Graph g;
    GruParams enc = lease_gru(g, store, "enc");
    LstmParams dec = lease_lstm(g, store, "dec");
    Var h = gru_sequence(g, g.leaf(x), enc);
    Var h2 = lstm_sequence(g, h, dec);
    Var y = dense(g, h2, lease(g, store, "out/w"), lease(g, store, "out/b"));
    Var p = g.softmax_rows(y);
    return g.value(g.mean_all(g.mul(p, p))).data[0];
  };

  Graph g;
  GruParams enc = lease_gru(g, store, "enc");
  LstmParams dec = lease_lstm(g, store, "dec");
  Var h = gru_sequence(g, g.leaf(x), enc);
  Var h2 = lstm_sequence(g, h, dec);
  Var y = dense(g, h2, lease(g, store, "out/w"), lease(g, store, "out/b"));
  Var p = g.softmax_rows(y);
  auto analytic = g.backward(g.mean_all(g.mul(p, p)));
  auto fd = finite_difference_grads(store, loss_fn);
  CHECK(max_rel_grad_error(analytic, fd) < 1e-4);
}

TEST_CASE("adam first step moves by about -lr*sign(g)") {
  ParameterStore store;
  store.add("w", Tensor::scalar(1.0));
  GradMap grads;
  grads["w"] = Tensor::scalar(0.37);
  adam_step(store, grads, 0.1);
  CHECK(store.at("w").data[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
  CHECK(store.step == 1);
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
  ParameterStore store;
  store.add("w", Tensor({1, 3}, {1.0, -2.0, 0.5}));
  GradMap grads;
  grads["w"] = Tensor::zeros({1, 3});
  adam_step(store, grads, 0.1);
  CHECK(store.at("w").data[0] == 1.0);
  CHECK(store.at("w").data[1] == -2.0);
  CHECK(store.at("w").data[2] == 0.5);
}

TEST_CASE("adam three-step trajectory matches hand-rolled oracle") {
  // oracle: explicit Adam recurrence on a scalar quadratic loss 0.5*w^2
  double w = 1.3, m = 0.0, v = 0.0;
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<double> expect;
  for (int t = 1; t <= 3; ++t) {
    double grad = w;
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad * grad;
    w -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    expect.push_back(w);
  }

  ParameterStore store;
  store.add("w", Tensor::scalar(1.3));
  for (int t = 0; t < 3; ++t) {
    GradMap grads;
    grads["w"] = Tensor::scalar(store.at("w").data[0]);
    adam_step(store, grads, lr);
    CHECK(store.at("w").data[0] == doctest::Approx(expect[static_cast<size_t>(t)]).epsilon(1e-12));
  }
}

TEST_CASE("sgd basics and elementwise oracle") {
  ParameterStore store;
  store.add("w", Tensor::scalar(1.0));
  GradMap g1;
  g1["w"] = Tensor::scalar(1.0);
  sgd_step(store, g1, 0.0);
  CHECK(store.at("w").data[0] == 1.0);
  sgd_step(store, g1, 0.1);
  CHECK(store.at("w").data[0] == doctest::Approx(0.9));

  Rng rng(3);
  ParameterStore s2;
  s2.add("a", random_tensor({2, 3}, rng));
  s2.add("b", random_tensor({4}, rng));
  GradMap grads;
  grads["a"] = random_tensor({2, 3}, rng);
  grads["b"] = random_tensor({4}, rng);
  ParameterStore before = s2;
  sgd_step(s2, grads, 0.01);
  for (const auto& [name, p] : s2.params)
    for (size_t i = 0; i < p.numel(); ++i)
      CHECK(p.data[i] ==
            doctest::Approx(before.at(name).data[i] - 0.01 * grads.at(name).data[i]));
}

TEST_CASE("identical seeds give bitwise-identical trajectories over 10 steps") {
  auto run = [](uint64_t seed) {
    Rng rng(seed);
    ParameterStore store;
    init_gru(store, "g", 2, 3, rng);
    Tensor x = random_tensor({4, 2}, rng);
    for (int step = 0; step < 10; ++step) {
      Graph g;
      GruParams p = lease_gru(g, store, "g");
      Var h = gru_sequence(g, g.leaf(x), p);
      auto grads = g.backward(g.mean_all(g.mul(h, h)));
      adam_step(store, grads, 1e-3);
    }
    return store;
  };
  ParameterStore a = run(1234);
  ParameterStore b = run(1234);
  for (const auto& [name, pa] : a.params) {
    const Tensor& pb = b.at(name);
    REQUIRE(pa.numel() == pb.numel());
    CHECK(std::memcmp(pa.data.data(), pb.data.data(), pa.numel() * sizeof(double)) == 0);
  }
}

TEST_CASE("gradient clipping caps the global norm") {
  GradMap grads;
  grads["a"] = Tensor({1, 2}, {3.0, 4.0});  // norm 5
  double norm = clip_global_norm(grads, 1.0);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(grads["a"].data[0] == doctest::Approx(0.6));
  CHECK(grads["a"].data[1] == doctest::Approx(0.8));
}

TEST_CASE("checkpoint container round-trips parameters and optimizer state") {
  Rng rng(21);
  ParameterStore store;
  init_lstm(store, "m", 3, 4, rng);
  store.add("head/w", random_tensor({4, 2}, rng));
  GradMap grads;
  for (const auto& [name, p] : store.params) grads[name] = random_tensor(p.shape, rng);
  adam_step(store, grads, 1e-3);
  adam_step(store, grads, 1e-3);

  const std::string path = "ntck_roundtrip.bin";
  save_checkpoint(store, path);
  ParameterStore loaded = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(loaded.step == store.step);
  REQUIRE(loaded.params.size() == store.params.size());
  for (const auto& [name, p] : store.params) {
    const Tensor& q = loaded.at(name);
    REQUIRE(p.shape == q.shape);
    CHECK(std::memcmp(p.data.data(), q.data.data(), p.numel() * sizeof(double)) == 0);
  }
  for (const auto& [name, m] : store.adam_m)
    CHECK(std::memcmp(m.data.data(), loaded.adam_m.at(name).data.data(),
                      m.numel() * sizeof(double)) == 0);
}

TEST_CASE("checkpoint magic is NTCK with the documented layout") {
  ParameterStore store;
  store.add("w", Tensor::scalar(1.5));
  const std::string path = "ntck_magic.bin";
  save_checkpoint(store, path);
  std::ifstream is(path, std::ios::binary);
  char magic[4];
  is.read(magic, 4);
  CHECK(std::memcmp(magic, "NTCK", 4) == 0);
  is.close();
  std::remove(path.c_str());
}
