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

#include "neurotalk/synth.hpp"

#include <algorithm>
#include <cmath>

namespace neurotalk::synth {

namespace {
constexpr double kLogClamp = 1e-12;

Var features_leaf(Graph& g, const dsp::FeatureSequence& f) {
  if (f.num_frames() == 0) throw ConfigError("empty feature sequence");
  return g.leaf(nn::Tensor({f.num_frames(), f.dim}, f.frames));
}

void check_pair(const SynthPair& p) {
  if (p.mfcc.dim != 13) throw ShapeError("synth pair: mfcc dim must be 13");
  if (p.eeg.num_frames() != p.mfcc.num_frames())
    throw ShapeError("synth pair " + p.utt_id + ": eeg frames " +
                     std::to_string(p.eeg.num_frames()) + " vs mfcc frames " +
                     std::to_string(p.mfcc.num_frames()));
}

// apply only the gradients belonging to one store
nn::GradMap subset_for(const ParameterStore& store, const nn::GradMap& grads) {
  nn::GradMap out;
  for (const auto& [name, g] : grads)
    if (store.has(name)) out.emplace(name, g);
  return out;
}

}  // namespace

void init_generator(ParameterStore& store, size_t eeg_dim, size_t hidden, size_t out_dim,
                    Rng& rng) {
  nn::init_lstm(store, "gen/l0", eeg_dim, hidden, rng);
  nn::init_lstm(store, "gen/l1", hidden, hidden, rng);
  store.add("gen/out/w", nn::glorot_uniform(hidden, out_dim, rng));
  store.add("gen/out/b", nn::Tensor::zeros({1, out_dim}));
}

void init_discriminator(ParameterStore& store, size_t eeg_dim, size_t mfcc_dim, size_t hidden,
                        Rng& rng) {
  nn::init_lstm(store, "disc/eeg", eeg_dim, hidden, rng);
  nn::init_lstm(store, "disc/mfcc", mfcc_dim, hidden, rng);
  nn::init_lstm(store, "disc/merge", 2 * hidden, hidden, rng);
  store.add("disc/out/w", nn::glorot_uniform(hidden, 1, rng));
  store.add("disc/out/b", nn::Tensor::zeros({1, 1}));
}

Var generator_forward(Graph& g, const ParameterStore& store, const dsp::FeatureSequence& eeg) {
  if (!store.has("gen/out/w")) throw StateError("generator has no trained parameters");
  Var x = features_leaf(g, eeg);
  Var h0 = nn::lstm_sequence(g, x, nn::lease_lstm(g, store, "gen/l0"));
  Var h1 = nn::lstm_sequence(g, h0, nn::lease_lstm(g, store, "gen/l1"));
  return nn::dense(g, h1, nn::lease(g, store, "gen/out/w"), nn::lease(g, store, "gen/out/b"));
}

Var discriminator_forward(Graph& g, const ParameterStore& store, const dsp::FeatureSequence& eeg,
                          Var mfcc, bool sigmoid_output) {
  if (g.value(mfcc).rows() != eeg.num_frames())
    throw ShapeError("discriminator: eeg and mfcc frame counts differ");
  Var e = nn::lstm_sequence(g, features_leaf(g, eeg), nn::lease_lstm(g, store, "disc/eeg"));
  Var m = nn::lstm_sequence(g, mfcc, nn::lease_lstm(g, store, "disc/mfcc"));
  Var merged = nn::lstm_sequence(g, g.concat_cols(e, m), nn::lease_lstm(g, store, "disc/merge"));
  const size_t T = eeg.num_frames();
  Var last = g.rows(merged, T - 1, T);
  Var score =
      nn::dense(g, last, nn::lease(g, store, "disc/out/w"), nn::lease(g, store, "disc/out/b"));
  return sigmoid_output ? g.sigmoid(score) : score;
}

dsp::FeatureSequence generator_predict(const ParameterStore& store,
                                       const dsp::FeatureSequence& eeg) {
  Graph g;
  Var y = generator_forward(g, store, eeg);
  dsp::FeatureSequence out;
  out.frame_rate_hz = eeg.frame_rate_hz;
  out.dim = g.value(y).cols();
  out.set_id = "mfcc";
  out.frames = g.value(y).data;
  return out;
}

double gan_generator_loss(double p_fake) { return -std::log(std::max(p_fake, kLogClamp)); }

double gan_discriminator_loss(double p_real, double p_fake) {
  return -std::log(std::max(p_real, kLogClamp)) - std::log(std::max(1.0 - p_fake, kLogClamp));
}

std::pair<double, double> gan_train_step(ParameterStore& gen, ParameterStore& disc,
                                         const SynthPair& pair, const GanConfig& cfg) {
  if (cfg.mode != "gan") throw ConfigError("gan_train_step: config mode is not gan");
  check_pair(pair);

  // detach the fake sequence for the discriminator phase
  dsp::FeatureSequence fake = generator_predict(gen, pair.eeg);

  double d_loss_v;
  {
    Graph g;
    Var p_fake = discriminator_forward(g, disc, pair.eeg, features_leaf(g, fake), true);
    Var p_real = discriminator_forward(g, disc, pair.eeg, features_leaf(g, pair.mfcc), true);
    Var loss = g.add(g.affine(g.log_clamped(p_real, kLogClamp), -1.0, 0.0),
                     g.affine(g.log_clamped(g.affine(p_fake, -1.0, 1.0), kLogClamp), -1.0, 0.0));
    d_loss_v = g.value(loss).data[0];
    auto grads = g.backward(loss);
    nn::adam_step(disc, subset_for(disc, grads), cfg.lr);
  }

  double g_loss_v;
  {
    Graph g;
    Var fake_live = generator_forward(g, gen, pair.eeg);
    Var p_fake = discriminator_forward(g, disc, pair.eeg, fake_live, true);
    Var loss = g.affine(g.log_clamped(p_fake, kLogClamp), -1.0, 0.0);
    g_loss_v = g.value(loss).data[0];
    auto grads = g.backward(loss);
    nn::adam_step(gen, subset_for(gen, grads), cfg.lr);  // discriminator frozen
  }
  if (!std::isfinite(d_loss_v) || !std::isfinite(g_loss_v))
    throw NumericError("gan_train_step: non-finite loss");
  return {g_loss_v, d_loss_v};
}

std::pair<double, double> wgan_train_step(ParameterStore& gen, ParameterStore& disc,
                                          const SynthPair& pair, const GanConfig& cfg) {
  if (cfg.mode != "wgan") throw ConfigError("wgan_train_step: config mode is not wgan");
  if (cfg.clip_c <= 0.0) throw ConfigError("wgan_train_step: clip_c must be positive");
  check_pair(pair);

  double d_loss_v = 0.0;
  for (size_t step = 0; step < cfg.critic_steps; ++step) {
    dsp::FeatureSequence fake = generator_predict(gen, pair.eeg);
    Graph g;
    Var s_fake = discriminator_forward(g, disc, pair.eeg, features_leaf(g, fake), false);
    Var s_real = discriminator_forward(g, disc, pair.eeg, features_leaf(g, pair.mfcc), false);
    Var loss = g.sub(s_fake, s_real);
    d_loss_v = g.value(loss).data[0];
    auto grads = g.backward(loss);
    nn::adam_step(disc, subset_for(disc, grads), cfg.lr);
    for (auto& [name, p] : disc.params)
      for (double& v : p.data) v = std::clamp(v, -cfg.clip_c, cfg.clip_c);
  }

  double g_loss_v;
  {
    Graph g;
    Var fake_live = generator_forward(g, gen, pair.eeg);
    Var s_fake = discriminator_forward(g, disc, pair.eeg, fake_live, false);
    Var loss = g.affine(s_fake, -1.0, 0.0);
    g_loss_v = g.value(loss).data[0];
    auto grads = g.backward(loss);
    nn::adam_step(gen, subset_for(gen, grads), cfg.lr);
  }
  if (!std::isfinite(d_loss_v) || !std::isfinite(g_loss_v))
    throw NumericError("wgan_train_step: non-finite loss");
  return {g_loss_v, d_loss_v};
}

RegressionResult regression_train(const std::vector<SynthPair>& pairs,
                                  const RegressionConfig& cfg) {
  if (pairs.empty()) throw ConfigError("regression_train: no pairs");
  for (const auto& p : pairs) check_pair(p);
  Rng rng(cfg.seed);
  RegressionResult result;
  init_generator(result.store, pairs[0].eeg.dim, cfg.hidden, cfg.out_dim, rng);

  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (size_t idx : order) {
      const SynthPair& p = pairs[idx];
      Graph g;
      Var fake = generator_forward(g, result.store, p.eeg);
      Var diff = g.sub(fake, features_leaf(g, p.mfcc));
      Var loss = g.sqrt(g.affine(g.mean_all(g.mul(diff, diff)), 1.0, 1e-12));
      const double lv = g.value(loss).data[0];
      if (!std::isfinite(lv))
        throw NumericError("regression_train: non-finite loss at epoch " +
                           std::to_string(epoch + 1));
      auto grads = g.backward(loss);
      nn::clip_global_norm(grads, cfg.clip_norm);
      nn::adam_step(result.store, grads, cfg.lr);
      total += lv;
    }
    result.curve.push_back(total / static_cast<double>(pairs.size()));
  }
  return result;
}

GanResult gan_train(const std::vector<SynthPair>& pairs, const GanConfig& cfg) {
  if (pairs.empty()) throw ConfigError("gan_train: no pairs");
  for (const auto& p : pairs) check_pair(p);
  Rng rng(cfg.seed);
  GanResult result;
  init_generator(result.gen, pairs[0].eeg.dim, cfg.hidden, cfg.out_dim, rng);
  init_discriminator(result.disc, pairs[0].eeg.dim, cfg.out_dim, cfg.hidden, rng);

  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double g_total = 0.0, d_total = 0.0;
    for (size_t idx : order) {
      auto [gl, dl] = cfg.mode == "wgan" ? wgan_train_step(result.gen, result.disc, pairs[idx], cfg)
                                         : gan_train_step(result.gen, result.disc, pairs[idx], cfg);
      g_total += gl;
      d_total += dl;
    }
    result.gen_curve.push_back(g_total / static_cast<double>(pairs.size()));
    result.disc_curve.push_back(d_total / static_cast<double>(pairs.size()));
  }
  return result;
}

metrics::SynthReport evaluate_synth(const ParameterStore& gen,
                                    const std::vector<SynthPair>& test) {
  std::vector<metrics::SynthEvalRow> rows;
  rows.reserve(test.size());
  for (const auto& p : test) {
    check_pair(p);
    dsp::FeatureSequence pred = generator_predict(gen, p.eeg);
    metrics::SynthEvalRow row;
    row.utt_id = p.utt_id;
    row.rmse = metrics::rmse(pred, p.mfcc);
    row.nrmse = metrics::normalized_rmse(pred, p.mfcc);
    row.mcd = metrics::mcd(pred, p.mfcc);
    rows.push_back(std::move(row));
  }
  return metrics::summarize_synth(std::move(rows));
}

}  // namespace neurotalk::synth
