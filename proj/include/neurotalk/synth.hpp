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
#include <vector>

#include "neurotalk/metrics.hpp"
#include "neurotalk/rnn.hpp"

namespace neurotalk::synth {

using nn::Graph;
using nn::ParameterStore;
using nn::Var;

/// Aligned (EEG features, target MFCC) sequences for one utterance.
struct SynthPair {
  std::string utt_id;
  dsp::FeatureSequence eeg;
  dsp::FeatureSequence mfcc;  // dim 13
};

struct RegressionConfig {
  size_t hidden = 128;  // two stacked LSTM layers of this width
  size_t out_dim = 13;
  size_t epochs = 200;
  double lr = 1e-3;
  double clip_norm = 5.0;
  uint64_t seed = 1;
};

struct GanConfig {
  std::string mode = "gan";  // gan | wgan
  size_t hidden = 128;
  size_t out_dim = 13;
  size_t epochs = 500;
  double lr = 1e-4;
  double clip_c = 0.01;     // wgan weight clamp
  size_t critic_steps = 5;  // wgan critic updates per generator update
  double clip_norm = 5.0;
  uint64_t seed = 1;
};

// Generator / regressor: two stacked LSTMs plus a per-frame dense(13).
// Parameters live under "gen/...", the discriminator under "disc/...".

void init_generator(ParameterStore& store, size_t eeg_dim, size_t hidden, size_t out_dim,
                    Rng& rng);
void init_discriminator(ParameterStore& store, size_t eeg_dim, size_t mfcc_dim, size_t hidden,
                        Rng& rng);

/// Frame-synchronous generator pass: (T, eeg_dim) -> (T, 13).
Var generator_forward(Graph& g, const ParameterStore& store, const dsp::FeatureSequence& eeg);

/// Parallel LSTM encoders over each stream, concatenated into a merge LSTM;
/// last step through a dense head. Sigmoid only in gan mode.
Var discriminator_forward(Graph& g, const ParameterStore& store, const dsp::FeatureSequence& eeg,
                          Var mfcc, bool sigmoid_output);

/// Plain-tensor generator inference. Missing generator weights mean the model
/// was never trained.
dsp::FeatureSequence generator_predict(const ParameterStore& store,
                                       const dsp::FeatureSequence& eeg);

// loss formulas (log-clamped at 1e-12)
double gan_generator_loss(double p_fake);
double gan_discriminator_loss(double p_real, double p_fake);

/// One adversarial round on a single utterance: discriminator update on the
/// (real, fake) pairs with a detached fake, then a generator update through
/// the frozen discriminator. Returns (g_loss, d_loss).
std::pair<double, double> gan_train_step(ParameterStore& gen, ParameterStore& disc,
                                         const SynthPair& pair, const GanConfig& cfg);

/// WGAN round: cfg.critic_steps critic updates (loss = score(fake) -
/// score(real), weights clamped to [-clip_c, clip_c] afterwards), then one
/// generator update with loss -score(fake).
std::pair<double, double> wgan_train_step(ParameterStore& gen, ParameterStore& disc,
                                          const SynthPair& pair, const GanConfig& cfg);

struct RegressionResult {
  ParameterStore store;
  std::vector<double> curve;  // per-epoch mean RMSE loss
};

/// Minimizes rmse over aligned pairs; deterministic per seed.
RegressionResult regression_train(const std::vector<SynthPair>& pairs,
                                  const RegressionConfig& cfg);

struct GanResult {
  ParameterStore gen;
  ParameterStore disc;
  std::vector<double> gen_curve;
  std::vector<double> disc_curve;
};

GanResult gan_train(const std::vector<SynthPair>& pairs, const GanConfig& cfg);

/// Applies the generator to held-out EEG and scores RMSE / normalized RMSE /
/// MCD per sample.
metrics::SynthReport evaluate_synth(const ParameterStore& gen,
                                    const std::vector<SynthPair>& test);

}  // namespace neurotalk::synth
