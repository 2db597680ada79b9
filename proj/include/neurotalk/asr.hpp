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

#include <optional>
#include <string>
#include <vector>

#include "neurotalk/dsp.hpp"
#include "neurotalk/rnn.hpp"

namespace neurotalk::asr {

using nn::Graph;
using nn::ParameterStore;
using nn::Tensor;
using nn::Var;

/// Token inventory. Content tokens get dense ids from 0; specials sit after
/// them (blank for the alignment models, start/end for the attention model).
struct Vocabulary {
  enum class Mode { chars, words };
  Mode mode = Mode::chars;
  std::vector<std::string> tokens;
  int blank = -1;
  int start = -1;
  int end = -1;

  /// Lowercase letters, space and apostrophe, plus a blank.
  static Vocabulary characters();
  /// Word inventory from training transcripts, plus start/end.
  static Vocabulary words(const std::vector<std::string>& transcripts);

  size_t content_size() const { return tokens.size(); }
  /// Class count for model output layers (content + specials in use).
  size_t num_classes() const;
  std::vector<int> encode(const std::string& text) const;
  std::string decode(const std::vector<int>& ids) const;
};

struct Utterance {
  std::string utt_id;
  dsp::FeatureSequence features;
  std::string transcript;
  int subject_id = 0;
  std::string condition;  // spoken | listen | listen+spoken
};

struct Hypothesis {
  std::vector<int> ids;
  double log_score = 0.0;
  std::string text;
};

struct AsrConfig {
  enum class Kind { ctc, attention, rnnt };
  Kind kind = Kind::ctc;
  size_t hidden = 128;
  size_t embed_dim = 64;
  size_t attn_dim = 64;        // additive-attention projection width
  size_t joint_dim = 64;       // rnnt joint width
  std::string attn_scoring = "additive";  // or "dot"
  size_t epochs = 800;
  double lr = 1e-3;
  std::string optimizer = "adam";
  size_t beam = 8;
  size_t max_decode_len = 16;
  double clip_norm = 5.0;
  size_t checkpoint_every = 0;  // 0: final checkpoint only
  uint64_t seed = 1;

  /// Paper presets: ctc GRU-128/800 epochs/adam, attention GRU-512/150/adam,
  /// rnnt LSTM-128/200/sgd.
  static AsrConfig defaults(Kind kind);
};

// ---- parameter initialization -----------------------------------------------

void init_ctc_params(ParameterStore& store, size_t input_dim, const Vocabulary& vocab,
                     const AsrConfig& cfg, Rng& rng);
void init_attention_params(ParameterStore& store, size_t input_dim, const Vocabulary& vocab,
                           const AsrConfig& cfg, Rng& rng);
void init_rnnt_params(ParameterStore& store, size_t input_dim, const Vocabulary& vocab,
                      const AsrConfig& cfg, Rng& rng);

// ---- CTC ---------------------------------------------------------------------

/// Encoder + projection: per-frame class log-probabilities (T, V+1).
Var ctc_log_probs(Graph& g, const ParameterStore& store, const dsp::FeatureSequence& feats);
Var ctc_utterance_loss(Graph& g, const ParameterStore& store, const Utterance& utt,
                       const Vocabulary& vocab);
/// Prefix beam search over collapsed strings with blank/non-blank mass split.
Hypothesis ctc_beam_search(const Tensor& log_probs, size_t beam_width, const Vocabulary& vocab);

// ---- attention --------------------------------------------------------------

struct AttentionStep {
  Var context;  // (1,H)
  Var weights;  // (1,T), sums to 1
};

/// Additive scoring e_t = v . tanh(W_e h_t + W_d d); enc_proj is the
/// precomputed W_e h. The dot variant scores e_t = h_t . d.
AttentionStep attention_step(Graph& g, Var enc_out, Var enc_proj, Var dec_state, Var w_dec, Var v,
                             const std::string& scoring = "additive");

Var attention_teacher_forced_loss(Graph& g, const ParameterStore& store, const Utterance& utt,
                                  const Vocabulary& vocab, const AsrConfig& cfg);
Hypothesis attention_beam_decode(const ParameterStore& store, const dsp::FeatureSequence& feats,
                                 const Vocabulary& vocab, const AsrConfig& cfg, size_t beam,
                                 size_t max_len);

// ---- RNN-T -------------------------------------------------------------------

/// Joint-network log-probabilities over the (T, U+1) lattice; prediction row
/// 0 is the blank-context start state.
Var rnnt_log_probs(Graph& g, const ParameterStore& store, const dsp::FeatureSequence& feats,
                   const std::vector<int>& labels, const Vocabulary& vocab);
Var rnnt_utterance_loss(Graph& g, const ParameterStore& store, const Utterance& utt,
                        const Vocabulary& vocab);
/// Time-synchronous transducer beam search (emission loop per frame, blank
/// mass carried forward, prefixes merged by label sequence).
Hypothesis rnnt_beam_search(const ParameterStore& store, const dsp::FeatureSequence& feats,
                            const Vocabulary& vocab, const AsrConfig& cfg, size_t beam);

// ---- training -----------------------------------------------------------------

struct TrainResult {
  ParameterStore store;
  std::vector<double> loss_curve;  // mean train loss per epoch
};

/// Per-utterance training with seeded shuffling, global-norm clipping at
/// cfg.clip_norm and the configured optimizer. NaN losses abort with epoch
/// and learning-rate diagnostics. Deterministic per seed.
TrainResult train_asr(const std::vector<Utterance>& train_set, const Vocabulary& vocab,
                      const AsrConfig& cfg, const std::string& checkpoint_dir = "");

/// Decodes one utterance with the model kind from cfg.
Hypothesis decode_utterance(const ParameterStore& store, const dsp::FeatureSequence& feats,
                            const Vocabulary& vocab, const AsrConfig& cfg);

}  // namespace neurotalk::asr
