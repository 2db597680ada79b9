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

#include "neurotalk/asr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "neurotalk/checkpoint.hpp"

namespace neurotalk::asr {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
using nn::log_add_exp;
}  // namespace

// ---- vocabulary ----------------------------------------------------------------

Vocabulary Vocabulary::characters() {
  Vocabulary v;
  v.mode = Mode::chars;
  for (char c = 'a'; c <= 'z'; ++c) v.tokens.emplace_back(1, c);
  v.tokens.emplace_back(1, ' ');
  v.tokens.emplace_back(1, '\'');
  v.blank = static_cast<int>(v.tokens.size());
  return v;
}

Vocabulary Vocabulary::words(const std::vector<std::string>& transcripts) {
  Vocabulary v;
  v.mode = Mode::words;
  std::set<std::string> uniq;
  for (const auto& t : transcripts) {
    std::string w;
    for (char c : t) {
      if (c == ' ') {
        if (!w.empty()) uniq.insert(w);
        w.clear();
      } else {
        w.push_back(c);
      }
    }
    if (!w.empty()) uniq.insert(w);
  }
  v.tokens.assign(uniq.begin(), uniq.end());
  v.start = static_cast<int>(v.tokens.size());
  v.end = v.start + 1;
  return v;
}

size_t Vocabulary::num_classes() const {
  if (mode == Mode::chars) return tokens.size() + 1;  // + blank
  return tokens.size() + 2;                           // + start, end
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> out;
  if (mode == Mode::chars) {
    for (char c : text) {
      bool found = false;
      for (size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i][0] == c) {
          out.push_back(static_cast<int>(i));
          found = true;
          break;
        }
      if (!found) throw ConfigError(std::string("vocabulary: unknown character '") + c + "'");
    }
  } else {
    std::vector<std::string> words;
    std::string w;
    for (char c : text) {
      if (c == ' ') {
        if (!w.empty()) words.push_back(w);
        w.clear();
      } else {
        w.push_back(c);
      }
    }
    if (!w.empty()) words.push_back(w);
    for (const auto& word : words) {
      auto it = std::lower_bound(tokens.begin(), tokens.end(), word);
      if (it == tokens.end() || *it != word)
        throw ConfigError("vocabulary: unknown word '" + word + "'");
      out.push_back(static_cast<int>(it - tokens.begin()));
    }
  }
  if (out.empty()) throw ConfigError("vocabulary: empty transcript");
  return out;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || static_cast<size_t>(id) >= tokens.size()) continue;  // specials
    if (mode == Mode::words && !out.empty()) out.push_back(' ');
    out += tokens[static_cast<size_t>(id)];
  }
  return out;
}

// ---- config ---------------------------------------------------------------------

AsrConfig AsrConfig::defaults(Kind kind) {
  AsrConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case Kind::ctc:
      cfg.hidden = 128;
      cfg.epochs = 800;
      cfg.optimizer = "adam";
      cfg.lr = 1e-3;
      break;
    case Kind::attention:
      cfg.hidden = 512;
      cfg.epochs = 150;
      cfg.optimizer = "adam";
      cfg.lr = 1e-3;
      break;
    case Kind::rnnt:
      cfg.hidden = 128;
      cfg.epochs = 200;
      cfg.optimizer = "sgd";
      cfg.lr = 1e-2;
      break;
  }
  return cfg;
}

// ---- parameter initialization ------------------------------------------------------

void init_ctc_params(ParameterStore& store, size_t input_dim, const Vocabulary& vocab,
                     const AsrConfig& cfg, Rng& rng) {
  if (vocab.blank < 0) throw ConfigError("ctc needs a blank token");
  nn::init_gru(store, "enc", input_dim, cfg.hidden, rng);
  store.add("out/w", nn::glorot_uniform(cfg.hidden, vocab.num_classes(), rng));
  store.add("out/b", Tensor::zeros({1, vocab.num_classes()}));
}

void init_attention_params(ParameterStore& store, size_t input_dim, const Vocabulary& vocab,
                           const AsrConfig& cfg, Rng& rng) {
  if (vocab.start < 0 || vocab.end < 0) throw ConfigError("attention needs start/end tokens");
  nn::init_gru(store, "enc", input_dim, cfg.hidden, rng);
  store.add("embed", nn::glorot_uniform(vocab.num_classes(), cfg.embed_dim, rng));
  nn::init_gru(store, "dec", cfg.embed_dim + cfg.hidden, cfg.hidden, rng);
  store.add("att/w_enc", nn::glorot_uniform(cfg.hidden, cfg.attn_dim, rng));
  store.add("att/w_dec", nn::glorot_uniform(cfg.hidden, cfg.attn_dim, rng));
  store.add("att/v", nn::glorot_uniform(cfg.attn_dim, 1, rng));
  store.add("out/w", nn::glorot_uniform(cfg.hidden, vocab.num_classes(), rng));
  store.add("out/b", Tensor::zeros({1, vocab.num_classes()}));
}

void init_rnnt_params(ParameterStore& store, size_t input_dim, const Vocabulary& vocab,
                      const AsrConfig& cfg, Rng& rng) {
  if (vocab.blank < 0) throw ConfigError("rnnt needs a blank token");
  nn::init_lstm(store, "enc", input_dim, cfg.hidden, rng);
  store.add("pred/embed", nn::glorot_uniform(vocab.num_classes(), cfg.embed_dim, rng));
  nn::init_lstm(store, "pred", cfg.embed_dim, cfg.hidden, rng);
  store.add("joint/w_enc", nn::glorot_uniform(cfg.hidden, cfg.joint_dim, rng));
  store.add("joint/w_pred", nn::glorot_uniform(cfg.hidden, cfg.joint_dim, rng));
  store.add("joint/b", Tensor::zeros({1, cfg.joint_dim}));
  store.add("joint/w_out", nn::glorot_uniform(cfg.joint_dim, vocab.num_classes(), rng));
  store.add("joint/b_out", Tensor::zeros({1, vocab.num_classes()}));
}

// ---- shared helpers -----------------------------------------------------------------

namespace {

Var features_leaf(Graph& g, const dsp::FeatureSequence& feats) {
  if (feats.num_frames() == 0) throw ConfigError("utterance has no feature frames");
  return g.leaf(Tensor({feats.num_frames(), feats.dim}, feats.frames));
}

}  // namespace

// ---- CTC -------------------------------------------------------------------------------

Var ctc_log_probs(Graph& g, const ParameterStore& store, const dsp::FeatureSequence& feats) {
  Var x = features_leaf(g, feats);
  nn::GruParams enc = nn::lease_gru(g, store, "enc");
  Var h = nn::gru_sequence(g, x, enc);
  Var logits = nn::dense(g, h, nn::lease(g, store, "out/w"), nn::lease(g, store, "out/b"));
  return g.log_softmax_rows(logits);
}

Var ctc_utterance_loss(Graph& g, const ParameterStore& store, const Utterance& utt,
                       const Vocabulary& vocab) {
  Var lp = ctc_log_probs(g, store, utt.features);
  return g.ctc_loss(lp, vocab.encode(utt.transcript), vocab.blank);
}

Hypothesis ctc_beam_search(const Tensor& log_probs, size_t beam_width, const Vocabulary& vocab) {
  if (beam_width < 1) throw ConfigError("ctc_beam_search: beam width must be >= 1");
  const size_t T = log_probs.rows(), V = log_probs.cols();
  const int blank = vocab.blank;

  struct Mass {
    double pb = kNegInf;   // collapsed prefix, last frame blank
    double pnb = kNegInf;  // collapsed prefix, last frame non-blank
    double total() const { return log_add_exp(pb, pnb); }
  };
  std::map<std::vector<int>, Mass> beams;
  beams[{}].pb = 0.0;

  for (size_t t = 0; t < T; ++t) {
    const double* lp = log_probs.data.data() + t * V;
    std::map<std::vector<int>, Mass> next;
    for (const auto& [prefix, m] : beams) {
      // stay on this prefix via blank
      Mass& same = next[prefix];
      same.pb = log_add_exp(same.pb, m.total() + lp[static_cast<size_t>(blank)]);
      // repeat of the trailing symbol collapses into the same prefix
      if (!prefix.empty()) {
        const int last = prefix.back();
        same.pnb = log_add_exp(same.pnb, m.pnb + lp[static_cast<size_t>(last)]);
      }
      // extend with each content symbol
      for (int c = 0; c < static_cast<int>(vocab.content_size()); ++c) {
        const double contrib = (!prefix.empty() && c == prefix.back())
                                   ? m.pb + lp[static_cast<size_t>(c)]
                                   : m.total() + lp[static_cast<size_t>(c)];
        if (contrib == kNegInf) continue;
        std::vector<int> ext = prefix;
        ext.push_back(c);
        Mass& nm = next[ext];
        nm.pnb = log_add_exp(nm.pnb, contrib);
      }
    }
    if (next.size() > beam_width) {
      std::vector<std::pair<std::vector<int>, Mass>> rows(next.begin(), next.end());
      std::stable_sort(rows.begin(), rows.end(),
                       [](const auto& a, const auto& b) { return a.second.total() > b.second.total(); });
      rows.resize(beam_width);
      next = std::map<std::vector<int>, Mass>(rows.begin(), rows.end());
    }
    beams = std::move(next);
  }

  Hypothesis best;
  double best_score = kNegInf;
  for (const auto& [prefix, m] : beams) {
    const double s = m.total();
    if (s > best_score) {
      best_score = s;
      best.ids = prefix;
    }
  }
  best.log_score = best_score;
  best.text = vocab.decode(best.ids);
  return best;
}

// ---- attention ----------------------------------------------------------------------------

AttentionStep attention_step(Graph& g, Var enc_out, Var enc_proj, Var dec_state, Var w_dec, Var v,
                             const std::string& scoring) {
  Var scores;
  if (scoring == "dot") {
    scores = g.matmul(enc_out, g.transpose(dec_state));  // (T,1)
  } else {
    Var e = g.tanh(g.add_rowvec(enc_proj, g.matmul(dec_state, w_dec)));
    scores = g.matmul(e, v);  // (T,1)
  }
  Var weights = g.softmax_rows(g.transpose(scores));  // (1,T)
  Var context = g.matmul(weights, enc_out);           // (1,H)
  return {context, weights};
}

namespace {

struct AttentionNet {
  nn::GruParams enc, dec;
  Var embed, w_enc, w_dec, v, out_w, out_b;
};

AttentionNet lease_attention(Graph& g, const ParameterStore& store) {
  AttentionNet net;
  net.enc = nn::lease_gru(g, store, "enc");
  net.dec = nn::lease_gru(g, store, "dec");
  net.embed = nn::lease(g, store, "embed");
  net.w_enc = nn::lease(g, store, "att/w_enc");
  net.w_dec = nn::lease(g, store, "att/w_dec");
  net.v = nn::lease(g, store, "att/v");
  net.out_w = nn::lease(g, store, "out/w");
  net.out_b = nn::lease(g, store, "out/b");
  return net;
}

// One decoder step: previous token + attention context -> new state + logits.
std::pair<Var, Var> attention_decoder_step(Graph& g, const AttentionNet& net, Var enc_out,
                                           Var enc_proj, Var dec_state, int prev_token,
                                           const std::string& scoring) {
  AttentionStep att = attention_step(g, enc_out, enc_proj, dec_state, net.w_dec, net.v, scoring);
  Var emb = g.rows(net.embed, static_cast<size_t>(prev_token), static_cast<size_t>(prev_token) + 1);
  Var x = g.concat_cols(emb, att.context);
  Var d = nn::gru_cell(g, x, dec_state, net.dec);
  Var logits = nn::dense(g, d, net.out_w, net.out_b);
  return {d, logits};
}

}  // namespace

Var attention_teacher_forced_loss(Graph& g, const ParameterStore& store, const Utterance& utt,
                                  const Vocabulary& vocab, const AsrConfig& cfg) {
  const std::vector<int> content = vocab.encode(utt.transcript);
  std::vector<int> inputs{vocab.start};
  inputs.insert(inputs.end(), content.begin(), content.end());
  std::vector<int> targets = content;
  targets.push_back(vocab.end);

  AttentionNet net = lease_attention(g, store);
  Var x = features_leaf(g, utt.features);
  Var enc_out = nn::gru_sequence(g, x, net.enc);
  Var enc_proj = g.matmul(enc_out, net.w_enc);

  Var d = g.leaf(Tensor::zeros({1, cfg.hidden}));
  std::vector<Var> logit_rows;
  logit_rows.reserve(inputs.size());
  for (int token : inputs) {
    auto [nd, logits] =
        attention_decoder_step(g, net, enc_out, enc_proj, d, token, cfg.attn_scoring);
    d = nd;
    logit_rows.push_back(logits);
  }
  Var lp = g.log_softmax_rows(g.concat_rows(logit_rows));
  return g.nll_mean(lp, targets);
}

Hypothesis attention_beam_decode(const ParameterStore& store, const dsp::FeatureSequence& feats,
                                 const Vocabulary& vocab, const AsrConfig& cfg, size_t beam,
                                 size_t max_len) {
  if (beam < 1 || max_len < 1) throw ConfigError("attention_beam_decode: beam and max_len >= 1");

  // run the encoder once; decoding steps use its values as leaves
  Tensor enc_out_t, enc_proj_t;
  {
    Graph g;
    nn::GruParams enc = nn::lease_gru(g, store, "enc");
    Var x = features_leaf(g, feats);
    Var enc_out = nn::gru_sequence(g, x, enc);
    Var enc_proj = g.matmul(enc_out, nn::lease(g, store, "att/w_enc"));
    enc_out_t = g.value(enc_out);
    enc_proj_t = g.value(enc_proj);
  }

  struct Hyp {
    std::vector<int> ids;
    double logp = 0.0;
    Tensor state;
    bool ended = false;
    double norm() const {
      const size_t len = ids.size() + (ended ? 1 : 0);
      return logp / static_cast<double>(std::max<size_t>(len, 1));
    }
  };

  std::vector<Hyp> hyps{{{}, 0.0, Tensor::zeros({1, cfg.hidden}), false}};
  for (size_t step = 0; step < max_len; ++step) {
    std::vector<Hyp> candidates;
    bool any_live = false;
    for (const Hyp& h : hyps) {
      if (h.ended) {
        candidates.push_back(h);
        continue;
      }
      any_live = true;
      Graph g;
      AttentionNet net = lease_attention(g, store);
      Var enc_out = g.leaf(enc_out_t);
      Var enc_proj = g.leaf(enc_proj_t);
      Var d = g.leaf(h.state);
      const int prev = h.ids.empty() ? vocab.start : h.ids.back();
      auto [nd, logits] = attention_decoder_step(g, net, enc_out, enc_proj, d, prev,
                                                 cfg.attn_scoring);
      Var lp = g.log_softmax_rows(logits);
      const Tensor& row = g.value(lp);
      const Tensor& state = g.value(nd);
      for (int k = 0; k < static_cast<int>(vocab.content_size()); ++k) {
        Hyp ext = h;
        ext.ids.push_back(k);
        ext.logp += row.data[static_cast<size_t>(k)];
        ext.state = state;
        candidates.push_back(std::move(ext));
      }
      Hyp done = h;
      done.ended = true;
      done.logp += row.data[static_cast<size_t>(vocab.end)];
      candidates.push_back(std::move(done));
    }
    if (!any_live) break;
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hyp& a, const Hyp& b) { return a.norm() > b.norm(); });
    if (candidates.size() > beam) candidates.resize(beam);
    hyps = std::move(candidates);
  }

  const Hyp* best = nullptr;
  for (const Hyp& h : hyps)
    if (h.ended && (!best || h.norm() > best->norm())) best = &h;
  if (!best)
    for (const Hyp& h : hyps)
      if (!best || h.norm() > best->norm()) best = &h;

  Hypothesis out;
  out.ids = best->ids;
  out.log_score = best->norm();
  out.text = vocab.decode(out.ids);
  return out;
}

// ---- RNN-T -----------------------------------------------------------------------------------

Var rnnt_log_probs(Graph& g, const ParameterStore& store, const dsp::FeatureSequence& feats,
                   const std::vector<int>& labels, const Vocabulary& vocab) {
  Var x = features_leaf(g, feats);
  nn::LstmParams enc = nn::lease_lstm(g, store, "enc");
  Var f = nn::lstm_sequence(g, x, enc);  // (T,H)

  // prediction network input: blank-context start, then the label history
  Var embed = nn::lease(g, store, "pred/embed");
  std::vector<Var> rows{g.rows(embed, static_cast<size_t>(vocab.blank),
                               static_cast<size_t>(vocab.blank) + 1)};
  for (int id : labels)
    rows.push_back(g.rows(embed, static_cast<size_t>(id), static_cast<size_t>(id) + 1));
  nn::LstmParams pred = nn::lease_lstm(g, store, "pred");
  Var gpred = nn::lstm_sequence(g, g.concat_rows(rows), pred);  // (U+1,H)

  Var fe = g.matmul(f, nn::lease(g, store, "joint/w_enc"));
  Var ge = g.add_rowvec(g.matmul(gpred, nn::lease(g, store, "joint/w_pred")),
                        nn::lease(g, store, "joint/b"));
  Var joint = g.tanh(g.pairwise_sum(fe, ge));  // (T,U+1,A)
  const size_t T = feats.num_frames(), U1 = labels.size() + 1;
  Var flat = g.reshape(joint, {T * U1, g.value(joint).shape[2]});
  Var logits = nn::dense(g, flat, nn::lease(g, store, "joint/w_out"),
                         nn::lease(g, store, "joint/b_out"));
  Var lp = g.log_softmax_rows(logits);
  return g.reshape(lp, {T, U1, vocab.num_classes()});
}

Var rnnt_utterance_loss(Graph& g, const ParameterStore& store, const Utterance& utt,
                        const Vocabulary& vocab) {
  const std::vector<int> labels = vocab.encode(utt.transcript);
  Var lp = rnnt_log_probs(g, store, utt.features, labels, vocab);
  return g.rnnt_loss(lp, labels, vocab.blank);
}

namespace {

struct PredState {
  Tensor h, c, out;  // lstm state and its output row
};

// Incremental prediction-network runner with a per-prefix cache.
class PredNet {
public:
  PredNet(const ParameterStore& store, const Vocabulary& vocab, size_t hidden)
      : store_(store), vocab_(vocab), hidden_(hidden) {}

  const PredState& state_for(const std::vector<int>& prefix) {
    auto it = cache_.find(prefix);
    if (it != cache_.end()) return it->second;
    PredState st;
    if (prefix.empty()) {
      st = step(Tensor::zeros({1, hidden_}), Tensor::zeros({1, hidden_}), vocab_.blank);
    } else {
      std::vector<int> parent(prefix.begin(), prefix.end() - 1);
      const PredState& ps = state_for(parent);
      st = step(ps.h, ps.c, prefix.back());
    }
    return cache_.emplace(prefix, std::move(st)).first->second;
  }

private:
  PredState step(const Tensor& h, const Tensor& c, int token) {
    Graph g;
    nn::LstmParams pred = nn::lease_lstm(g, store_, "pred");
    Var embed = nn::lease(g, store_, "pred/embed");
    Var x = g.rows(embed, static_cast<size_t>(token), static_cast<size_t>(token) + 1);
    auto [nh, nc] = nn::lstm_cell(g, x, g.leaf(h), g.leaf(c), pred);
    return {g.value(nh), g.value(nc), g.value(nh)};
  }

  const ParameterStore& store_;
  const Vocabulary& vocab_;
  size_t hidden_;
  std::map<std::vector<int>, PredState> cache_;
};

// joint log-probs for one (frame, prediction-state) pair, plain math
std::vector<double> joint_log_probs(const ParameterStore& store, const Tensor& enc_row,
                                    const Tensor& pred_row, size_t classes) {
  const Tensor& w_enc = store.at("joint/w_enc");
  const Tensor& w_pred = store.at("joint/w_pred");
  const Tensor& b = store.at("joint/b");
  const Tensor& w_out = store.at("joint/w_out");
  const Tensor& b_out = store.at("joint/b_out");
  const size_t A = w_enc.cols();
  std::vector<double> z(A, 0.0);
  for (size_t j = 0; j < A; ++j) {
    double acc = b.data[j];
    for (size_t i = 0; i < w_enc.rows(); ++i) acc += enc_row.data[i] * w_enc.data[i * A + j];
    for (size_t i = 0; i < w_pred.rows(); ++i) acc += pred_row.data[i] * w_pred.data[i * A + j];
    z[j] = std::tanh(acc);
  }
  std::vector<double> logits(classes, 0.0);
  for (size_t k = 0; k < classes; ++k) {
    double acc = b_out.data[k];
    for (size_t j = 0; j < A; ++j) acc += z[j] * w_out.data[j * classes + k];
    logits[k] = acc;
  }
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double lse = 0.0;
  for (double v : logits) lse += std::exp(v - mx);
  lse = mx + std::log(lse);
  for (double& v : logits) v -= lse;
  return logits;
}

}  // namespace

Hypothesis rnnt_beam_search(const ParameterStore& store, const dsp::FeatureSequence& feats,
                            const Vocabulary& vocab, const AsrConfig& cfg, size_t beam) {
  if (beam < 1) throw ConfigError("rnnt_beam_search: beam width must be >= 1");
  Tensor enc_out;
  {
    Graph g;
    nn::LstmParams enc = nn::lease_lstm(g, store, "enc");
    enc_out = g.value(nn::lstm_sequence(g, features_leaf(g, feats), enc));
  }
  const size_t T = feats.num_frames();
  const size_t classes = vocab.num_classes();
  PredNet pred(store, vocab, cfg.hidden);

  auto prune = [&](std::map<std::vector<int>, double>& m) {
    if (m.size() <= beam) return;
    std::vector<std::pair<std::vector<int>, double>> rows(m.begin(), m.end());
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    rows.resize(beam);
    m = std::map<std::vector<int>, double>(rows.begin(), rows.end());
  };

  std::map<std::vector<int>, double> frontier;
  frontier[{}] = 0.0;
  for (size_t t = 0; t < T; ++t) {
    Tensor enc_row({1, enc_out.cols()},
                   std::vector<double>(enc_out.data.begin() + t * enc_out.cols(),
                                       enc_out.data.begin() + (t + 1) * enc_out.cols()));
    std::map<std::vector<int>, std::vector<double>> lp_cache;
    auto lp_for = [&](const std::vector<int>& prefix) -> const std::vector<double>& {
      auto it = lp_cache.find(prefix);
      if (it != lp_cache.end()) return it->second;
      const PredState& st = pred.state_for(prefix);
      return lp_cache.emplace(prefix, joint_log_probs(store, enc_row, st.out, classes))
          .first->second;
    };

    // emission closure inside frame t, then one blank step to t+1
    std::map<std::vector<int>, double> expanded = frontier;
    std::map<std::vector<int>, double> layer = frontier;
    for (size_t depth = 0; depth < cfg.max_decode_len && !layer.empty(); ++depth) {
      std::map<std::vector<int>, double> next_layer;
      for (const auto& [prefix, lp] : layer) {
        if (prefix.size() >= cfg.max_decode_len) continue;
        const auto& row = lp_for(prefix);
        for (int k = 0; k < static_cast<int>(vocab.content_size()); ++k) {
          std::vector<int> ext = prefix;
          ext.push_back(k);
          const double val = lp + row[static_cast<size_t>(k)];
          auto [it, inserted] = next_layer.emplace(ext, val);
          if (!inserted) it->second = log_add_exp(it->second, val);
          auto [eit, einserted] = expanded.emplace(std::move(ext), val);
          if (!einserted) eit->second = log_add_exp(eit->second, val);
        }
      }
      prune(next_layer);
      layer = std::move(next_layer);
    }
    std::map<std::vector<int>, double> next;
    for (const auto& [prefix, lp] : expanded)
      next[prefix] = lp + lp_for(prefix)[static_cast<size_t>(vocab.blank)];
    prune(next);
    frontier = std::move(next);
  }

  Hypothesis best;
  double best_score = kNegInf;
  for (const auto& [prefix, lp] : frontier) {
    if (lp > best_score) {
      best_score = lp;
      best.ids = prefix;
    }
  }
  best.log_score = best_score;
  best.text = vocab.decode(best.ids);
  return best;
}

// ---- training ------------------------------------------------------------------------------

TrainResult train_asr(const std::vector<Utterance>& train_set, const Vocabulary& vocab,
                      const AsrConfig& cfg, const std::string& checkpoint_dir) {
  if (train_set.empty()) throw ConfigError("train_asr: empty training set");
  const size_t input_dim = train_set[0].features.dim;
  for (const auto& u : train_set)
    if (u.features.dim != input_dim)
      throw ShapeError("train_asr: feature dim differs across utterances");

  Rng rng(cfg.seed);
  TrainResult result;
  switch (cfg.kind) {
    case AsrConfig::Kind::ctc: init_ctc_params(result.store, input_dim, vocab, cfg, rng); break;
    case AsrConfig::Kind::attention:
      init_attention_params(result.store, input_dim, vocab, cfg, rng);
      break;
    case AsrConfig::Kind::rnnt: init_rnnt_params(result.store, input_dim, vocab, cfg, rng); break;
  }

  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (size_t idx : order) {
      const Utterance& utt = train_set[idx];
      Graph g;
      Var loss;
      switch (cfg.kind) {
        case AsrConfig::Kind::ctc: loss = ctc_utterance_loss(g, result.store, utt, vocab); break;
        case AsrConfig::Kind::attention:
          loss = attention_teacher_forced_loss(g, result.store, utt, vocab, cfg);
          break;
        case AsrConfig::Kind::rnnt:
          loss = rnnt_utterance_loss(g, result.store, utt, vocab);
          break;
      }
      const double lv = g.value(loss).data[0];
      if (!std::isfinite(lv))
        throw NumericError("train_asr: non-finite loss at epoch " + std::to_string(epoch + 1) +
                           " (lr " + std::to_string(cfg.lr) + ")");
      auto grads = g.backward(loss);
      nn::clip_global_norm(grads, cfg.clip_norm);
      if (cfg.optimizer == "adam")
        nn::adam_step(result.store, grads, cfg.lr);
      else
        nn::sgd_step(result.store, grads, cfg.lr);
      total += lv;
    }
    result.loss_curve.push_back(total / static_cast<double>(train_set.size()));
    if (!checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
        (epoch + 1) % cfg.checkpoint_every == 0)
      nn::save_checkpoint(result.store,
                          checkpoint_dir + "/ckpt_epoch_" + std::to_string(epoch + 1) + ".ntck");
  }
  if (!checkpoint_dir.empty()) nn::save_checkpoint(result.store, checkpoint_dir + "/model.ntck");
  return result;
}

Hypothesis decode_utterance(const ParameterStore& store, const dsp::FeatureSequence& feats,
                            const Vocabulary& vocab, const AsrConfig& cfg) {
  switch (cfg.kind) {
    case AsrConfig::Kind::ctc: {
      Graph g;
      Var lp = ctc_log_probs(g, store, feats);
      return ctc_beam_search(g.value(lp), cfg.beam, vocab);
    }
    case AsrConfig::Kind::attention:
      return attention_beam_decode(store, feats, vocab, cfg, cfg.beam, cfg.max_decode_len);
    case AsrConfig::Kind::rnnt: return rnnt_beam_search(store, feats, vocab, cfg, cfg.beam);
  }
  throw ConfigError("decode_utterance: unknown model kind");
}

}  // namespace neurotalk::asr
