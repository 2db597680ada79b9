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

#include "neurotalk/cli.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "neurotalk/checkpoint.hpp"
#include "neurotalk/corpus.hpp"
#include "neurotalk/dimred.hpp"
#include "neurotalk/metrics.hpp"
#include "neurotalk/synth.hpp"

namespace neurotalk::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// ---- config -----------------------------------------------------------------

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  j["corpus_dir"] = corpus_dir;
  j["feature_set"] = feature_set;
  j["condition"] = condition;
  j["model"] = model;
  j["split"] = split;
  j["train_subjects"] = train_subjects;
  j["val_subjects"] = val_subjects;
  j["test_subjects"] = test_subjects;
  j["sentences"] = sentences;
  j["epochs"] = epochs;
  j["hidden"] = hidden;
  j["beam"] = beam;
  j["lr"] = lr;
  j["seed"] = seed;
  j["split_seed"] = split_seed;
  j["jobs"] = jobs;
  j["channels"] = channels;
  j["out_dir"] = out_dir;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  ExperimentConfig c;
  c.corpus_dir = j.value("corpus_dir", c.corpus_dir);
  c.feature_set = j.value("feature_set", c.feature_set);
  c.condition = j.value("condition", c.condition);
  c.model = j.value("model", c.model);
  c.split = j.value("split", c.split);
  c.train_subjects = j.value("train_subjects", c.train_subjects);
  c.val_subjects = j.value("val_subjects", c.val_subjects);
  c.test_subjects = j.value("test_subjects", c.test_subjects);
  c.sentences = j.value("sentences", c.sentences);
  c.epochs = j.value("epochs", c.epochs);
  c.hidden = j.value("hidden", c.hidden);
  c.beam = j.value("beam", c.beam);
  c.lr = j.value("lr", c.lr);
  c.seed = j.value("seed", c.seed);
  c.split_seed = j.value("split_seed", c.split_seed);
  c.jobs = j.value("jobs", c.jobs);
  c.channels = j.value("channels", c.channels);
  c.out_dir = j.value("out_dir", c.out_dir);
  return c;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

void require_exists(const std::string& path, const std::string& produced_by) {
  if (!fs::exists(path))
    throw PrerequisiteError("missing " + path + "; run `neurotalk " + produced_by + "` first");
}

std::vector<corpus::ManifestRecord> load_records(const std::string& corpus_dir, int sentences) {
  const std::string manifest = (fs::path(corpus_dir) / "manifest.jsonl").string();
  require_exists(manifest, "gen");
  auto records = corpus::read_manifest(manifest);
  if (sentences > 0) {
    std::vector<corpus::ManifestRecord> kept;
    for (auto& r : records)
      if (r.sentence_id < sentences) kept.push_back(std::move(r));
    if (kept.empty())
      throw ConfigError("sentence limit " + std::to_string(sentences) + " keeps no utterances");
    records = std::move(kept);
  }
  return records;
}

corpus::SplitPlan plan_from(const ExperimentConfig& cfg) {
  corpus::SplitPlan plan;
  if (cfg.split == "random") {
    plan.strategy = corpus::SplitPlan::Strategy::random_80_10_10;
  } else if (cfg.split == "subjects") {
    plan.strategy = corpus::SplitPlan::Strategy::subject_blocks;
    plan.train_subjects = cfg.train_subjects;
    plan.val_subjects = cfg.val_subjects;
    plan.test_subjects = cfg.test_subjects;
  } else {
    throw ConfigError("unknown split strategy " + cfg.split);
  }
  return plan;
}

// bounded worker pool over an index range; results must be written to
// per-index slots or per-index files so scheduling never shows in the output
void parallel_for(size_t count, size_t jobs, const std::function<void(size_t)>& fn) {
  jobs = std::max<size_t>(1, std::min(jobs, count == 0 ? 1 : count));
  if (jobs == 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (size_t w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      try {
        for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os << text;
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

void save_vocab(const asr::Vocabulary& vocab, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  os << "mode=" << (vocab.mode == asr::Vocabulary::Mode::chars ? "chars" : "words") << "\n";
  for (const auto& t : vocab.tokens) os << t << "\n";
}

asr::Vocabulary load_vocab(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read vocabulary " + path);
  std::string line;
  std::getline(is, line);
  asr::Vocabulary v;
  if (line == "mode=chars") {
    v = asr::Vocabulary::characters();
    return v;  // the character inventory is fixed
  }
  if (line != "mode=words") throw IoError(path + ": bad vocabulary header");
  v.mode = asr::Vocabulary::Mode::words;
  while (std::getline(is, line))
    if (!line.empty()) v.tokens.push_back(line);
  v.start = static_cast<int>(v.tokens.size());
  v.end = v.start + 1;
  return v;
}

void write_loss_curve(const std::vector<double>& curve, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  os << "epoch,loss\n";
  for (size_t i = 0; i < curve.size(); ++i) os << (i + 1) << ',' << fmt(curve[i]) << '\n';
}

asr::AsrConfig asr_config_from(const ExperimentConfig& cfg) {
  asr::AsrConfig::Kind kind;
  if (cfg.model == "ctc")
    kind = asr::AsrConfig::Kind::ctc;
  else if (cfg.model == "attention")
    kind = asr::AsrConfig::Kind::attention;
  else if (cfg.model == "rnnt")
    kind = asr::AsrConfig::Kind::rnnt;
  else
    throw ConfigError("not an ASR model: " + cfg.model);
  asr::AsrConfig a = asr::AsrConfig::defaults(kind);
  if (cfg.epochs > 0) a.epochs = cfg.epochs;
  if (cfg.hidden > 0) a.hidden = cfg.hidden;
  if (cfg.lr > 0.0) a.lr = cfg.lr;
  a.beam = cfg.beam;
  a.seed = cfg.seed;
  return a;
}

// ---- stages -------------------------------------------------------------------

int cmd_gen(const ExperimentConfig& cfg, int subjects, int reps, bool listen, double noise_level,
            const std::string& sentences_file, int sentence_count) {
  corpus::SyntheticCorpusSpec spec;
  spec.n_subjects = subjects;
  spec.repetitions = reps;
  spec.listen_condition = listen;
  spec.seed = cfg.seed;
  spec.noise_level = noise_level;
  auto all = sentences_file.empty() ? corpus::default_sentences()
                                    : corpus::load_sentences(sentences_file);
  const size_t keep = sentence_count > 0
                          ? std::min<size_t>(static_cast<size_t>(sentence_count), all.size())
                          : all.size();
  spec.sentences.assign(all.begin(), all.begin() + static_cast<long>(keep));
  auto records = corpus::generate_synthetic_corpus(spec, cfg.out_dir);
  std::cout << "generated " << records.size() << " utterances under " << cfg.out_dir << "\n";
  return 0;
}

int cmd_featurize(const ExperimentConfig& cfg, const std::string& kind,
                  const std::string& out_dir, const std::string& montage_path, size_t window_len,
                  size_t hop) {
  auto records = load_records(cfg.corpus_dir, cfg.sentences);
  fs::create_directories(out_dir);

  std::atomic<size_t> degenerate_total{0};
  parallel_for(records.size(), cfg.jobs, [&](size_t i) {
    const auto& r = records[i];
    const std::string out_path = out_dir + "/" + r.utt_id + ".ntfs";
    if (kind == "audio") {
      audio::AudioClip clip =
          audio::read_wav((fs::path(cfg.corpus_dir) / r.audio_path).string());
      dsp::write_features(audio::mfcc13(clip), out_path);
      return;
    }
    dsp::RawEeg eeg = dsp::read_raw_eeg((fs::path(cfg.corpus_dir) / r.eeg_path).string());
    eeg = dsp::bandpass_iir(eeg, dsp::FilterSpec::bandpass(4, 0.1, 70.0));
    eeg = dsp::notch_60(eeg);
    if (!cfg.channels.empty()) {
      auto montage = montage_path.empty()
                         ? dsp::default_montage()
                         : dsp::load_montage(montage_path);
      eeg = dsp::select_channels(eeg, cfg.channels, montage);
    }
    dsp::ExtractResult res = dsp::extract_features(eeg, {window_len, hop}, cfg.feature_set);
    degenerate_total += res.degenerate_windows;
    dsp::write_features(res.features, out_path);
  });
  std::cout << "featurized " << records.size() << " utterances into " << out_dir;
  if (degenerate_total > 0) std::cout << " (degenerate windows: " << degenerate_total << ")";
  std::cout << "\n";
  return 0;
}

int cmd_reduce(const ExperimentConfig& cfg, const std::string& features_dir,
               const std::string& out_dir, int target_dim_override, bool deltas,
               size_t kpca_max_rows) {
  auto records = load_records(cfg.corpus_dir, cfg.sentences);
  require_exists(features_dir, "featurize");
  fs::create_directories(out_dir);

  corpus::Split sp = corpus::split(records, plan_from(cfg), cfg.split_seed);

  auto policy = dimred::dimension_policy(cfg.feature_set);
  size_t target = policy.value_or(0);
  if (target_dim_override > 0) target = static_cast<size_t>(target_dim_override);
  if (target_dim_override < 0) target = 0;  // forced keep

  auto load_feat = [&](const corpus::ManifestRecord& r) {
    const std::string p = features_dir + "/" + r.utt_id + ".ntfs";
    require_exists(p, "featurize");
    return dsp::read_features(p);
  };

  dimred::KpcaModel model;
  std::vector<double> mean, stddev;
  if (target > 0) {
    // gather training rows for scaler + kernel fit
    std::vector<double> rows;
    size_t dim = 0;
    for (const auto& r : sp.train) {
      dsp::FeatureSequence f = load_feat(r);
      if (dim == 0) dim = f.dim;
      if (f.dim != dim) throw ShapeError("inconsistent feature dims under " + features_dir);
      rows.insert(rows.end(), f.frames.begin(), f.frames.end());
    }
    const size_t n = rows.size() / dim;
    nn::Tensor train({n, dim}, std::move(rows));

    mean.assign(dim, 0.0);
    stddev.assign(dim, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < dim; ++j) mean[j] += train.at(i, j);
    for (double& v : mean) v /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < dim; ++j) {
        const double d = train.at(i, j) - mean[j];
        stddev[j] += d * d;
      }
    for (double& v : stddev) v = std::max(std::sqrt(v / static_cast<double>(n)), 1e-12);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < dim; ++j) train.at(i, j) = (train.at(i, j) - mean[j]) / stddev[j];

    model = dimred::fit_kpca(dimred::subsample_rows(train, kpca_max_rows, cfg.seed), target);
    if (model.reduced)
      std::cout << "note: usable eigenvalue count limited output dim to " << model.out_dim << "\n";

    std::map<std::string, nn::Tensor> extra;
    extra.emplace("scaler/mean", nn::Tensor({mean.size()}, mean));
    extra.emplace("scaler/std", nn::Tensor({stddev.size()}, stddev));
    dimred::save_kpca(model, out_dir + "/kpca.ntck");
    auto container = nn::read_tensor_container(out_dir + "/kpca.ntck");
    for (auto& [k, v] : extra) container.emplace(k, v);
    nn::write_tensor_container(container, out_dir + "/kpca.ntck");
  }

  parallel_for(records.size(), cfg.jobs, [&](size_t i) {
    const auto& r = records[i];
    dsp::FeatureSequence f = load_feat(r);
    dsp::FeatureSequence out;
    if (target > 0) {
      out.frame_rate_hz = f.frame_rate_hz;
      out.set_id = f.set_id;
      out.dim = model.out_dim;
      out.frames.resize(f.num_frames() * model.out_dim);
      std::vector<double> z(f.dim);
      for (size_t t = 0; t < f.num_frames(); ++t) {
        for (size_t j = 0; j < f.dim; ++j) z[j] = (f.frame(t)[j] - mean[j]) / stddev[j];
        auto proj = dimred::kpca_project(model, z);
        std::copy(proj.begin(), proj.end(), out.frame(t));
      }
    } else {
      out = f;  // policy keeps the original dimension
    }
    if (deltas) out = dsp::append_deltas(out);
    dsp::write_features(out, out_dir + "/" + r.utt_id + ".ntfs");
  });

  std::cout << "reduced features written to " << out_dir << " (dim "
            << (target > 0 ? model.out_dim : 0) << (target > 0 ? "" : " kept") << ", deltas "
            << (deltas ? "on" : "off") << ")\n";
  return 0;
}

int cmd_train_asr(const ExperimentConfig& cfg, const std::string& features_dir) {
  auto records = load_records(cfg.corpus_dir, cfg.sentences);
  corpus::Split sp = corpus::split(records, plan_from(cfg), cfg.split_seed);
  auto train_utts = corpus::build_condition_features(sp.train, features_dir, cfg.condition);
  if (train_utts.empty()) throw ConfigError("no training utterances for condition " + cfg.condition);

  asr::AsrConfig acfg = asr_config_from(cfg);
  asr::Vocabulary vocab;
  if (acfg.kind == asr::AsrConfig::Kind::attention) {
    std::vector<std::string> texts;
    for (const auto& u : train_utts) texts.push_back(u.transcript);
    vocab = asr::Vocabulary::words(texts);
  } else {
    vocab = asr::Vocabulary::characters();
  }

  fs::create_directories(cfg.out_dir);
  asr::TrainResult result = asr::train_asr(train_utts, vocab, acfg, cfg.out_dir);
  write_loss_curve(result.loss_curve, cfg.out_dir + "/loss_curve.csv");
  save_vocab(vocab, cfg.out_dir + "/vocab.txt");
  write_text(cfg.out_dir + "/config.json", cfg.to_json());
  std::cout << "trained " << cfg.model << " for " << acfg.epochs << " epochs; final loss "
            << (result.loss_curve.empty() ? std::string("n/a") : fmt(result.loss_curve.back()))
            << "; model in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_decode(const std::string& model_dir, const std::string& features_dir,
               const std::string& subset, const std::string& out_path, size_t jobs,
               size_t beam_override) {
  require_exists(model_dir + "/model.ntck", "train-asr");
  require_exists(model_dir + "/config.json", "train-asr");
  ExperimentConfig cfg = ExperimentConfig::from_json(read_text(model_dir + "/config.json"));
  asr::AsrConfig acfg = asr_config_from(cfg);
  if (beam_override > 0) acfg.beam = beam_override;
  asr::Vocabulary vocab = load_vocab(model_dir + "/vocab.txt");
  nn::ParameterStore store = nn::load_checkpoint(model_dir + "/model.ntck");

  auto records = load_records(cfg.corpus_dir, cfg.sentences);
  corpus::Split sp = corpus::split(records, plan_from(cfg), cfg.split_seed);
  const std::vector<corpus::ManifestRecord>* part = nullptr;
  if (subset == "train")
    part = &sp.train;
  else if (subset == "val")
    part = &sp.val;
  else if (subset == "test")
    part = &sp.test;
  else
    throw ConfigError("subset must be train, val or test");

  auto utts = corpus::build_condition_features(*part, features_dir, cfg.condition);
  std::vector<std::string> lines(utts.size());
  parallel_for(utts.size(), jobs, [&](size_t i) {
    asr::Hypothesis h = asr::decode_utterance(store, utts[i].features, vocab, acfg);
    lines[i] = utts[i].utt_id + "\t" + h.text + "\t" + fmt(h.log_score);
  });
  std::sort(lines.begin(), lines.end());
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw IoError("cannot write " + out_path);
  for (const auto& l : lines) os << l << "\n";
  std::cout << "decoded " << utts.size() << " utterances to " << out_path << "\n";
  return 0;
}

int cmd_train_synth(const ExperimentConfig& cfg, const std::string& eeg_features_dir,
                    const std::string& mfcc_features_dir) {
  auto records = load_records(cfg.corpus_dir, cfg.sentences);
  // the synthesis task pairs each utterance's EEG features with its own MFCC
  std::vector<synth::SynthPair> pairs;
  for (const auto& r : records) {
    if (cfg.condition != "both" && r.condition != cfg.condition) continue;
    synth::SynthPair p;
    p.utt_id = r.utt_id;
    const std::string eeg_p = eeg_features_dir + "/" + r.utt_id + ".ntfs";
    const std::string mfcc_p = mfcc_features_dir + "/" + r.utt_id + ".ntfs";
    require_exists(eeg_p, "featurize / reduce");
    require_exists(mfcc_p, "featurize --kind audio");
    p.eeg = dsp::read_features(eeg_p);
    p.mfcc = dsp::read_features(mfcc_p);
    const size_t frames = std::min(p.eeg.num_frames(), p.mfcc.num_frames());
    if (frames == 0) throw ConfigError("empty features for " + r.utt_id);
    p.eeg.frames.resize(frames * p.eeg.dim);
    p.mfcc.frames.resize(frames * p.mfcc.dim);
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw ConfigError("no pairs for condition " + cfg.condition);

  // 90/10 train/test split of the pair list
  Rng rng(cfg.split_seed);
  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const size_t n_train = std::max<size_t>(1, pairs.size() * 9 / 10);
  std::vector<synth::SynthPair> train, test;
  for (size_t i = 0; i < order.size(); ++i)
    (i < n_train ? train : test).push_back(pairs[order[i]]);
  if (test.empty()) test.push_back(train.back());

  fs::create_directories(cfg.out_dir);
  if (cfg.model == "lstm-reg") {
    synth::RegressionConfig rc;
    if (cfg.hidden > 0) rc.hidden = cfg.hidden;
    if (cfg.epochs > 0) rc.epochs = cfg.epochs;
    if (cfg.lr > 0.0) rc.lr = cfg.lr;
    rc.seed = cfg.seed;
    synth::RegressionResult r = synth::regression_train(train, rc);
    nn::save_checkpoint(r.store, cfg.out_dir + "/gen.ntck");
    write_loss_curve(r.curve, cfg.out_dir + "/loss_curve.csv");
  } else if (cfg.model == "gan" || cfg.model == "wgan") {
    synth::GanConfig gc;
    gc.mode = cfg.model;
    if (cfg.hidden > 0) gc.hidden = cfg.hidden;
    if (cfg.epochs > 0) gc.epochs = cfg.epochs;
    if (cfg.lr > 0.0) gc.lr = cfg.lr;
    gc.seed = cfg.seed;
    synth::GanResult r = synth::gan_train(train, gc);
    nn::save_checkpoint(r.gen, cfg.out_dir + "/gen.ntck");
    nn::save_checkpoint(r.disc, cfg.out_dir + "/disc.ntck");
    write_loss_curve(r.gen_curve, cfg.out_dir + "/loss_curve.csv");
    write_loss_curve(r.disc_curve, cfg.out_dir + "/disc_loss_curve.csv");
  } else {
    throw ConfigError("not a synthesis model: " + cfg.model);
  }

  // persist the held-out pair ids so eval sees the same split
  std::ofstream os(cfg.out_dir + "/test_ids.txt", std::ios::binary);
  for (const auto& p : test) os << p.utt_id << "\n";
  write_text(cfg.out_dir + "/config.json", cfg.to_json());
  std::cout << "trained " << cfg.model << " on " << train.size() << " pairs (" << test.size()
            << " held out); model in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_eval_asr(const std::string& decoded_path, const std::string& corpus_dir,
                 const std::string& out_path, bool word_level) {
  require_exists(decoded_path, "decode");
  auto records = load_records(corpus_dir, 0);
  std::map<std::string, std::string> ref_by_id;
  for (const auto& r : records) ref_by_id[r.utt_id] = r.transcript;

  std::vector<metrics::AsrEvalInput> pairs;
  std::ifstream is(decoded_path);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const size_t tab1 = line.find('\t');
    const size_t tab2 = line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos) throw IoError("malformed decode line: " + line);
    metrics::AsrEvalInput p;
    p.utt_id = line.substr(0, tab1);
    p.hypothesis = tab2 == std::string::npos ? line.substr(tab1 + 1)
                                             : line.substr(tab1 + 1, tab2 - tab1 - 1);
    // joined listen+spoken utterances carry both source ids
    std::string lookup = p.utt_id.substr(0, p.utt_id.find('+'));
    auto it = ref_by_id.find(lookup);
    if (it == ref_by_id.end()) throw ConfigError("utterance not in manifest: " + p.utt_id);
    p.reference = it->second;
    pairs.push_back(std::move(p));
  }
  metrics::AsrReport report = metrics::evaluate_asr(pairs, word_level);
  metrics::write_asr_report_csv(report, word_level ? "wer" : "cer", out_path);
  std::cout << (word_level ? "wer " : "cer ") << fmt(report.aggregate_rate) << " over "
            << report.rows.size() << " utterances; report " << out_path << "\n";
  return 0;
}

int cmd_eval_synth(const std::string& model_dir, const std::string& eeg_features_dir,
                   const std::string& mfcc_features_dir, const std::string& out_path,
                   const std::string& pred_dir) {
  require_exists(model_dir + "/gen.ntck", "train-synth");
  require_exists(model_dir + "/test_ids.txt", "train-synth");
  nn::ParameterStore gen = nn::load_checkpoint(model_dir + "/gen.ntck");

  std::vector<synth::SynthPair> test;
  std::ifstream ids(model_dir + "/test_ids.txt");
  std::string id;
  while (std::getline(ids, id)) {
    if (id.empty()) continue;
    synth::SynthPair p;
    p.utt_id = id;
    p.eeg = dsp::read_features(eeg_features_dir + "/" + id + ".ntfs");
    p.mfcc = dsp::read_features(mfcc_features_dir + "/" + id + ".ntfs");
    const size_t frames = std::min(p.eeg.num_frames(), p.mfcc.num_frames());
    p.eeg.frames.resize(frames * p.eeg.dim);
    p.mfcc.frames.resize(frames * p.mfcc.dim);
    test.push_back(std::move(p));
  }
  if (test.empty()) throw PrerequisiteError("empty held-out list in " + model_dir);

  if (!pred_dir.empty()) {
    fs::create_directories(pred_dir);
    for (const auto& p : test)
      dsp::write_features(synth::generator_predict(gen, p.eeg), pred_dir + "/" + p.utt_id + ".ntfs");
  }
  metrics::SynthReport report = synth::evaluate_synth(gen, test);
  metrics::write_synth_report_csv(report, out_path);
  std::cout << "avg rmse " << fmt(report.avg_rmse) << ", nrmse " << fmt(report.avg_nrmse)
            << ", mcd " << fmt(report.avg_mcd) << "; report " << out_path << "\n";
  return 0;
}

int cmd_sweep(const ExperimentConfig& base, const std::string& features_dir,
              const std::vector<int>& sentence_counts, const std::string& out_path) {
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw IoError("cannot write " + out_path);
  const bool word_level = base.model == "attention";
  os << "n_sentences,n_unique_chars,n_unique_words," << (word_level ? "wer" : "cer") << "\n";

  for (int count : sentence_counts) {
    ExperimentConfig cfg = base;
    cfg.sentences = count;
    cfg.out_dir = base.out_dir + "/sweep_" + std::to_string(count);
    fs::create_directories(cfg.out_dir);

    auto records = load_records(cfg.corpus_dir, count);
    std::set<char> chars;
    std::set<std::string> words;
    std::set<int> seen;
    for (const auto& r : records) {
      if (!seen.insert(r.sentence_id).second) continue;
      for (char c : r.transcript)
        if (c != ' ') chars.insert(c);
      for (const auto& w : metrics::split_words(r.transcript)) words.insert(w);
    }

    cmd_train_asr(cfg, features_dir);
    const std::string decoded = cfg.out_dir + "/decoded.tsv";
    cmd_decode(cfg.out_dir, features_dir, "test", decoded, cfg.jobs, 0);
    const std::string report = cfg.out_dir + "/report.csv";
    cmd_eval_asr(decoded, cfg.corpus_dir, report, word_level);

    // pull the aggregate rate back out of the report
    std::ifstream rs(report);
    std::string line, agg;
    while (std::getline(rs, line))
      if (line.rfind("aggregate,", 0) == 0) agg = line;
    const size_t c1 = agg.find(','), c2 = agg.find(',', c1 + 1);
    os << count << ',' << chars.size() << ',' << words.size() << ','
       << agg.substr(c1 + 1, c2 - c1 - 1) << "\n";
  }
  std::cout << "sweep table written to " << out_path << "\n";
  return 0;
}

int cmd_plotdata(const std::string& kind, const std::string& source, const std::string& out_path,
                 size_t max_rows, uint64_t seed) {
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw IoError("cannot write " + out_path);
  if (kind == "variance") {
    require_exists(source, "featurize");
    std::vector<double> rows;
    size_t dim = 0;
    for (const auto& entry : fs::directory_iterator(source)) {
      if (entry.path().extension() != ".ntfs") continue;
      dsp::FeatureSequence f = dsp::read_features(entry.path().string());
      if (dim == 0) dim = f.dim;
      if (f.dim != dim) throw ShapeError("mixed feature dims under " + source);
      rows.insert(rows.end(), f.frames.begin(), f.frames.end());
    }
    if (dim == 0) throw PrerequisiteError("no .ntfs files under " + source + "; run featurize");
    const size_t n_rows = rows.size() / dim;
    nn::Tensor x({n_rows, dim}, std::move(rows));
    x = dimred::subsample_rows(x, max_rows, seed);
    dimred::PcaModel pca = dimred::fit_pca(x);
    os << "component,cumulative_explained_variance\n";
    for (size_t k = 0; k < pca.explained.size(); ++k)
      os << (k + 1) << ',' << fmt(pca.explained[k]) << '\n';
  } else if (kind == "loss") {
    require_exists(source, "train-asr or train-synth");
    os << read_text(source);  // loss curves are already plot-ready csv
  } else if (kind == "nrmse") {
    require_exists(source, "eval --kind synth");
    std::ifstream is(source);
    std::string line;
    std::getline(is, line);  // header
    os << "sample,normalized_rmse\n";
    size_t i = 0;
    while (std::getline(is, line)) {
      if (line.empty() || line.rfind("aggregate,", 0) == 0) continue;
      const size_t c1 = line.find(','), c2 = line.find(',', c1 + 1),
                   c3 = line.find(',', c2 + 1);
      os << ++i << ',' << line.substr(c2 + 1, c3 - c2 - 1) << '\n';
    }
  } else {
    throw ConfigError("plotdata kind must be variance, loss or nrmse");
  }
  std::cout << "plot data written to " << out_path << "\n";
  return 0;
}

}  // namespace

// ---- argument wiring --------------------------------------------------------------

int run(int argc, const char* const* argv) {
  CLI::App app{"neurotalk: EEG-to-text and EEG-to-speech-feature pipeline on synthetic corpora"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  cfg.corpus_dir = env_or("NEUROTALK_DATA_DIR", "data");

  std::string config_path;
  app.add_option("--config", config_path, "JSON experiment config; flags override its values")
      ->expected(1);

  // shared flags registered on a subcommand by need
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--out", cfg.out_dir, "output directory or file");
    sub->add_option("--jobs", cfg.jobs, "utterance-level parallelism");
  };
  auto add_corpus = [&](CLI::App* sub) {
    sub->add_option("--corpus", cfg.corpus_dir, "corpus root (default $NEUROTALK_DATA_DIR)");
    sub->add_option("--sentences", cfg.sentences, "limit to the first N sentences");
  };
  auto add_split = [&](CLI::App* sub) {
    sub->add_option("--split", cfg.split, "random | subjects");
    sub->add_option("--split-seed", cfg.split_seed, "seed for the split shuffle");
    sub->add_option("--train-subjects", cfg.train_subjects, "block split: training subjects");
    sub->add_option("--val-subjects", cfg.val_subjects, "block split: validation subjects");
    sub->add_option("--test-subjects", cfg.test_subjects, "block split: test subjects");
  };

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic speech-EEG corpus");
  int subjects = 5, reps = 3, sentence_count = 0;
  bool listen = false;
  double noise_level = 0.05;
  std::string sentences_file;
  gen->add_option("--subjects", subjects, "number of subjects");
  gen->add_option("--reps", reps, "repetitions per sentence");
  gen->add_option("--sentences", sentence_count, "first N sentences of the list");
  gen->add_flag("--listen", listen, "also record the listen condition");
  gen->add_option("--noise", noise_level, "EEG pink-noise amplitude");
  gen->add_option("--sentences-file", sentences_file, "custom sentence list");
  gen->add_option("--seed", cfg.seed, "random seed");
  gen->add_option("--out", cfg.out_dir, "corpus output directory")->required();

  // featurize
  auto* feat = app.add_subcommand("featurize", "extract EEG or MFCC feature files");
  std::string feat_kind = "eeg", feat_out, montage_path;
  size_t window_len = 100, hop = 10;
  add_corpus(feat);
  add_common(feat);
  feat->add_option("--feature-set", cfg.feature_set, "EEG feature set 1|2|3");
  feat->add_option("--kind", feat_kind, "eeg | audio (MFCC targets)");
  feat->add_option("--features-out", feat_out, "feature directory (default <corpus>/features)");
  feat->add_option("--channels", cfg.channels, "channel subset, e.g. T7 T8");
  feat->add_option("--montage", montage_path, "montage file (default corpus montage)");
  feat->add_option("--window", window_len, "window length in samples");
  feat->add_option("--hop", hop, "hop in samples");

  // reduce
  auto* red = app.add_subcommand("reduce", "fit KPCA on the training split and project all");
  std::string red_features, red_out;
  int target_dim = 0;
  bool no_deltas = false;
  size_t kpca_max_rows = 2000;
  add_corpus(red);
  add_common(red);
  add_split(red);
  red->add_option("--feature-set", cfg.feature_set, "feature set whose policy applies");
  red->add_option("--features", red_features, "input feature directory")->required();
  red->add_option("--target-dim", target_dim, "override the policy (-1 forces keep)");
  red->add_flag("--no-deltas", no_deltas, "skip delta / delta-delta append");
  red->add_option("--kpca-max-rows", kpca_max_rows, "kernel-matrix row cap");

  // train-asr
  auto* tra = app.add_subcommand("train-asr", "train ctc | attention | rnnt");
  std::string tra_features;
  add_corpus(tra);
  add_common(tra);
  add_split(tra);
  tra->add_option("--features", tra_features, "feature directory")->required();
  tra->add_option("--model", cfg.model, "ctc | attention | rnnt");
  tra->add_option("--condition", cfg.condition, "spoken | listen | both");
  tra->add_option("--epochs", cfg.epochs, "training epochs (0: paper default)");
  tra->add_option("--hidden", cfg.hidden, "hidden size (0: paper default)");
  tra->add_option("--lr", cfg.lr, "learning rate (0: default)");
  tra->add_option("--beam", cfg.beam, "beam width for later decoding");

  // decode
  auto* dec = app.add_subcommand("decode", "beam-decode a split with a trained model");
  std::string dec_model_dir, dec_features, dec_subset = "test", dec_out = "decoded.tsv";
  size_t dec_beam = 0, dec_jobs = 1;
  dec->add_option("--model-dir", dec_model_dir, "train-asr output directory")->required();
  dec->add_option("--features", dec_features, "feature directory")->required();
  dec->add_option("--subset", dec_subset, "train | val | test");
  dec->add_option("--beam", dec_beam, "beam width override");
  dec->add_option("--jobs", dec_jobs, "parallel decoding workers");
  dec->add_option("--out", dec_out, "output TSV path");

  // train-synth
  auto* trs = app.add_subcommand("train-synth", "train lstm-reg | gan | wgan");
  std::string trs_eeg, trs_mfcc;
  add_corpus(trs);
  add_common(trs);
  trs->add_option("--split-seed", cfg.split_seed, "seed for the 90/10 shuffle");
  trs->add_option("--eeg-features", trs_eeg, "EEG feature directory")->required();
  trs->add_option("--mfcc-features", trs_mfcc, "MFCC feature directory")->required();
  trs->add_option("--model", cfg.model, "lstm-reg | gan | wgan");
  trs->add_option("--condition", cfg.condition, "spoken | listen");
  trs->add_option("--epochs", cfg.epochs, "training epochs (0: paper default)");
  trs->add_option("--hidden", cfg.hidden, "hidden size (0: paper default)");
  trs->add_option("--lr", cfg.lr, "learning rate (0: default)");

  // eval
  auto* ev = app.add_subcommand("eval", "score decoded text or synthesized MFCC");
  std::string ev_kind = "asr", ev_decoded, ev_corpus = cfg.corpus_dir, ev_out = "report.csv";
  std::string ev_model_dir, ev_eeg, ev_mfcc, ev_pred_dir;
  bool ev_cer = false;
  ev->add_option("--kind", ev_kind, "asr | synth");
  ev->add_option("--decoded", ev_decoded, "decode output TSV (asr)");
  ev->add_option("--corpus", ev_corpus, "corpus root with the reference manifest");
  ev->add_flag("--cer", ev_cer, "score characters instead of words");
  ev->add_option("--model-dir", ev_model_dir, "train-synth output directory (synth)");
  ev->add_option("--eeg-features", ev_eeg, "EEG feature directory (synth)");
  ev->add_option("--mfcc-features", ev_mfcc, "MFCC feature directory (synth)");
  ev->add_option("--pred-out", ev_pred_dir, "write predicted MFCC files here (synth)");
  ev->add_option("--out", ev_out, "report CSV path");

  // sweep
  auto* sw = app.add_subcommand("sweep", "train/decode/eval across sentence-count limits");
  std::string sw_features;
  std::vector<int> sw_counts{3, 5, 7, 9};
  std::string sw_out = "sweep.csv";
  add_corpus(sw);
  add_common(sw);
  add_split(sw);
  sw->add_option("--features", sw_features, "feature directory")->required();
  sw->add_option("--model", cfg.model, "ctc | attention | rnnt");
  sw->add_option("--condition", cfg.condition, "spoken | listen | both");
  sw->add_option("--epochs", cfg.epochs, "epochs per run");
  sw->add_option("--hidden", cfg.hidden, "hidden size");
  sw->add_option("--beam", cfg.beam, "beam width");
  sw->add_option("--sentence-counts", sw_counts, "sentence-count limits");
  sw->add_option("--table-out", sw_out, "summary table CSV");

  // plotdata
  auto* pd = app.add_subcommand("plotdata", "emit plot-ready CSV series");
  std::string pd_kind, pd_source, pd_out = "plot.csv";
  size_t pd_max_rows = 2000;
  uint64_t pd_seed = 1;
  pd->add_option("--kind", pd_kind, "variance | loss | nrmse")->required();
  pd->add_option("--source", pd_source,
                 "feature dir (variance), loss csv (loss) or synth report (nrmse)")
      ->required();
  pd->add_option("--out", pd_out, "output CSV path");
  pd->add_option("--max-rows", pd_max_rows, "row cap for the variance fit");
  pd->add_option("--seed", pd_seed, "subsample seed");

  // --config preloads defaults: parse it before the real pass
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") cfg = ExperimentConfig::from_json(read_text(argv[i + 1]));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen(cfg, subjects, reps, listen, noise_level, sentences_file,
                             sentence_count);
    if (*feat) {
      if (feat_out.empty()) feat_out = cfg.corpus_dir + "/features";
      return cmd_featurize(cfg, feat_kind, feat_out, montage_path, window_len, hop);
    }
    if (*red) {
      if (cfg.out_dir.empty()) throw ConfigError("reduce needs --out");
      return cmd_reduce(cfg, red_features, cfg.out_dir, target_dim, !no_deltas, kpca_max_rows);
    }
    if (*tra) {
      if (cfg.out_dir.empty()) throw ConfigError("train-asr needs --out");
      return cmd_train_asr(cfg, tra_features);
    }
    if (*dec) return cmd_decode(dec_model_dir, dec_features, dec_subset, dec_out, dec_jobs,
                                dec_beam);
    if (*trs) {
      if (cfg.out_dir.empty()) throw ConfigError("train-synth needs --out");
      return cmd_train_synth(cfg, trs_eeg, trs_mfcc);
    }
    if (*ev) {
      if (ev_kind == "asr") return cmd_eval_asr(ev_decoded, ev_corpus, ev_out, !ev_cer);
      if (ev_kind == "synth")
        return cmd_eval_synth(ev_model_dir, ev_eeg, ev_mfcc, ev_out, ev_pred_dir);
      throw ConfigError("eval kind must be asr or synth");
    }
    if (*sw) {
      if (cfg.out_dir.empty()) throw ConfigError("sweep needs --out");
      return cmd_sweep(cfg, sw_features, sw_counts, sw_out);
    }
    if (*pd) return cmd_plotdata(pd_kind, pd_source, pd_out, pd_max_rows, pd_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PrerequisiteError& e) {
    std::cerr << "missing prerequisite: " << e.what() << "\n";
    return 3;
  } catch (const ShapeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("neurotalk");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace neurotalk::cli
