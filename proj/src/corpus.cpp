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

#include "neurotalk/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace neurotalk::corpus {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {
constexpr double kTau = 6.283185307179586476925286766559;

int char_index(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c == ' ') return 26;
  if (c == '\'') return 27;
  throw ConfigError(std::string("synthetic corpus: unsupported character '") + c + "'");
}

// Paul Kellett's economy pink-noise filter; state carried per channel.
struct PinkNoise {
  double b0 = 0, b1 = 0, b2 = 0;
  double next(Rng& rng) {
    const double white = rng.uniform(-1.0, 1.0);
    b0 = 0.99765 * b0 + white * 0.0990460;
    b1 = 0.96300 * b1 + white * 0.2965164;
    b2 = 0.57000 * b2 + white * 1.0526913;
    return 0.25 * (b0 + b1 + b2 + white * 0.1848);
  }
};

std::string two_digits(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

}  // namespace

const std::vector<std::string>& default_sentences() {
  static const std::vector<std::string> sents = {
      "a dog ran out",
      "she hears the sea",
      "we go home now",
      "the cat sat on the mat",
      "he reads an old book",
      "birds sing in the morning",
      "rain falls on the green hill",
      "they walk along the river",
      "it's a warm and quiet day",
      "the train leaves at noon",
      "my friend plays the violin",
      "light spills through the window",
      "a child draws a small boat",
      "the soup needs more salt",
      "we watch the stars at night",
      "her garden grows red roses",
      "the clock ticks on the wall",
      "he paints the fence white",
      "waves crash on the rocks",
      "the baker sells fresh bread",
      "snow covers the tall pines",
      "she writes a long letter",
      "the horse drinks cold water",
      "children laugh in the park",
      "the lamp glows in the dark",
      "a kite flies over the field",
      "he fixes the broken chair",
      "the river bends to the east",
      "music drifts from the open door",
      "they share a pot of tea",
  };
  return sents;
}

std::vector<std::string> load_sentences(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open sentence list: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  if (out.empty()) throw ConfigError("sentence list is empty: " + path);
  return out;
}

// Each character owns an oscillation frequency inside the analysis band plus
// an amplitude step; audio uses a two-partial tone on the same index.
static void synthesize_utterance(const SyntheticCorpusSpec& spec, const std::string& sentence,
                                 int subject, int repetition, bool listen, Rng& rng,
                                 dsp::RawEeg& eeg, audio::AudioClip& clip) {
  const size_t eeg_per_char =
      static_cast<size_t>(std::lround(spec.char_duration_s * spec.eeg_rate_hz));
  const size_t audio_per_char =
      static_cast<size_t>(std::lround(spec.char_duration_s * spec.audio_rate_hz));
  const size_t n_chars = sentence.size();
  const size_t channels = dsp::default_channel_names().size();

  // subject-specific channel mixing, then per-utterance phases
  std::vector<double> mixing(channels);
  {
    Rng subject_rng(spec.seed * 1000003ull + static_cast<uint64_t>(subject) * 7919ull);
    for (auto& m : mixing) m = subject_rng.uniform(0.6, 1.4);
  }

  eeg.sample_rate_hz = spec.eeg_rate_hz;
  eeg.channels.assign(channels, std::vector<double>(n_chars * eeg_per_char, 0.0));
  clip.sample_rate_hz = spec.audio_rate_hz;
  clip.samples.assign(n_chars * audio_per_char, 0.0);

  const double cond_shift = listen ? 0.5 : 0.0;  // condition-specific phase offset
  std::vector<PinkNoise> pink(channels);

  for (size_t p = 0; p < n_chars; ++p) {
    const int idx = char_index(sentence[p]);
    const double freq = 3.0 + 1.15 * idx;
    const double amp = 0.8 + 0.1 * (idx % 5);
    // golden-angle phase per character identity: repetitions of a sentence
    // agree up to noise, which keeps the task learnable at desk scale
    const double phase = std::fmod(2.399963229728653 * idx, kTau);

    for (size_t i = 0; i < eeg_per_char; ++i) {
      const double t = static_cast<double>(i) / spec.eeg_rate_hz;
      const double base = amp * std::sin(kTau * freq * t + phase + cond_shift) +
                          0.4 * amp * std::sin(kTau * 1.9 * freq * t + 0.7 * phase);
      const size_t at = p * eeg_per_char + i;
      for (size_t c = 0; c < channels; ++c) eeg.channels[c][at] = mixing[c] * base;
    }

    const bool voiced = sentence[p] != ' ';
    const double f1 = 220.0 + 55.0 * idx;
    for (size_t i = 0; i < audio_per_char; ++i) {
      const double t = static_cast<double>(i) / spec.audio_rate_hz;
      const double env =
          0.5 * (1.0 - std::cos(kTau * static_cast<double>(i) / static_cast<double>(audio_per_char)));
      double v = 0.0;
      if (voiced)
        v = env * (0.28 * std::sin(kTau * f1 * t + phase) +
                   0.18 * std::sin(kTau * 2.3 * f1 * t + 0.3 * phase));
      clip.samples[p * audio_per_char + i] = v;
    }
  }

  // pink noise over the full utterance, then repetition-scaled audio noise
  for (size_t c = 0; c < channels; ++c)
    for (double& v : eeg.channels[c]) v += spec.noise_level * pink[c].next(rng);
  const double audio_noise = 0.004 * (1.0 + 0.1 * repetition);
  for (double& v : clip.samples) v += audio_noise * rng.uniform(-1.0, 1.0);
}

std::vector<ManifestRecord> generate_synthetic_corpus(const SyntheticCorpusSpec& spec,
                                                      const std::string& out_dir) {
  if (spec.sentences.empty()) throw ConfigError("synthetic corpus: at least one sentence");
  if (spec.n_subjects < 1 || spec.repetitions < 1)
    throw ConfigError("synthetic corpus: subjects and repetitions must be positive");
  fs::create_directories(fs::path(out_dir) / "eeg");
  fs::create_directories(fs::path(out_dir) / "audio");

  Rng rng(spec.seed);
  std::vector<ManifestRecord> records;
  for (int subject = 1; subject <= spec.n_subjects; ++subject) {
    for (int rep = 1; rep <= spec.repetitions; ++rep) {
      for (size_t sent = 0; sent < spec.sentences.size(); ++sent) {
        std::vector<std::string> conditions{"spoken"};
        if (spec.listen_condition) conditions.insert(conditions.begin(), "listen");
        for (const std::string& condition : conditions) {
          ManifestRecord rec;
          rec.subject_id = subject;
          rec.repetition = rep;
          rec.sentence_id = static_cast<int>(sent);
          rec.condition = condition;
          rec.noise_db = spec.noise_db;
          rec.transcript = spec.sentences[sent];
          rec.utt_id = "s" + two_digits(subject) + "_r" + std::to_string(rep) + "_n" +
                       two_digits(static_cast<int>(sent)) + "_" + condition;
          rec.eeg_path = "eeg/" + rec.utt_id + ".nteg";
          rec.audio_path = "audio/" + rec.utt_id + ".wav";

          dsp::RawEeg eeg;
          audio::AudioClip clip;
          synthesize_utterance(spec, rec.transcript, subject, rep, condition == "listen", rng,
                               eeg, clip);
          dsp::write_raw_eeg(eeg, (fs::path(out_dir) / rec.eeg_path).string());
          audio::write_wav(clip, (fs::path(out_dir) / rec.audio_path).string());
          records.push_back(std::move(rec));
        }
      }
    }
  }

  write_manifest(records, (fs::path(out_dir) / "manifest.jsonl").string());
  {
    std::ofstream os(fs::path(out_dir) / "montage.txt");
    const auto& names = dsp::default_channel_names();
    for (size_t i = 0; i < names.size(); ++i) os << names[i] << "=" << i << "\n";
  }
  return records;
}

void write_manifest(const std::vector<ManifestRecord>& records, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write manifest: " + path);
  for (const auto& r : records) {
    ordered_json j;
    j["utt_id"] = r.utt_id;
    j["subject_id"] = r.subject_id;
    j["repetition"] = r.repetition;
    j["sentence_id"] = r.sentence_id;
    j["condition"] = r.condition;
    j["noise_db"] = r.noise_db;
    j["eeg_path"] = r.eeg_path;
    j["audio_path"] = r.audio_path;
    j["transcript"] = r.transcript;
    os << j.dump() << "\n";
  }
}

std::vector<ManifestRecord> read_manifest(const std::string& path, bool check_paths) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  const fs::path root = fs::path(path).parent_path();
  std::vector<ManifestRecord> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": bad manifest line: " + e.what());
    }
    ManifestRecord r;
    r.utt_id = j.at("utt_id").get<std::string>();
    r.subject_id = j.at("subject_id").get<int>();
    r.repetition = j.at("repetition").get<int>();
    r.sentence_id = j.at("sentence_id").get<int>();
    r.condition = j.at("condition").get<std::string>();
    r.noise_db = j.at("noise_db").get<double>();
    r.eeg_path = j.at("eeg_path").get<std::string>();
    r.audio_path = j.at("audio_path").get<std::string>();
    r.transcript = j.at("transcript").get<std::string>();
    if (r.repetition < 1) throw ConfigError(r.utt_id + ": repetition must be >= 1");
    if (r.condition != "spoken" && r.condition != "listen")
      throw ConfigError(r.utt_id + ": unknown condition " + r.condition);
    if (check_paths) {
      if (!fs::exists(root / r.eeg_path))
        throw PrerequisiteError("missing EEG file " + r.eeg_path + " referenced by " + path);
      if (!fs::exists(root / r.audio_path))
        throw PrerequisiteError("missing audio file " + r.audio_path + " referenced by " + path);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Split split(const std::vector<ManifestRecord>& records, const SplitPlan& plan, uint64_t seed) {
  if (records.empty()) throw ConfigError("split: empty manifest");
  Split out;
  if (plan.strategy == SplitPlan::Strategy::random_80_10_10) {
    std::vector<size_t> order(records.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    const size_t n = records.size();
    const size_t n_train = n * 8 / 10;
    const size_t n_val = n / 10;
    for (size_t i = 0; i < n; ++i) {
      const ManifestRecord& r = records[order[i]];
      if (i < n_train)
        out.train.push_back(r);
      else if (i < n_train + n_val)
        out.val.push_back(r);
      else
        out.test.push_back(r);
    }
  } else {
    std::set<int> subjects;
    for (const auto& r : records) subjects.insert(r.subject_id);
    if (subjects.size() < 3) throw ConfigError("subject_blocks split needs at least 3 subjects");
    const int wanted = plan.train_subjects + plan.val_subjects + plan.test_subjects;
    if (static_cast<int>(subjects.size()) != wanted)
      throw ConfigError("subject_blocks split covers " + std::to_string(wanted) +
                        " subjects but the corpus has " + std::to_string(subjects.size()));
    std::map<int, int> bucket;  // 0 train, 1 val, 2 test
    int i = 0;
    for (int s : subjects) {
      if (i < plan.train_subjects)
        bucket[s] = 0;
      else if (i < plan.train_subjects + plan.val_subjects)
        bucket[s] = 1;
      else
        bucket[s] = 2;
      ++i;
    }
    for (const auto& r : records) {
      switch (bucket.at(r.subject_id)) {
        case 0: out.train.push_back(r); break;
        case 1: out.val.push_back(r); break;
        default: out.test.push_back(r); break;
      }
    }
  }
  if (out.train.empty() || out.val.empty() || out.test.empty())
    throw ConfigError("split produced an empty subset");
  return out;
}

std::vector<asr::Utterance> build_condition_features(const std::vector<ManifestRecord>& records,
                                                     const std::string& features_dir,
                                                     const std::string& condition_mode,
                                                     const std::string& concat_axis) {
  if (condition_mode != "spoken" && condition_mode != "listen" && condition_mode != "both")
    throw ConfigError("condition mode must be spoken, listen or both");
  auto load = [&](const ManifestRecord& r) {
    const std::string path = features_dir + "/" + r.utt_id + ".ntfs";
    if (!std::filesystem::exists(path))
      throw PrerequisiteError("missing feature file " + path + "; run the featurize stage first");
    return dsp::read_features(path);
  };

  std::vector<asr::Utterance> out;
  if (condition_mode != "both") {
    for (const auto& r : records) {
      if (r.condition != condition_mode) continue;
      asr::Utterance u;
      u.utt_id = r.utt_id;
      u.transcript = r.transcript;
      u.subject_id = r.subject_id;
      u.condition = r.condition;
      u.features = load(r);
      out.push_back(std::move(u));
    }
    return out;
  }

  // pair listen+spoken takes of the same (subject, repetition, sentence)
  std::map<std::tuple<int, int, int>, const ManifestRecord*> listen_by_key, spoken_by_key;
  for (const auto& r : records) {
    auto key = std::make_tuple(r.subject_id, r.repetition, r.sentence_id);
    (r.condition == "listen" ? listen_by_key : spoken_by_key)[key] = &r;
  }
  for (const auto& [key, spoken_rec] : spoken_by_key)
    if (!listen_by_key.count(key))
      throw ConfigError("no listen take paired with " + spoken_rec->utt_id);
  for (const auto& [key, listen_rec] : listen_by_key) {
    auto it = spoken_by_key.find(key);
    if (it == spoken_by_key.end())
      throw ConfigError("no spoken take paired with " + listen_rec->utt_id);
    const ManifestRecord* spoken_rec = it->second;
    dsp::FeatureSequence listen_f = load(*listen_rec);
    dsp::FeatureSequence spoken_f = load(*spoken_rec);

    asr::Utterance u;
    u.utt_id = listen_rec->utt_id + "+" + spoken_rec->utt_id;
    u.transcript = listen_rec->transcript;
    u.subject_id = listen_rec->subject_id;
    u.condition = "listen+spoken";
    if (concat_axis == "time") {
      if (listen_f.dim != spoken_f.dim)
        throw ShapeError("listen/spoken feature dims differ for " + u.utt_id);
      u.features = listen_f;
      u.features.frames.insert(u.features.frames.end(), spoken_f.frames.begin(),
                               spoken_f.frames.end());
    } else if (concat_axis == "feature") {
      if (listen_f.num_frames() != spoken_f.num_frames())
        throw ShapeError("feature-axis concatenation needs equal frame counts for " + u.utt_id);
      u.features.frame_rate_hz = listen_f.frame_rate_hz;
      u.features.dim = listen_f.dim + spoken_f.dim;
      u.features.set_id = listen_f.set_id;
      const size_t T = listen_f.num_frames();
      u.features.frames.resize(T * u.features.dim);
      for (size_t t = 0; t < T; ++t) {
        std::copy_n(listen_f.frame(t), listen_f.dim, u.features.frame(t));
        std::copy_n(spoken_f.frame(t), spoken_f.dim, u.features.frame(t) + listen_f.dim);
      }
    } else {
      throw ConfigError("concat axis must be time or feature");
    }
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace neurotalk::corpus
