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

#include "neurotalk/asr.hpp"
#include "neurotalk/audio.hpp"
#include "neurotalk/dsp.hpp"

namespace neurotalk::corpus {

struct ManifestRecord {
  std::string utt_id;
  int subject_id = 0;
  int repetition = 1;
  int sentence_id = 0;
  std::string condition;  // spoken | listen
  double noise_db = 0.0;
  std::string eeg_path;    // relative to the corpus root
  std::string audio_path;  // relative to the corpus root
  std::string transcript;
};

struct SyntheticCorpusSpec {
  int n_subjects = 5;
  std::vector<std::string> sentences;
  int repetitions = 3;
  bool listen_condition = false;  // also emit a listen record per sentence take
  uint64_t seed = 1;
  double noise_level = 0.05;   // pink-noise amplitude mixed into the EEG
  double noise_db = 65.0;      // recorded background level, manifest metadata
  double char_duration_s = 0.06;
  double eeg_rate_hz = 1000.0;
  double audio_rate_hz = 16000.0;
};

/// The 30 built-in placeholder sentences (lowercase letters, spaces,
/// apostrophes only). Experiments reference sentences by index.
const std::vector<std::string>& default_sentences();
std::vector<std::string> load_sentences(const std::string& path);

/// Writes WAV + NTEG files plus manifest.jsonl and montage.txt under out_dir.
/// Every byte is a function of the spec, so identical specs give identical
/// corpora. Each character carries a distinct band-limited EEG signature
/// mixed through a subject-specific matrix, with pink noise on top.
std::vector<ManifestRecord> generate_synthetic_corpus(const SyntheticCorpusSpec& spec,
                                                      const std::string& out_dir);

void write_manifest(const std::vector<ManifestRecord>& records, const std::string& path);
/// check_paths verifies that referenced files exist next to the manifest.
std::vector<ManifestRecord> read_manifest(const std::string& path, bool check_paths = true);

struct SplitPlan {
  enum class Strategy { random_80_10_10, subject_blocks };
  Strategy strategy = Strategy::random_80_10_10;
  // block mode: contiguous subject-id blocks, must cover every subject
  int train_subjects = 18;
  int val_subjects = 1;
  int test_subjects = 1;
};

struct Split {
  std::vector<ManifestRecord> train, val, test;
};

Split split(const std::vector<ManifestRecord>& records, const SplitPlan& plan, uint64_t seed);

/// Assembles model-ready utterances from per-record feature files
/// (features_dir/<utt_id>.ntfs). condition_mode spoken|listen picks matching
/// records; "both" joins the listen and spoken takes of each (subject,
/// repetition, sentence) — along time by default, along the feature axis with
/// concat_axis == "feature".
std::vector<asr::Utterance> build_condition_features(const std::vector<ManifestRecord>& records,
                                                     const std::string& features_dir,
                                                     const std::string& condition_mode,
                                                     const std::string& concat_axis = "time");

}  // namespace neurotalk::corpus
