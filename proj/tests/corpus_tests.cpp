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

#include <filesystem>
#include <fstream>
#include <set>

#include "neurotalk/corpus.hpp"
#include "test_support.hpp"

using namespace neurotalk;
using namespace neurotalk::corpus;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

std::vector<ManifestRecord> tiny_manifest(int subjects, int sentences, int reps,
                                          bool listen = false) {
  std::vector<ManifestRecord> out;
  for (int s = 1; s <= subjects; ++s)
    for (int r = 1; r <= reps; ++r)
      for (int n = 0; n < sentences; ++n) {
        for (const char* cond : {"spoken", "listen"}) {
          if (!listen && std::string(cond) == "listen") continue;
          ManifestRecord rec;
          rec.utt_id = "s" + std::to_string(s) + "r" + std::to_string(r) + "n" +
                       std::to_string(n) + cond;
          rec.subject_id = s;
          rec.repetition = r;
          rec.sentence_id = n;
          rec.condition = cond;
          rec.transcript = "word" + std::to_string(n);
          out.push_back(rec);
        }
      }
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("synthetic corpus is byte-identical across runs with one seed") {
  SyntheticCorpusSpec spec;
  spec.n_subjects = 2;
  spec.sentences = {default_sentences()[0], default_sentences()[1]};
  spec.repetitions = 1;
  spec.seed = 9;

  TempDir a("nt_corpus_a"), b("nt_corpus_b");
  auto ra = generate_synthetic_corpus(spec, a.path.string());
  auto rb = generate_synthetic_corpus(spec, b.path.string());
  REQUIRE(ra.size() == rb.size());
  for (const auto& rec : ra) {
    CHECK(read_file(a.path / rec.eeg_path) == read_file(b.path / rec.eeg_path));
    CHECK(read_file(a.path / rec.audio_path) == read_file(b.path / rec.audio_path));
  }
  CHECK(read_file(a.path / "manifest.jsonl") == read_file(b.path / "manifest.jsonl"));

  // different seed changes the payload
  spec.seed = 10;
  TempDir c("nt_corpus_c");
  generate_synthetic_corpus(spec, c.path.string());
  CHECK(read_file(a.path / ra[0].eeg_path) != read_file(c.path / ra[0].eeg_path));
}

TEST_CASE("database-A shape: 20 subjects x 9 sentences x 3 reps, spoken only") {
  SyntheticCorpusSpec spec;
  spec.n_subjects = 20;
  spec.sentences.assign(default_sentences().begin(), default_sentences().begin() + 9);
  spec.repetitions = 3;
  spec.char_duration_s = 0.002;  // keep the files tiny; shape is what matters
  TempDir dir("nt_corpus_shape_a");
  auto records = generate_synthetic_corpus(spec, dir.path.string());
  CHECK(records.size() == 540);
  for (const auto& r : records) CHECK(r.condition == "spoken");
}

TEST_CASE("database-B shape pairs listen and spoken per take") {
  SyntheticCorpusSpec spec;
  spec.n_subjects = 3;
  spec.sentences.assign(default_sentences().begin(), default_sentences().begin() + 2);
  spec.repetitions = 2;
  spec.listen_condition = true;
  spec.char_duration_s = 0.002;
  TempDir dir("nt_corpus_shape_b");
  auto records = generate_synthetic_corpus(spec, dir.path.string());
  CHECK(records.size() == 3 * 2 * 2 * 2);
  std::set<std::tuple<int, int, int>> listen_keys, spoken_keys;
  for (const auto& r : records)
    (r.condition == "listen" ? listen_keys : spoken_keys)
        .insert({r.subject_id, r.repetition, r.sentence_id});
  CHECK(listen_keys == spoken_keys);
}

TEST_CASE("manifest round-trip preserves every field") {
  SyntheticCorpusSpec spec;
  spec.n_subjects = 1;
  spec.sentences = {"it's a test"};
  spec.repetitions = 1;
  spec.char_duration_s = 0.002;
  TempDir dir("nt_corpus_manifest");
  auto written = generate_synthetic_corpus(spec, dir.path.string());
  auto loaded = read_manifest((dir.path / "manifest.jsonl").string());
  REQUIRE(loaded.size() == written.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].utt_id == written[i].utt_id);
    CHECK(loaded[i].subject_id == written[i].subject_id);
    CHECK(loaded[i].repetition == written[i].repetition);
    CHECK(loaded[i].sentence_id == written[i].sentence_id);
    CHECK(loaded[i].condition == written[i].condition);
    CHECK(loaded[i].noise_db == written[i].noise_db);
    CHECK(loaded[i].transcript == written[i].transcript);
  }

  // path validation notices missing payloads
  fs::remove(dir.path / written[0].eeg_path);
  CHECK_THROWS_AS(read_manifest((dir.path / "manifest.jsonl").string()), PrerequisiteError);
  CHECK_NOTHROW(read_manifest((dir.path / "manifest.jsonl").string(), false));
}

TEST_CASE("random split: 80/10/10 counts, determinism, disjointness") {
  auto records = tiny_manifest(10, 5, 2);  // 100 utterances
  SplitPlan plan;
  Split s = split(records, plan, 4);
  CHECK(s.train.size() == 80);
  CHECK(s.val.size() == 10);
  CHECK(s.test.size() == 10);

  Split again = split(records, plan, 4);
  CHECK(again.train[0].utt_id == s.train[0].utt_id);
  CHECK(again.test.back().utt_id == s.test.back().utt_id);

  std::set<std::string> seen;
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (const auto& r : *part) CHECK(seen.insert(r.utt_id).second);
  CHECK(seen.size() == records.size());
}

TEST_CASE("subject-block split keeps contiguous subject ranges") {
  auto records = tiny_manifest(20, 2, 1);
  SplitPlan plan;
  plan.strategy = SplitPlan::Strategy::subject_blocks;
  plan.train_subjects = 18;
  plan.val_subjects = 1;
  plan.test_subjects = 1;
  Split s = split(records, plan, 1);
  for (const auto& r : s.train) CHECK(r.subject_id <= 18);
  for (const auto& r : s.val) CHECK(r.subject_id == 19);
  for (const auto& r : s.test) CHECK(r.subject_id == 20);

  SplitPlan bad = plan;
  bad.train_subjects = 5;
  CHECK_THROWS_AS(split(records, bad, 1), ConfigError);

  auto two = tiny_manifest(2, 2, 1);
  SplitPlan p2;
  p2.strategy = SplitPlan::Strategy::subject_blocks;
  CHECK_THROWS_AS(split(two, p2, 1), ConfigError);
}

TEST_CASE("condition features: selection, pairing, and both concatenation modes") {
  TempDir dir("nt_corpus_cond");
  auto records = tiny_manifest(2, 2, 1, /*listen=*/true);
  // fabricate feature files: listen takes 4 frames, spoken takes 6
  fs::create_directories(dir.path / "features");
  for (const auto& r : records) {
    dsp::FeatureSequence f;
    f.dim = 3;
    f.frame_rate_hz = 100.0;
    const size_t frames = r.condition == "listen" ? 4 : 6;
    f.frames.assign(frames * 3, r.condition == "listen" ? 1.0 : 2.0);
    dsp::write_features(f, (dir.path / "features" / (r.utt_id + ".ntfs")).string());
  }

  auto spoken = build_condition_features(records, (dir.path / "features").string(), "spoken");
  CHECK(spoken.size() == 4);
  for (const auto& u : spoken) CHECK(u.features.num_frames() == 6);

  auto both = build_condition_features(records, (dir.path / "features").string(), "both");
  CHECK(both.size() == 4);
  for (const auto& u : both) {
    CHECK(u.features.num_frames() == 10);  // listen frames + spoken frames
    CHECK(u.features.frame(0)[0] == 1.0);  // listen block first
    CHECK(u.features.frame(9)[0] == 2.0);
    CHECK(u.condition == "listen+spoken");
  }

  // feature-axis mode needs equal frame counts
  CHECK_THROWS_AS(
      build_condition_features(records, (dir.path / "features").string(), "both", "feature"),
      ShapeError);

  // missing pair in either direction
  std::vector<ManifestRecord> unpaired(records.begin(), records.begin() + 1);
  CHECK_THROWS_AS(build_condition_features(unpaired, (dir.path / "features").string(), "both"),
                  ConfigError);

  // missing feature file names the prerequisite stage
  CHECK_THROWS_AS(build_condition_features(records, (dir.path / "nowhere").string(), "spoken"),
                  PrerequisiteError);
}

TEST_CASE("paired records share sentence and subject ids") {
  SyntheticCorpusSpec spec;
  spec.n_subjects = 2;
  spec.sentences = {"go now", "come back"};
  spec.repetitions = 2;
  spec.listen_condition = true;
  spec.char_duration_s = 0.002;
  TempDir dir("nt_corpus_pairing");
  auto records = generate_synthetic_corpus(spec, dir.path.string());
  std::map<std::tuple<int, int, int>, int> count;
  for (const auto& r : records) ++count[{r.subject_id, r.repetition, r.sentence_id}];
  for (const auto& [key, c] : count) CHECK(c == 2);
}

TEST_CASE("sentence list file loader") {
  TempDir dir("nt_corpus_sent");
  {
    std::ofstream os(dir.path / "sent.txt");
    os << "first line\nsecond line\n\n";
  }
  auto sents = load_sentences((dir.path / "sent.txt").string());
  REQUIRE(sents.size() == 2);
  CHECK(sents[0] == "first line");
  CHECK(default_sentences().size() == 30);
  for (const auto& s : default_sentences())
    for (char c : s) CHECK(((c >= 'a' && c <= 'z') || c == ' ' || c == '\''));
}
