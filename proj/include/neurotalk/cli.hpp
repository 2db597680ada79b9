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

namespace neurotalk::cli {

/// Everything a pipeline stage needs, serializable both ways so an
/// experiment can be pinned to a file. Fields mirror the command-line flags.
struct ExperimentConfig {
  std::string corpus_dir;
  int feature_set = 1;
  std::string condition = "spoken";  // spoken | listen | both
  std::string model = "attention";   // ctc | attention | rnnt | lstm-reg | gan | wgan
  std::string split = "random";      // random | subjects
  int train_subjects = 18;
  int val_subjects = 1;
  int test_subjects = 1;
  int sentences = 0;  // 0: all
  size_t epochs = 0;  // 0: model default
  size_t hidden = 0;  // 0: model default
  size_t beam = 8;
  double lr = 0.0;  // 0: model default
  uint64_t seed = 1;
  uint64_t split_seed = 17;
  size_t jobs = 1;
  std::vector<std::string> channels;  // empty: all
  std::string out_dir;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
};

/// Exit codes: 0 success, 2 configuration error, 3 missing prerequisite,
/// 4 numeric failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace neurotalk::cli
