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

#include "neurotalk/dsp.hpp"

namespace neurotalk::metrics {

struct EditCounts {
  size_t distance = 0;
  size_t substitutions = 0;
  size_t insertions = 0;
  size_t deletions = 0;
};

/// Levenshtein alignment over token sequences with operation counts.
EditCounts edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

std::vector<std::string> split_words(const std::string& s);
std::vector<std::string> split_chars(const std::string& s);

/// Edit distance over the reference length; may exceed 1. Empty reference is
/// an error.
double wer(const std::string& ref, const std::string& hyp);
double cer(const std::string& ref, const std::string& hyp);

double rmse(const dsp::FeatureSequence& a, const dsp::FeatureSequence& b);
/// rmse(pred, ref) / (max(ref) - min(ref)); constant reference is an error.
double normalized_rmse(const dsp::FeatureSequence& pred, const dsp::FeatureSequence& ref);
/// Mel cepstral distortion over 13-dim frames, coefficient 0 excluded,
/// frame-synchronous (no time warping).
double mcd(const dsp::FeatureSequence& a, const dsp::FeatureSequence& b);

// ---- reports -----------------------------------------------------------------

struct AsrEvalInput {
  std::string utt_id;
  std::string reference;
  std::string hypothesis;
};

struct AsrEvalRow {
  std::string utt_id;
  EditCounts counts;
  size_t ref_len = 0;
  double rate = 0.0;
};

/// Aggregate rate is pooled edit counts over pooled reference length, not the
/// mean of per-utterance rates.
struct AsrReport {
  std::vector<AsrEvalRow> rows;
  EditCounts total;
  size_t total_ref_len = 0;
  double aggregate_rate = 0.0;
};

AsrReport evaluate_asr(const std::vector<AsrEvalInput>& pairs, bool word_level);
void write_asr_report_csv(const AsrReport& report, const std::string& metric_name,
                          const std::string& path);

struct SynthEvalRow {
  std::string utt_id;
  double rmse = 0.0;
  double nrmse = 0.0;
  double mcd = 0.0;
};

struct SynthReport {
  std::vector<SynthEvalRow> rows;
  double avg_rmse = 0.0;
  double avg_nrmse = 0.0;
  double avg_mcd = 0.0;
};

SynthReport summarize_synth(std::vector<SynthEvalRow> rows);
void write_synth_report_csv(const SynthReport& report, const std::string& path);

}  // namespace neurotalk::metrics
