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

namespace neurotalk::audio {

struct AudioClip {
  double sample_rate_hz = 16000.0;
  std::vector<double> samples;  // mono, nominally in [-1, 1]
};

/// PCM 16-bit little-endian mono.
void write_wav(const AudioClip& clip, const std::string& path);
AudioClip read_wav(const std::string& path);

/// Triangular filters on an HTK-mel grid applied to one-sided power spectra.
struct MelFilterbank {
  size_t n_mels = 26;
  size_t fft_size = 512;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  std::vector<double> weights;  // n_mels x (fft_size/2 + 1), row-major

  static MelFilterbank make(double sample_rate, size_t n_mels = 26, size_t fft_size = 512,
                            double fmin = 0.0, double fmax = 8000.0);
  size_t bins() const { return fft_size / 2 + 1; }
};

struct MfccConfig {
  double pre_emphasis = 0.97;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  size_t n_mels = 26;
  size_t fft_size = 512;
  size_t n_coeffs = 13;
  double log_floor = 1e-10;
};

/// 13 cepstral coefficients per 10 ms hop (100 Hz frame rate).
dsp::FeatureSequence mfcc13(const AudioClip& clip, const MfccConfig& cfg = {});
/// mfcc13 plus delta and delta-delta blocks (dim 39).
dsp::FeatureSequence mfcc39(const AudioClip& clip, const MfccConfig& cfg = {});

/// Orthonormal DCT-II of x (any output count <= x.size()), and its inverse.
std::vector<double> dct2_ortho(const std::vector<double>& x, size_t n_out);
std::vector<double> idct2_ortho(const std::vector<double>& c, size_t n_out);

struct GriffinLimResult {
  AudioClip audio;
  std::vector<double> residuals;  // re-analyzed magnitude error per iteration
};

/// Inverts MFCC frames to audio: inverse DCT on zero-padded cepstra, exp,
/// clamped pseudo-inverse of the mel filterbank, then Griffin-Lim phase
/// recovery with a least-squares inverse STFT. residuals is non-increasing.
GriffinLimResult griffin_lim_reconstruct(const dsp::FeatureSequence& mfcc, int iters = 60,
                                         const MfccConfig& cfg = {});

}  // namespace neurotalk::audio
