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

#include <map>
#include <span>
#include <string>
#include <vector>

#include "neurotalk/common.hpp"

namespace neurotalk::dsp {

/// Multichannel time-domain EEG. All channels share one length and rate.
struct RawEeg {
  double sample_rate_hz = 1000.0;
  std::vector<std::vector<double>> channels;

  size_t num_channels() const { return channels.size(); }
  size_t num_samples() const { return channels.empty() ? 0 : channels[0].size(); }
  void validate() const;
};

struct FilterSpec {
  enum class Kind { bandpass, notch };
  Kind kind = Kind::bandpass;
  int order = 4;
  double cutoff_low_hz = 0.1;
  double cutoff_high_hz = 70.0;
  double notch_hz = 60.0;
  double quality = 30.0;

  static FilterSpec bandpass(int order, double low, double high) {
    return {Kind::bandpass, order, low, high, 0.0, 0.0};
  }
  static FilterSpec notch(double hz, double q) { return {Kind::notch, 2, 0.0, 0.0, hz, q}; }
};

/// hop must equal sample_rate / frame_rate so features land on a 100 Hz grid.
struct WindowSpec {
  size_t window_len = 100;
  size_t hop = 10;
};

/// Time-major feature frames at a fixed frame rate; the interchange type
/// between DSP, dimension reduction and the models.
struct FeatureSequence {
  double frame_rate_hz = 100.0;
  size_t dim = 0;
  std::string set_id;  // "1" | "2" | "3" | "mfcc"
  std::vector<double> frames;

  size_t num_frames() const { return dim == 0 ? 0 : frames.size() / dim; }
  double* frame(size_t t) { return frames.data() + t * dim; }
  const double* frame(size_t t) const { return frames.data() + t * dim; }
};

// ---- filtering ------------------------------------------------------------

/// One normalized second-order section (a0 == 1).
struct Biquad {
  double b0, b1, b2, a1, a2;
};

/// Butterworth bandpass of the given prototype order via the analog
/// LP->BP transform and the bilinear transform, returned as second-order
/// sections paired for bounded per-section gain.
std::vector<Biquad> design_butter_bandpass(int order, double low_hz, double high_hz, double fs);

/// Second-order notch, unit gain at DC and Nyquist.
Biquad design_notch(double notch_hz, double quality, double fs);

/// Causal (forward-only) cascade application.
std::vector<double> apply_biquads(const std::vector<Biquad>& sections,
                                  const std::vector<double>& x);

RawEeg bandpass_iir(const RawEeg& x, const FilterSpec& spec);
RawEeg notch_60(const RawEeg& x);

/// Number of frames produced by a sliding window; throws when the signal is
/// shorter than one window.
size_t window_count(size_t signal_len, const WindowSpec& w);

// ---- per-window descriptors (exposed for tests and bindings) ---------------

double rms(std::span<const double> x);
double zero_crossing_rate(std::span<const double> x);
double kurtosis(std::span<const double> x, bool* degenerate = nullptr);
/// Shannon entropy (natural log) of the one-sided periodogram normalized to
/// sum 1; one bin per PSD frequency.
double spectral_entropy_psd(std::span<const double> x);
/// Mean magnitude of the Hann-windowed one-sided spectrum.
double stft_mean_magnitude(std::span<const double> x);
/// Level-1 db4 analysis with half-point symmetric extension.
void dwt_db4_level1(std::span<const double> x, std::vector<double>& approx,
                    std::vector<double>& detail);
/// Entropy of the squared-coefficient distribution (natural log). Defined as
/// 0 when the coefficient energy is zero, or negligible relative to
/// ref_energy (rounding residue of an analytically zero band).
double coefficient_entropy(std::span<const double> coeffs, double ref_energy = 0.0);
/// Band-integrated spectral entropy over {0.5,4,7,12,30} Hz edges with the
/// periodogram zero-padded to at least 2048 points.
double band_spectral_entropy(std::span<const double> x, double fs, bool* degenerate = nullptr);
/// Rescaled-range slope over subseries lengths {10,20,50,N}.
double hurst_exponent(std::span<const double> x, bool* degenerate = nullptr);
double petrosian_fd(std::span<const double> x);

// ---- feature sets -----------------------------------------------------------

struct ExtractResult {
  FeatureSequence features;
  size_t degenerate_windows = 0;
};

/// Set 1: per channel (rms, zcr, mean, kurtosis, spectral entropy); dim 5*C.
ExtractResult extract_set1(const RawEeg& x, const WindowSpec& w);
/// Set 2: per channel (mean STFT magnitude, approx entropy, detail entropy).
ExtractResult extract_set2(const RawEeg& x, const WindowSpec& w);
/// Set 3: per channel (band spectral entropy, hurst, petrosian fd).
ExtractResult extract_set3(const RawEeg& x, const WindowSpec& w);
ExtractResult extract_features(const RawEeg& x, const WindowSpec& w, int set_id);

/// [f, delta, delta-delta] per frame; deltas are central differences with
/// edge replication.
FeatureSequence append_deltas(const FeatureSequence& f);

// ---- montage & channel selection ---------------------------------------------

/// "name=index" lines; '#' comments allowed.
std::map<std::string, size_t> load_montage(const std::string& path);
/// The 31-signal-channel 10-20 cap layout used by the synthetic corpus.
const std::map<std::string, size_t>& default_montage();
const std::vector<std::string>& default_channel_names();

RawEeg select_channels(const RawEeg& x, const std::vector<std::string>& names,
                       const std::map<std::string, size_t>& montage);

// ---- binary formats -----------------------------------------------------------

void write_raw_eeg(const RawEeg& x, const std::string& path);
RawEeg read_raw_eeg(const std::string& path);
void write_features(const FeatureSequence& f, const std::string& path);
FeatureSequence read_features(const std::string& path);

}  // namespace neurotalk::dsp
