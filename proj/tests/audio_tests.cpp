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

#include <cmath>
#include <cstdio>
#include <numeric>

#include "neurotalk/audio.hpp"
#include "test_support.hpp"

using namespace neurotalk;
using namespace neurotalk::audio;

namespace {

constexpr double kPi = 3.14159265358979323846;

AudioClip tone_clip(double freq, double secs, double amp = 0.5, double fs = 16000.0) {
  AudioClip c;
  c.sample_rate_hz = fs;
  c.samples.resize(static_cast<size_t>(secs * fs));
  for (size_t i = 0; i < c.samples.size(); ++i)
    c.samples[i] = amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / fs);
  return c;
}

// Straight-line MFCC oracle: naive DFT and explicit loops, no shared code
// with the implementation beyond the pinned constants.
std::vector<double> mfcc_frame_oracle(const std::vector<double>& x, size_t frame_start) {
  const size_t L = 400, NFFT = 512, NMEL = 26;
  // pre-emphasis over the whole signal
  std::vector<double> emph(x.size());
  emph[0] = x[0];
  for (size_t i = 1; i < x.size(); ++i) emph[i] = x[i] - 0.97 * x[i - 1];
  // hann + frame
  std::vector<double> frame(NFFT, 0.0);
  for (size_t i = 0; i < L; ++i)
    frame[i] = emph[frame_start + i] *
               (0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(L)));
  // naive DFT power spectrum
  std::vector<double> power(NFFT / 2 + 1);
  for (size_t k = 0; k <= NFFT / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (size_t i = 0; i < NFFT; ++i) {
      const double ang = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(i) / NFFT;
      re += frame[i] * std::cos(ang);
      im += frame[i] * std::sin(ang);
    }
    power[k] = re * re + im * im;
  }
  // mel filters
  auto mel_of = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz_of = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double lo = mel_of(0.0), hi = mel_of(8000.0);
  std::vector<double> edges(NMEL + 2);
  for (size_t i = 0; i < edges.size(); ++i)
    edges[i] = hz_of(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(NMEL + 1));
  std::vector<double> logmel(NMEL);
  for (size_t m = 0; m < NMEL; ++m) {
    double acc = 0.0;
    for (size_t k = 0; k <= NFFT / 2; ++k) {
      const double f = 16000.0 * static_cast<double>(k) / NFFT;
      double w = 0.0;
      if (f >= edges[m] && f <= edges[m + 1])
        w = (f - edges[m]) / (edges[m + 1] - edges[m]);
      else if (f > edges[m + 1] && f <= edges[m + 2])
        w = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
      acc += w * power[k];
    }
    logmel[m] = std::log(std::max(acc, 1e-10));
  }
  // orthonormal DCT-II, first 13
  std::vector<double> c(13);
  for (size_t k = 0; k < 13; ++k) {
    double acc = 0.0;
    for (size_t i = 0; i < NMEL; ++i)
      acc += logmel[i] * std::cos(kPi * static_cast<double>(k) *
                                  (2.0 * static_cast<double>(i) + 1.0) / (2.0 * NMEL));
    c[k] = (k == 0 ? std::sqrt(1.0 / 26.0) : std::sqrt(2.0 / 26.0)) * acc;
  }
  return c;
}

double dominant_frequency(const std::vector<double>& x, size_t start, size_t len, double fs) {
  double best_f = 0.0, best_a = -1.0;
  for (double f = 200.0; f <= 4000.0; f += 2.0) {
    double re = 0.0, im = 0.0;
    for (size_t i = 0; i < len; ++i) {
      const double ang = 2.0 * kPi * f * static_cast<double>(i) / fs;
      re += x[start + i] * std::cos(ang);
      im += x[start + i] * std::sin(ang);
    }
    const double a = re * re + im * im;
    if (a > best_a) {
      best_a = a;
      best_f = f;
    }
  }
  return best_f;
}

}  // namespace

TEST_CASE("mfcc13 of silence: constant c0 from the log floor, higher coeffs zero") {
  AudioClip silence;
  silence.samples.assign(16000, 0.0);
  auto f = mfcc13(silence);
  CHECK(f.dim == 13);
  CHECK(f.frame_rate_hz == doctest::Approx(100.0));
  const double c0 = std::sqrt(26.0) * std::log(1e-10);
  for (size_t t = 0; t < f.num_frames(); ++t) {
    CHECK(f.frame(t)[0] == doctest::Approx(c0).epsilon(1e-9));
    for (size_t j = 1; j < 13; ++j) CHECK(std::fabs(f.frame(t)[j]) < 1e-9);
  }
}

TEST_CASE("mfcc13 frame count follows the window arithmetic") {
  AudioClip c = tone_clip(440.0, 1.0);
  auto f = mfcc13(c);
  CHECK(f.num_frames() == (16000 - 400) / 160 + 1);
  AudioClip tiny;
  tiny.samples.assign(399, 0.1);
  CHECK_THROWS_AS(mfcc13(tiny), ConfigError);
}

TEST_CASE("mfcc13 is stationary on a steady tone") {
  auto f = mfcc13(tone_clip(1000.0, 0.5));
  const size_t T = f.num_frames();
  for (size_t j = 0; j < 13; ++j) {
    double mean = 0.0, var = 0.0;
    for (size_t t = 2; t < T; ++t) mean += f.frame(t)[j];
    mean /= static_cast<double>(T - 2);
    for (size_t t = 2; t < T; ++t) {
      const double d = f.frame(t)[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(T - 2);
    CHECK(var < 1e-4);
  }
}

TEST_CASE("mfcc13 matches the straight-line oracle on seeded noise") {
  Rng rng(17);
  AudioClip c;
  c.samples.resize(1200);
  for (double& v : c.samples) v = rng.uniform(-0.8, 0.8);
  auto f = mfcc13(c);
  REQUIRE(f.num_frames() == (1200 - 400) / 160 + 1);
  for (size_t t = 0; t < f.num_frames(); ++t) {
    auto expect = mfcc_frame_oracle(c.samples, t * 160);
    for (size_t j = 0; j < 13; ++j)
      CHECK(std::fabs(f.frame(t)[j] - expect[j]) < 1e-8);
  }
}

TEST_CASE("mfcc39 is mfcc13 plus its delta blocks") {
  Rng rng(23);
  AudioClip c;
  c.samples.resize(2000);
  for (double& v : c.samples) v = rng.uniform(-0.5, 0.5);
  auto base = mfcc13(c);
  auto full = mfcc39(c);
  CHECK(full.dim == 39);
  auto expected = dsp::append_deltas(base);
  CHECK(full.frames == expected.frames);

  // constant-mfcc input (silence): delta blocks vanish
  AudioClip silence;
  silence.samples.assign(8000, 0.0);
  auto fs = mfcc39(silence);
  for (size_t t = 0; t < fs.num_frames(); ++t)
    for (size_t j = 13; j < 39; ++j) CHECK(std::fabs(fs.frame(t)[j]) < 1e-12);
}

TEST_CASE("orthonormal DCT round-trips 26-dim vectors") {
  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> x(26);
    for (double& v : x) v = rng.uniform(-3.0, 3.0);
    auto c = dct2_ortho(x, 26);
    auto back = idct2_ortho(c, 26);
    for (size_t i = 0; i < 26; ++i) CHECK(std::fabs(back[i] - x[i]) < 1e-10);
  }
}

TEST_CASE("mel filterbank weight invariants") {
  auto fb = MelFilterbank::make(16000.0);
  for (size_t m = 0; m < fb.n_mels; ++m) {
    double sum = 0.0;
    for (size_t k = 0; k < fb.bins(); ++k) sum += fb.weights[m * fb.bins() + k];
    CHECK(sum > 0.0);
  }
  for (size_t k = 1; k < fb.bins(); ++k) {
    double total = 0.0;
    for (size_t m = 0; m < fb.n_mels; ++m) total += fb.weights[m * fb.bins() + k];
    CHECK(total <= 1.05);
  }
}

TEST_CASE("griffin-lim recovers the tone region and its residuals do not increase") {
  auto m = mfcc13(tone_clip(1000.0, 0.5));
  auto res = griffin_lim_reconstruct(m, 60);
  REQUIRE(res.residuals.size() == 60);
  for (size_t i = 1; i < res.residuals.size(); ++i)
    CHECK(res.residuals[i] <= res.residuals[i - 1] + 1e-9);
  CHECK(res.residuals.back() <= res.residuals.front());

  const double f = dominant_frequency(res.audio.samples, res.audio.samples.size() / 4,
                                      res.audio.samples.size() / 2, 16000.0);
  CHECK(std::fabs(f - 1000.0) <= 40.0);
}

TEST_CASE("griffin-lim on all-floor MFCC is near silent") {
  dsp::FeatureSequence m;
  m.dim = 13;
  m.frame_rate_hz = 100.0;
  m.frames.assign(20 * 13, 0.0);
  for (size_t t = 0; t < 20; ++t) m.frame(t)[0] = std::sqrt(26.0) * std::log(1e-10);
  auto res = griffin_lim_reconstruct(m, 10);
  double rms = 0.0;
  for (double v : res.audio.samples) rms += v * v;
  rms = std::sqrt(rms / static_cast<double>(res.audio.samples.size()));
  CHECK(rms < 1e-3);
}

TEST_CASE("griffin-lim rejects non-finite input") {
  dsp::FeatureSequence m;
  m.dim = 13;
  m.frames.assign(13, 0.0);
  m.frames[4] = std::nan("");
  CHECK_THROWS_AS(griffin_lim_reconstruct(m, 5), NumericError);
  m.frames[4] = 0.0;
  CHECK_THROWS_AS(griffin_lim_reconstruct(m, 0), ConfigError);
}

TEST_CASE("wav round-trip within 16-bit quantization") {
  auto c = tone_clip(440.0, 0.2);
  write_wav(c, "t.wav");
  auto back = read_wav("t.wav");
  std::remove("t.wav");
  CHECK(back.sample_rate_hz == 16000.0);
  REQUIRE(back.samples.size() == c.samples.size());
  for (size_t i = 0; i < c.samples.size(); ++i)
    CHECK(std::fabs(back.samples[i] - c.samples[i]) < 1.0 / 32000.0);
}
