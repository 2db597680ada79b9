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

#include "neurotalk/audio.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "neurotalk/binio.hpp"
#include "neurotalk/fft.hpp"

namespace neurotalk::audio {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTau = 2.0 * kPi;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

std::vector<double> hann(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(kTau * static_cast<double>(i) / static_cast<double>(n));
  return w;
}
}  // namespace

// ---- WAV --------------------------------------------------------------------

void write_wav(const AudioClip& clip, const std::string& path) {
  if (clip.samples.empty()) throw ConfigError("write_wav: empty clip");
  auto os = io::open_out(path);
  const uint32_t rate = static_cast<uint32_t>(clip.sample_rate_hz);
  const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
  os.write("RIFF", 4);
  io::put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  io::put_u32(os, 16);
  io::put_u16(os, 1);  // PCM
  io::put_u16(os, 1);  // mono
  io::put_u32(os, rate);
  io::put_u32(os, rate * 2);
  io::put_u16(os, 2);
  io::put_u16(os, 16);
  os.write("data", 4);
  io::put_u32(os, data_bytes);
  for (double v : clip.samples) {
    const double clamped = std::clamp(v, -1.0, 1.0);
    io::put_i16(os, static_cast<int16_t>(std::lround(clamped * 32767.0)));
  }
  if (!os) throw IoError("write failed: " + path);
}

AudioClip read_wav(const std::string& path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "RIFF", path);
  io::get_u32(is);
  char wave[4];
  is.read(wave, 4);
  if (std::memcmp(wave, "WAVE", 4) != 0) throw IoError(path + ": not a WAVE file");

  AudioClip clip;
  uint16_t channels = 1, bits = 16;
  bool got_fmt = false;
  while (is) {
    char id[4];
    is.read(id, 4);
    if (!is) break;
    const uint32_t size = io::get_u32(is);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      const uint16_t format = io::get_u16(is);
      channels = io::get_u16(is);
      clip.sample_rate_hz = io::get_u32(is);
      io::get_u32(is);
      io::get_u16(is);
      bits = io::get_u16(is);
      if (size > 16) is.ignore(size - 16);
      if (format != 1 || channels != 1 || bits != 16)
        throw IoError(path + ": only PCM16 mono is supported");
      got_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!got_fmt) throw IoError(path + ": data chunk before fmt");
      const size_t n = size / 2;
      clip.samples.resize(n);
      for (size_t i = 0; i < n; ++i)
        clip.samples[i] = static_cast<double>(io::get_i16(is)) / 32767.0;
      return clip;
    } else {
      is.ignore(size + (size & 1));
    }
  }
  throw IoError(path + ": no data chunk");
}

// ---- mel filterbank -----------------------------------------------------------

MelFilterbank MelFilterbank::make(double sample_rate, size_t n_mels, size_t fft_size, double fmin,
                                  double fmax) {
  MelFilterbank fb;
  fb.n_mels = n_mels;
  fb.fft_size = fft_size;
  fb.fmin_hz = fmin;
  fb.fmax_hz = fmax;
  const size_t bins = fb.bins();
  fb.weights.assign(n_mels * bins, 0.0);

  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(n_mels + 1));

  for (size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (size_t k = 0; k < bins; ++k) {
      const double f = sample_rate * static_cast<double>(k) / static_cast<double>(fft_size);
      double w = 0.0;
      if (f >= left && f <= center && center > left)
        w = (f - left) / (center - left);
      else if (f > center && f <= right && right > center)
        w = (right - f) / (right - center);
      fb.weights[m * bins + k] = w;
    }
  }
  return fb;
}

// ---- DCT ------------------------------------------------------------------------

std::vector<double> dct2_ortho(const std::vector<double>& x, size_t n_out) {
  const size_t n = x.size();
  std::vector<double> c(n_out, 0.0);
  for (size_t k = 0; k < n_out; ++k) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i)
      acc += x[i] * std::cos(kPi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) /
                             (2.0 * static_cast<double>(n)));
    const double scale = (k == 0) ? std::sqrt(1.0 / static_cast<double>(n))
                                  : std::sqrt(2.0 / static_cast<double>(n));
    c[k] = scale * acc;
  }
  return c;
}

std::vector<double> idct2_ortho(const std::vector<double>& c, size_t n_out) {
  const size_t n = n_out;
  std::vector<double> x(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (size_t k = 0; k < c.size(); ++k) {
      const double scale = (k == 0) ? std::sqrt(1.0 / static_cast<double>(n))
                                    : std::sqrt(2.0 / static_cast<double>(n));
      acc += scale * c[k] *
             std::cos(kPi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) /
                      (2.0 * static_cast<double>(n)));
    }
    x[i] = acc;
  }
  return x;
}

// ---- MFCC -----------------------------------------------------------------------

namespace {

struct FrameGrid {
  size_t frame_len, hop, count;
};

FrameGrid frame_grid(const AudioClip& clip, const MfccConfig& cfg) {
  FrameGrid g;
  g.frame_len = static_cast<size_t>(std::lround(clip.sample_rate_hz * cfg.frame_ms / 1000.0));
  g.hop = static_cast<size_t>(std::lround(clip.sample_rate_hz * cfg.hop_ms / 1000.0));
  if (clip.samples.size() < g.frame_len)
    throw ConfigError("mfcc: clip shorter than one analysis frame");
  g.count = (clip.samples.size() - g.frame_len) / g.hop + 1;
  return g;
}

}  // namespace

dsp::FeatureSequence mfcc13(const AudioClip& clip, const MfccConfig& cfg) {
  for (double v : clip.samples)
    if (!std::isfinite(v)) throw NumericError("mfcc: non-finite sample");
  const FrameGrid grid = frame_grid(clip, cfg);
  const MelFilterbank fb =
      MelFilterbank::make(clip.sample_rate_hz, cfg.n_mels, cfg.fft_size, 0.0, 8000.0);
  const std::vector<double> window = hann(grid.frame_len);

  std::vector<double> emphasized(clip.samples.size());
  emphasized[0] = clip.samples[0];
  for (size_t i = 1; i < clip.samples.size(); ++i)
    emphasized[i] = clip.samples[i] - cfg.pre_emphasis * clip.samples[i - 1];

  dsp::FeatureSequence out;
  out.frame_rate_hz = clip.sample_rate_hz / static_cast<double>(grid.hop);
  out.dim = cfg.n_coeffs;
  out.set_id = "mfcc";
  out.frames.resize(grid.count * cfg.n_coeffs);

  std::vector<double> frame(grid.frame_len);
  std::vector<double> mel(cfg.n_mels);
  for (size_t t = 0; t < grid.count; ++t) {
    for (size_t i = 0; i < grid.frame_len; ++i)
      frame[i] = emphasized[t * grid.hop + i] * window[i];
    auto power = dsp::periodogram(frame, cfg.fft_size);
    for (size_t m = 0; m < cfg.n_mels; ++m) {
      double acc = 0.0;
      const double* w = fb.weights.data() + m * fb.bins();
      for (size_t k = 0; k < power.size(); ++k) acc += w[k] * power[k];
      mel[m] = std::log(std::max(acc, cfg.log_floor));
    }
    auto ceps = dct2_ortho(mel, cfg.n_coeffs);
    std::copy(ceps.begin(), ceps.end(), out.frames.begin() + static_cast<long>(t * cfg.n_coeffs));
  }
  return out;
}

dsp::FeatureSequence mfcc39(const AudioClip& clip, const MfccConfig& cfg) {
  return dsp::append_deltas(mfcc13(clip, cfg));
}

// ---- Griffin-Lim -------------------------------------------------------------------

namespace {

// One-sided STFT of x: frames (hann * 400 samples) zero-padded to fft_size.
std::vector<std::vector<std::complex<double>>> stft(const std::vector<double>& x, size_t frames,
                                                    size_t frame_len, size_t hop, size_t fft_size,
                                                    const std::vector<double>& window) {
  std::vector<std::vector<std::complex<double>>> out(frames);
  std::vector<double> buf(frame_len);
  for (size_t t = 0; t < frames; ++t) {
    for (size_t i = 0; i < frame_len; ++i) {
      const size_t idx = t * hop + i;
      buf[i] = (idx < x.size() ? x[idx] : 0.0) * window[i];
    }
    out[t] = dsp::rfft(buf, fft_size);
  }
  return out;
}

// Least-squares inverse: windowed overlap-add normalized by the squared
// window envelope, which makes stft(istft(.)) a projection.
std::vector<double> istft(const std::vector<std::vector<std::complex<double>>>& spec,
                          size_t frame_len, size_t hop, size_t fft_size,
                          const std::vector<double>& window, size_t out_len) {
  std::vector<double> num(out_len, 0.0), den(out_len, 0.0);
  const size_t bins = fft_size / 2 + 1;
  std::vector<std::complex<double>> full(fft_size);
  for (size_t t = 0; t < spec.size(); ++t) {
    for (size_t k = 0; k < bins; ++k) full[k] = spec[t][k];
    for (size_t k = bins; k < fft_size; ++k) full[k] = std::conj(spec[t][fft_size - k]);
    dsp::fft(full, true);
    for (size_t i = 0; i < frame_len; ++i) {
      const size_t idx = t * hop + i;
      if (idx >= out_len) break;
      num[idx] += window[i] * full[i].real();
      den[idx] += window[i] * window[i];
    }
  }
  for (size_t i = 0; i < out_len; ++i) num[i] = den[i] > 1e-12 ? num[i] / den[i] : 0.0;
  return num;
}

}  // namespace

GriffinLimResult griffin_lim_reconstruct(const dsp::FeatureSequence& mfcc, int iters,
                                         const MfccConfig& cfg) {
  if (iters < 1) throw ConfigError("griffin_lim: iters must be >= 1");
  if (mfcc.dim != cfg.n_coeffs) throw ShapeError("griffin_lim: expected 13-dim MFCC frames");
  for (double v : mfcc.frames)
    if (!std::isfinite(v)) throw NumericError("griffin_lim: non-finite MFCC input");

  const double fs = 16000.0;
  const size_t frame_len = static_cast<size_t>(std::lround(fs * cfg.frame_ms / 1000.0));
  const size_t hop = static_cast<size_t>(std::lround(fs * cfg.hop_ms / 1000.0));
  const size_t T = mfcc.num_frames();
  const size_t bins = cfg.fft_size / 2 + 1;
  const MelFilterbank fb = MelFilterbank::make(fs, cfg.n_mels, cfg.fft_size, 0.0, 8000.0);

  // mel power from cepstra
  std::vector<std::vector<double>> mel_power(T);
  for (size_t t = 0; t < T; ++t) {
    std::vector<double> ceps(mfcc.frame(t), mfcc.frame(t) + cfg.n_coeffs);
    auto logmel = idct2_ortho(ceps, cfg.n_mels);
    mel_power[t].resize(cfg.n_mels);
    for (size_t m = 0; m < cfg.n_mels; ++m) mel_power[t][m] = std::exp(logmel[m]);
  }

  // clamped pseudo-inverse of the filterbank: pinv = W^T (W W^T)^-1
  const size_t M = cfg.n_mels;
  std::vector<double> gram(M * M, 0.0);
  for (size_t a = 0; a < M; ++a)
    for (size_t b = 0; b < M; ++b) {
      double acc = 0.0;
      for (size_t k = 0; k < bins; ++k) acc += fb.weights[a * bins + k] * fb.weights[b * bins + k];
      gram[a * M + b] = acc;
    }
  // Gauss-Jordan inverse of the small Gram matrix (diagonally regularized)
  std::vector<double> inv(M * M, 0.0);
  for (size_t i = 0; i < M; ++i) inv[i * M + i] = 1.0;
  for (size_t i = 0; i < M; ++i) gram[i * M + i] += 1e-10;
  for (size_t col = 0; col < M; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < M; ++r)
      if (std::fabs(gram[r * M + col]) > std::fabs(gram[piv * M + col])) piv = r;
    for (size_t j = 0; j < M; ++j) {
      std::swap(gram[piv * M + j], gram[col * M + j]);
      std::swap(inv[piv * M + j], inv[col * M + j]);
    }
    const double d = gram[col * M + col];
    if (std::fabs(d) < 1e-300) throw NumericError("griffin_lim: singular filterbank gram");
    for (size_t j = 0; j < M; ++j) {
      gram[col * M + j] /= d;
      inv[col * M + j] /= d;
    }
    for (size_t r = 0; r < M; ++r) {
      if (r == col) continue;
      const double f = gram[r * M + col];
      for (size_t j = 0; j < M; ++j) {
        gram[r * M + j] -= f * gram[col * M + j];
        inv[r * M + j] -= f * inv[col * M + j];
      }
    }
  }

  // target linear magnitudes (power clamped at zero, then sqrt)
  std::vector<std::vector<double>> target(T, std::vector<double>(bins, 0.0));
  for (size_t t = 0; t < T; ++t) {
    std::vector<double> y(M, 0.0);  // (W W^T)^-1 * mel
    for (size_t a = 0; a < M; ++a) {
      double acc = 0.0;
      for (size_t b = 0; b < M; ++b) acc += inv[a * M + b] * mel_power[t][b];
      y[a] = acc;
    }
    for (size_t k = 0; k < bins; ++k) {
      double acc = 0.0;
      for (size_t a = 0; a < M; ++a) acc += fb.weights[a * bins + k] * y[a];
      target[t][k] = std::sqrt(std::max(acc, 0.0));
    }
  }

  const std::vector<double> window = hann(frame_len);
  const size_t out_len = (T - 1) * hop + frame_len;

  // zero initial phase
  std::vector<std::vector<std::complex<double>>> spec(T,
                                                      std::vector<std::complex<double>>(bins));
  for (size_t t = 0; t < T; ++t)
    for (size_t k = 0; k < bins; ++k) spec[t][k] = {target[t][k], 0.0};

  GriffinLimResult res;
  std::vector<double> x = istft(spec, frame_len, hop, cfg.fft_size, window, out_len);
  for (int it = 0; it < iters; ++it) {
    auto s = stft(x, T, frame_len, hop, cfg.fft_size, window);
    double err = 0.0;
    for (size_t t = 0; t < T; ++t)
      for (size_t k = 0; k < bins; ++k) {
        const double mag = std::abs(s[t][k]);
        err += (mag - target[t][k]) * (mag - target[t][k]);
        spec[t][k] = mag > 1e-300 ? s[t][k] / mag * target[t][k]
                                  : std::complex<double>(target[t][k], 0.0);
      }
    res.residuals.push_back(std::sqrt(err));
    x = istft(spec, frame_len, hop, cfg.fft_size, window, out_len);
  }

  res.audio.sample_rate_hz = fs;
  res.audio.samples = std::move(x);
  return res;
}

}  // namespace neurotalk::audio
