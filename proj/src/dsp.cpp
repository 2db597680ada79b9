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

#include "neurotalk/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "neurotalk/binio.hpp"
#include "neurotalk/fft.hpp"

namespace neurotalk::dsp {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTau = 2.0 * kPi;
}  // namespace

void RawEeg::validate() const {
  if (channels.empty()) throw ConfigError("RawEeg: no channels");
  const size_t n = channels[0].size();
  for (const auto& ch : channels)
    if (ch.size() != n) throw ShapeError("RawEeg: channel lengths differ");
  if (sample_rate_hz <= 0.0) throw ConfigError("RawEeg: non-positive sample rate");
}

// ---- filter design -----------------------------------------------------------

std::vector<Biquad> design_butter_bandpass(int order, double low_hz, double high_hz, double fs) {
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0))
    throw ConfigError("bandpass: need 0 < low < high < fs/2, got [" + std::to_string(low_hz) +
                      ", " + std::to_string(high_hz) + "] at fs " + std::to_string(fs));
  if (order < 1 || order % 2 != 0)
    throw ConfigError("bandpass: prototype order must be a positive even number");

  using cd = std::complex<double>;
  const double k = 2.0 * fs;
  // prewarped analog edges
  const double wl = k * std::tan(kPi * low_hz / fs);
  const double wh = k * std::tan(kPi * high_hz / fs);
  const double w0sq = wl * wh;
  const double bw = wh - wl;

  // analog prototype poles (upper half), each yielding two bandpass poles
  std::vector<cd> zpoles;
  for (int m = 1; m <= order / 2; ++m) {
    const double ang = kPi * (2.0 * m + order - 1.0) / (2.0 * order);
    const cd p(std::cos(ang), std::sin(ang));
    const cd pb = p * bw;
    const cd disc = std::sqrt(pb * pb - 4.0 * w0sq);
    for (const cd s : {(pb + disc) / 2.0, (pb - disc) / 2.0}) {
      const cd z = (k + s) / (k - s);  // bilinear
      if (std::abs(z) >= 1.0)
        throw ConfigError("bandpass: unstable design, cutoffs too close to Nyquist");
      zpoles.push_back(z);
    }
  }

  // each pole pairs with its conjugate; zeros at z=+1 go to the sections
  // holding the low-edge poles (small angle), z=-1 to the high-edge ones
  std::sort(zpoles.begin(), zpoles.end(),
            [](const cd& a, const cd& b) { return std::fabs(std::arg(a)) < std::fabs(std::arg(b)); });
  std::vector<Biquad> sections;
  for (size_t i = 0; i < zpoles.size(); ++i) {
    const cd z = zpoles[i];
    const double a1 = -2.0 * z.real();
    const double a2 = std::norm(z);
    const bool dc_zero = i < zpoles.size() / 2;
    sections.push_back(dc_zero ? Biquad{1.0, -2.0, 1.0, a1, a2} : Biquad{1.0, 2.0, 1.0, a1, a2});
  }

  // unit gain at the digital frequency matching the analog center sqrt(wl*wh)
  const double wc = 2.0 * std::atan(std::sqrt(w0sq) / k);
  const cd zc(std::cos(wc), std::sin(wc));
  for (Biquad& s : sections) {
    const cd num = s.b0 * zc * zc + s.b1 * zc + cd(s.b2, 0.0);
    const cd den = zc * zc + s.a1 * zc + cd(s.a2, 0.0);
    const double gain = std::abs(num / den);
    if (gain <= 0.0 || !std::isfinite(gain)) throw ConfigError("bandpass: degenerate section gain");
    s.b0 /= gain;
    s.b1 /= gain;
    s.b2 /= gain;
  }
  return sections;
}

Biquad design_notch(double notch_hz, double quality, double fs) {
  if (!(notch_hz > 0.0 && notch_hz < fs / 2.0))
    throw ConfigError("notch: frequency must sit below Nyquist");
  const double w0 = kTau * notch_hz / fs;
  const double alpha = std::sin(w0) / (2.0 * quality);
  const double a0 = 1.0 + alpha;
  return Biquad{1.0 / a0, -2.0 * std::cos(w0) / a0, 1.0 / a0, -2.0 * std::cos(w0) / a0,
                (1.0 - alpha) / a0};
}

std::vector<double> apply_biquads(const std::vector<Biquad>& sections,
                                  const std::vector<double>& x) {
  std::vector<double> y = x;
  for (const Biquad& s : sections) {
    double s1 = 0.0, s2 = 0.0;  // direct form II transposed
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

RawEeg bandpass_iir(const RawEeg& x, const FilterSpec& spec) {
  x.validate();
  auto sections =
      design_butter_bandpass(spec.order, spec.cutoff_low_hz, spec.cutoff_high_hz, x.sample_rate_hz);
  RawEeg out;
  out.sample_rate_hz = x.sample_rate_hz;
  out.channels.reserve(x.channels.size());
  for (const auto& ch : x.channels) out.channels.push_back(apply_biquads(sections, ch));
  return out;
}

RawEeg notch_60(const RawEeg& x) {
  x.validate();
  if (x.sample_rate_hz <= 120.0) throw ConfigError("notch_60: sample rate must exceed 120 Hz");
  std::vector<Biquad> sections{design_notch(60.0, 30.0, x.sample_rate_hz)};
  RawEeg out;
  out.sample_rate_hz = x.sample_rate_hz;
  out.channels.reserve(x.channels.size());
  for (const auto& ch : x.channels) out.channels.push_back(apply_biquads(sections, ch));
  return out;
}

size_t window_count(size_t signal_len, const WindowSpec& w) {
  if (w.hop == 0 || w.hop > w.window_len) throw ConfigError("window spec: need 0 < hop <= window");
  if (signal_len < w.window_len)
    throw ConfigError("signal of " + std::to_string(signal_len) +
                      " samples is shorter than one window (" + std::to_string(w.window_len) + ")");
  return (signal_len - w.window_len) / w.hop + 1;
}

// ---- per-window descriptors ----------------------------------------------------

double rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double zero_crossing_rate(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  size_t count = 0;
  for (size_t i = 1; i < x.size(); ++i)
    if (x[i - 1] * x[i] < 0.0) ++count;
  return static_cast<double>(count) / static_cast<double>(x.size() - 1);
}

double kurtosis(std::span<const double> x, bool* degenerate) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  if (m2 < 1e-20) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return m4 / (m2 * m2);
}

namespace {
double entropy_of(std::vector<double> p) {
  double total = 0.0;
  for (double v : p) total += v;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double v : p) {
    if (v <= 0.0) continue;
    const double q = v / total;
    h -= q * std::log(q);
  }
  return h;
}
}  // namespace

double spectral_entropy_psd(std::span<const double> x) {
  return entropy_of(periodogram(std::vector<double>(x.begin(), x.end()), x.size()));
}

double stft_mean_magnitude(std::span<const double> x) {
  const size_t n = x.size();
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i)
    w[i] = x[i] * 0.5 * (1.0 - std::cos(kTau * static_cast<double>(i) / static_cast<double>(n)));
  auto spec = rfft(w, n);
  double acc = 0.0;
  for (const auto& c : spec) acc += std::abs(c);
  return acc / static_cast<double>(spec.size());
}

// pywt's db4 analysis filters (8 taps).
namespace {
constexpr double kDb4Lo[8] = {-0.010597401784997278, 0.032883011666982945, 0.030841381835986965,
                              -0.18703481171888114,  -0.02798376941698385, 0.6308807679295904,
                              0.7148465705525415,    0.23037781330885523};
constexpr double kDb4Hi[8] = {-0.23037781330885523, 0.7148465705525415,   -0.6308807679295904,
                              -0.02798376941698385, 0.18703481171888114,  0.030841381835986965,
                              -0.032883011666982945, -0.010597401784997278};

double ext_symmetric(std::span<const double> x, long i) {
  const long n = static_cast<long>(x.size());
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return x[static_cast<size_t>(i)];
}
}  // namespace

void dwt_db4_level1(std::span<const double> x, std::vector<double>& approx,
                    std::vector<double>& detail) {
  if (x.size() < 8) throw ConfigError("dwt_db4: window must hold at least 8 samples");
  const size_t out_len = (x.size() + 8 - 1) / 2;
  approx.assign(out_len, 0.0);
  detail.assign(out_len, 0.0);
  for (size_t m = 0; m < out_len; ++m) {
    double lo = 0.0, hi = 0.0;
    for (int j = 0; j < 8; ++j) {
      const double v = ext_symmetric(x, static_cast<long>(2 * m + 1) - j);
      lo += kDb4Lo[j] * v;
      hi += kDb4Hi[j] * v;
    }
    approx[m] = lo;
    detail[m] = hi;
  }
}

double coefficient_entropy(std::span<const double> coeffs, double ref_energy) {
  std::vector<double> sq(coeffs.size());
  double total = 0.0;
  for (size_t i = 0; i < coeffs.size(); ++i) {
    sq[i] = coeffs[i] * coeffs[i];
    total += sq[i];
  }
  if (total <= 1e-20 * ref_energy) return 0.0;
  return entropy_of(std::move(sq));
}

double band_spectral_entropy(std::span<const double> x, double fs, bool* degenerate) {
  static constexpr double kEdges[5] = {0.5, 4.0, 7.0, 12.0, 30.0};
  const size_t n_fft = std::max<size_t>(2048, next_pow2(x.size()));
  auto psd = periodogram(std::vector<double>(x.begin(), x.end()), n_fft);
  const double bin_hz = fs / static_cast<double>(n_fft);
  std::vector<double> bands(4, 0.0);
  for (size_t i = 0; i < psd.size(); ++i) {
    const double f = bin_hz * static_cast<double>(i);
    for (int b = 0; b < 4; ++b) {
      const bool in_band = (f >= kEdges[b] && f < kEdges[b + 1]) || (b == 3 && f == kEdges[4]);
      if (in_band) {
        bands[static_cast<size_t>(b)] += psd[i];
        break;
      }
    }
  }
  double total = bands[0] + bands[1] + bands[2] + bands[3];
  if (total <= 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return entropy_of(std::move(bands));
}

double hurst_exponent(std::span<const double> x, bool* degenerate) {
  const size_t n = x.size();
  std::vector<size_t> lengths;
  for (size_t len : {size_t{10}, size_t{20}, size_t{50}, n})
    if (len <= n && (lengths.empty() || len != lengths.back())) lengths.push_back(len);

  std::vector<double> log_len, log_rs;
  for (size_t len : lengths) {
    const size_t blocks = n / len;
    double rs_sum = 0.0;
    size_t valid = 0;
    for (size_t b = 0; b < blocks; ++b) {
      const double* seg = x.data() + b * len;
      double mean = 0.0;
      for (size_t i = 0; i < len; ++i) mean += seg[i];
      mean /= static_cast<double>(len);
      double cum = 0.0, mx = 0.0, mn = 0.0, var = 0.0;
      for (size_t i = 0; i < len; ++i) {
        cum += seg[i] - mean;
        mx = std::max(mx, cum);
        mn = std::min(mn, cum);
        var += (seg[i] - mean) * (seg[i] - mean);
      }
      const double s = std::sqrt(var / static_cast<double>(len));
      if (s < 1e-12) continue;
      rs_sum += (mx - mn) / s;
      ++valid;
    }
    if (valid == 0) continue;
    log_len.push_back(std::log(static_cast<double>(len)));
    log_rs.push_back(std::log(rs_sum / static_cast<double>(valid)));
  }
  if (log_len.size() < 2) {
    if (degenerate) *degenerate = true;
    return 0.5;
  }
  // least-squares slope
  const double m = static_cast<double>(log_len.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < log_len.size(); ++i) {
    sx += log_len[i];
    sy += log_rs[i];
    sxx += log_len[i] * log_len[i];
    sxy += log_len[i] * log_rs[i];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double petrosian_fd(std::span<const double> x) {
  const size_t n = x.size();
  if (n < 3) return 1.0;
  size_t delta = 0;
  double prev = x[1] - x[0];
  for (size_t i = 2; i < n; ++i) {
    const double d = x[i] - x[i - 1];
    if (prev * d < 0.0) ++delta;
    prev = d;
  }
  const double logn = std::log10(static_cast<double>(n));
  const double nd = static_cast<double>(delta);
  return logn / (logn + std::log10(static_cast<double>(n) / (static_cast<double>(n) + 0.4 * nd)));
}

// ---- feature sets ----------------------------------------------------------------

namespace {

template <typename PerWindow>
ExtractResult extract_generic(const RawEeg& x, const WindowSpec& w, const char* set_id,
                              size_t feats_per_channel, PerWindow fn) {
  x.validate();
  const size_t frames = window_count(x.num_samples(), w);
  const size_t channels = x.num_channels();
  ExtractResult res;
  res.features.frame_rate_hz = x.sample_rate_hz / static_cast<double>(w.hop);
  res.features.dim = channels * feats_per_channel;
  res.features.set_id = set_id;
  res.features.frames.assign(frames * res.features.dim, 0.0);
  for (size_t c = 0; c < channels; ++c) {
    const auto& ch = x.channels[c];
    for (size_t t = 0; t < frames; ++t) {
      std::span<const double> win(ch.data() + t * w.hop, w.window_len);
      double* out = res.features.frame(t) + c * feats_per_channel;
      fn(win, out, res.degenerate_windows);
    }
  }
  return res;
}

}  // namespace

ExtractResult extract_set1(const RawEeg& x, const WindowSpec& w) {
  return extract_generic(x, w, "1", 5,
                         [&](std::span<const double> win, double* out, size_t& degenerate) {
                           bool degen = false;
                           out[0] = rms(win);
                           out[1] = zero_crossing_rate(win);
                           double mean = 0.0;
                           for (double v : win) mean += v;
                           out[2] = mean / static_cast<double>(win.size());
                           out[3] = kurtosis(win, &degen);
                           out[4] = spectral_entropy_psd(win);
                           if (degen) ++degenerate;
                         });
}

ExtractResult extract_set2(const RawEeg& x, const WindowSpec& w) {
  if (w.window_len < 8) throw ConfigError("set 2 requires windows of at least 8 samples");
  return extract_generic(x, w, "2", 3,
                         [&](std::span<const double> win, double* out, size_t&) {
                           std::vector<double> approx, detail;
                           dwt_db4_level1(win, approx, detail);
                           double energy = 0.0;
                           for (double v : win) energy += v * v;
                           out[0] = stft_mean_magnitude(win);
                           out[1] = coefficient_entropy(approx, energy);
                           out[2] = coefficient_entropy(detail, energy);
                         });
}

ExtractResult extract_set3(const RawEeg& x, const WindowSpec& w) {
  const double fs = x.sample_rate_hz;
  return extract_generic(x, w, "3", 3,
                         [fs](std::span<const double> win, double* out, size_t& degenerate) {
                           bool d1 = false, d2 = false;
                           out[0] = band_spectral_entropy(win, fs, &d1);
                           out[1] = hurst_exponent(win, &d2);
                           out[2] = petrosian_fd(win);
                           if (d1 || d2) ++degenerate;
                         });
}

ExtractResult extract_features(const RawEeg& x, const WindowSpec& w, int set_id) {
  switch (set_id) {
    case 1: return extract_set1(x, w);
    case 2: return extract_set2(x, w);
    case 3: return extract_set3(x, w);
    default: throw ConfigError("unknown feature set " + std::to_string(set_id));
  }
}

FeatureSequence append_deltas(const FeatureSequence& f) {
  if (f.num_frames() == 0) throw ConfigError("append_deltas: empty feature sequence");
  const size_t T = f.num_frames(), D = f.dim;
  auto delta_of = [&](const std::vector<double>& src) {
    std::vector<double> d(T * D);
    for (size_t t = 0; t < T; ++t) {
      const size_t prev = t == 0 ? 0 : t - 1;
      const size_t next = t + 1 >= T ? T - 1 : t + 1;
      for (size_t j = 0; j < D; ++j)
        d[t * D + j] = (src[next * D + j] - src[prev * D + j]) / 2.0;
    }
    return d;
  };
  std::vector<double> d1 = delta_of(f.frames);
  std::vector<double> d2 = delta_of(d1);
  FeatureSequence out;
  out.frame_rate_hz = f.frame_rate_hz;
  out.dim = 3 * D;
  out.set_id = f.set_id;
  out.frames.resize(T * out.dim);
  for (size_t t = 0; t < T; ++t) {
    std::copy_n(f.frames.data() + t * D, D, out.frames.data() + t * out.dim);
    std::copy_n(d1.data() + t * D, D, out.frames.data() + t * out.dim + D);
    std::copy_n(d2.data() + t * D, D, out.frames.data() + t * out.dim + 2 * D);
  }
  return out;
}

// ---- montage ------------------------------------------------------------------------

const std::vector<std::string>& default_channel_names() {
  static const std::vector<std::string> names = {
      "Fp1", "Fp2", "F7",  "F3",  "Fz",  "F4",  "F8",  "FC5", "FC1", "FC2", "FC6",
      "T7",  "C3",  "Cz",  "C4",  "T8",  "TP9", "CP5", "CP1", "CP2", "CP6", "TP10",
      "P7",  "P3",  "Pz",  "P4",  "P8",  "PO9", "O1",  "Oz",  "O2"};
  return names;
}

const std::map<std::string, size_t>& default_montage() {
  static const std::map<std::string, size_t> m = [] {
    std::map<std::string, size_t> out;
    const auto& names = default_channel_names();
    for (size_t i = 0; i < names.size(); ++i) out[names[i]] = i;
    return out;
  }();
  return m;
}

std::map<std::string, size_t> load_montage(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open montage file: " + path);
  std::map<std::string, size_t> out;
  std::string line;
  while (std::getline(is, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string name = line.substr(0, eq);
    std::string idx = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
    };
    strip(name);
    strip(idx);
    if (name.empty() || idx.empty()) continue;
    out[name] = static_cast<size_t>(std::stoul(idx));
  }
  return out;
}

RawEeg select_channels(const RawEeg& x, const std::vector<std::string>& names,
                       const std::map<std::string, size_t>& montage) {
  x.validate();
  if (names.empty()) throw ConfigError("select_channels: empty channel list");
  RawEeg out;
  out.sample_rate_hz = x.sample_rate_hz;
  for (const auto& name : names) {
    auto it = montage.find(name);
    if (it == montage.end()) throw ConfigError("unknown channel name: " + name);
    if (it->second >= x.num_channels())
      throw ConfigError("channel " + name + " maps past the recorded channel count");
    out.channels.push_back(x.channels[it->second]);
  }
  return out;
}

// ---- binary formats ----------------------------------------------------------------

void write_raw_eeg(const RawEeg& x, const std::string& path) {
  x.validate();
  auto os = io::open_out(path);
  os.write("NTEG", 4);
  io::put_u32(os, 1);
  io::put_u16(os, static_cast<uint16_t>(x.num_channels()));
  io::put_f64(os, x.sample_rate_hz);
  io::put_u64(os, x.num_samples());
  for (const auto& ch : x.channels)
    for (double v : ch) io::put_f64(os, v);
  if (!os) throw IoError("write failed: " + path);
}

RawEeg read_raw_eeg(const std::string& path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "NTEG", path);
  const uint32_t version = io::get_u32(is);
  if (version != 1) throw IoError(path + ": unsupported NTEG version");
  const uint16_t channels = io::get_u16(is);
  RawEeg out;
  out.sample_rate_hz = io::get_f64(is);
  const uint64_t len = io::get_u64(is);
  out.channels.assign(channels, std::vector<double>(len));
  for (auto& ch : out.channels)
    for (double& v : ch) v = io::get_f64(is);
  if (!is) throw IoError(path + ": truncated NTEG payload");
  return out;
}

void write_features(const FeatureSequence& f, const std::string& path) {
  auto os = io::open_out(path);
  os.write("NTFS", 4);
  io::put_f64(os, f.frame_rate_hz);
  io::put_u32(os, static_cast<uint32_t>(f.dim));
  io::put_u64(os, f.num_frames());
  for (double v : f.frames) io::put_f64(os, v);
  if (!os) throw IoError("write failed: " + path);
}

FeatureSequence read_features(const std::string& path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "NTFS", path);
  FeatureSequence f;
  f.frame_rate_hz = io::get_f64(is);
  f.dim = io::get_u32(is);
  const uint64_t frames = io::get_u64(is);
  f.frames.resize(frames * f.dim);
  for (double& v : f.frames) v = io::get_f64(is);
  if (!is) throw IoError(path + ": truncated NTFS payload");
  return f;
}

}  // namespace neurotalk::dsp
