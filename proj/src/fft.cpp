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

#include "neurotalk/fft.hpp"

#include <cmath>

namespace neurotalk::dsp {

namespace {
constexpr double kTau = 6.283185307179586476925286766559;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  // bit reversal
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTau : -kTau) / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
}

void dft_direct(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  // twiddle table indexed by (k*j) mod n
  std::vector<std::complex<double>> w(n);
  const double sgn = inverse ? 1.0 : -1.0;
  for (size_t i = 0; i < n; ++i) {
    const double ang = sgn * kTau * static_cast<double>(i) / static_cast<double>(n);
    w[i] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    size_t idx = 0;
    for (size_t j = 0; j < n; ++j) {
      acc += a[j] * w[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
  a = std::move(out);
}

}  // namespace

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  if (a.empty()) return;
  if (is_pow2(a.size()))
    fft_radix2(a, inverse);
  else
    dft_direct(a, inverse);
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x, size_t n_fft) {
  std::vector<std::complex<double>> a(n_fft, {0.0, 0.0});
  const size_t n = std::min(x.size(), n_fft);
  for (size_t i = 0; i < n; ++i) a[i] = {x[i], 0.0};
  fft(a);
  a.resize(n_fft / 2 + 1);
  return a;
}

std::vector<double> periodogram(const std::vector<double>& x, size_t n_fft) {
  auto spec = rfft(x, n_fft);
  std::vector<double> p(spec.size());
  for (size_t i = 0; i < spec.size(); ++i) p[i] = std::norm(spec[i]);
  return p;
}

}  // namespace neurotalk::dsp
