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

#include <complex>
#include <vector>

namespace neurotalk::dsp {

/// In-place complex transform. Radix-2 when the length is a power of two,
/// otherwise a direct O(n^2) DFT (desk-scale windows only hit that path for
/// short, non-padded windows).
void fft(std::vector<std::complex<double>>& a, bool inverse = false);

/// One-sided spectrum of a real signal zero-padded/truncated to n_fft
/// samples; returns n_fft/2 + 1 bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& x, size_t n_fft);

/// One-sided periodogram |X_k|^2 (unscaled; callers normalize).
std::vector<double> periodogram(const std::vector<double>& x, size_t n_fft);

size_t next_pow2(size_t n);

}  // namespace neurotalk::dsp
