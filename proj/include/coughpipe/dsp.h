// Copyright 2026 The Coughpipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COUGHPIPE_DSP_H_
#define COUGHPIPE_DSP_H_

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "coughpipe/audio.h"

namespace coughpipe {

// Parameters of the short-time analysis. Defaults give 40 mel bands and
// 40 cepstral coefficients per frame over 2048-sample windows at 16 kHz.
struct SpectralConfig {
  int sample_rate = kCanonicalRate;
  int frame_len = 2048;  // must be a power of two
  int hop = 512;
  int n_mels = 40;
  int n_mfcc = 40;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double log_floor = 1e-10;  // added before every log
};

// A time-frequency matrix: one row per frame.
struct Spectrogram {
  size_t n_frames = 0;
  size_t n_bins = 0;
  std::vector<double> values;  // row-major, n_frames * n_bins

  double at(size_t frame, size_t bin) const {
    return values[frame * n_bins + bin];
  }
};

// Splits a signal into frames of cfg.frame_len samples every cfg.hop
// samples; an incomplete tail is dropped. A signal shorter than one frame
// is zero-padded on the right into a single frame, so the frame count is
//   max(1, floor((n - frame_len) / hop) + 1).
//
// Throws PreconditionError (empty signal, bad config).
std::vector<std::vector<double>> frame_signal(const std::vector<double>& x,
                                              const SpectralConfig& cfg);

// Periodic Hann window: w[k] = 0.5 * (1 - cos(2*pi*k / n)).
std::vector<double> hann_window(int n);

// In-place radix-2 decimation-in-time FFT. The length must be a power of
// two. Used forward here; conjugate twice for the inverse.
void fft_inplace(std::vector<std::complex<double>>& a);

// Squared-magnitude spectrum of one windowed frame: |DFT(x)|^2 for bins
// 0 .. n/2 (n/2 + 1 values). The frame length must be a power of two.
//
// Throws PreconditionError.
std::vector<double> power_spectrum(const std::vector<double>& frame);

// Mel scale: m = 2595 * log10(1 + f / 700) and its inverse.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filterbank as a dense matrix of n_mels rows by
// frame_len/2 + 1 columns. The n_mels + 2 edge points are equally spaced
// in mel between fmin_hz and fmax_hz and snapped to spectrum bins; each
// filter rises linearly to 1.0 at its centre bin and falls back to zero,
// so every row peaks at exactly 1.0 (no area normalization).
//
// Throws DegenerateFilter when two adjacent edge points land on the same
// bin (frame_len too small for n_mels), PreconditionError for bad ranges.
std::vector<std::vector<double>> mel_filterbank(const SpectralConfig& cfg);

// Frames, windows, and transforms a clip into log mel energies:
// ln(filterbank * power + log_floor) per frame. Rows are frames, columns
// the n_mels bands.
//
// Throws PreconditionError (wrong sample rate, empty clip).
Spectrogram log_mel_spectrogram(const AudioClip& clip,
                                const SpectralConfig& cfg);

// Orthonormal DCT-II of one vector:
//   X[k] = s(k) * sum_n x[n] * cos(pi * (2n + 1) * k / (2N)),
//   s(0) = sqrt(1/N), s(k>0) = sqrt(2/N).
// The transform matrix is orthogonal, so energy is preserved.
std::vector<double> dct_ii_orthonormal(const std::vector<double>& x);

// Cepstral coefficients: the DCT-II of each log-mel row, keeping the
// first n_mfcc coefficients.
Spectrogram mfcc(const AudioClip& clip, const SpectralConfig& cfg);

// Writes a spectrogram as CSV, one frame per row.
//
// Throws IoFailure.
void write_spectrogram_csv(const Spectrogram& spec, const std::string& path);

}  // namespace coughpipe

#endif  // COUGHPIPE_DSP_H_
