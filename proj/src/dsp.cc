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

#include "coughpipe/dsp.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "coughpipe/errors.h"

namespace coughpipe {
namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_config(const SpectralConfig& cfg) {
  if (cfg.sample_rate <= 0) throw PreconditionError("non-positive sample rate");
  if (!is_pow2(cfg.frame_len)) {
    throw PreconditionError("frame_len must be a power of two");
  }
  if (cfg.hop <= 0) throw PreconditionError("hop must be positive");
  if (cfg.n_mels <= 0 || cfg.n_mfcc <= 0) {
    throw PreconditionError("band and coefficient counts must be positive");
  }
  if (cfg.n_mfcc > cfg.n_mels) {
    throw PreconditionError("n_mfcc cannot exceed n_mels");
  }
  if (cfg.n_mels > cfg.frame_len / 2 + 1) {
    throw PreconditionError("more mel bands than spectrum bins");
  }
  if (cfg.fmin_hz < 0.0 || cfg.fmax_hz <= cfg.fmin_hz ||
      cfg.fmax_hz > cfg.sample_rate / 2.0) {
    throw PreconditionError("invalid mel frequency range");
  }
  if (cfg.log_floor <= 0.0) throw PreconditionError("log_floor must be > 0");
}

}  // namespace

std::vector<std::vector<double>> frame_signal(const std::vector<double>& x,
                                              const SpectralConfig& cfg) {
  check_config(cfg);
  if (x.empty()) throw PreconditionError("frame_signal: empty signal");

  const size_t frame_len = static_cast<size_t>(cfg.frame_len);
  const size_t hop = static_cast<size_t>(cfg.hop);
  std::vector<std::vector<double>> frames;
  if (x.size() < frame_len) {
    std::vector<double> padded(frame_len, 0.0);
    std::copy(x.begin(), x.end(), padded.begin());
    frames.push_back(std::move(padded));
    return frames;
  }
  const size_t n_frames = (x.size() - frame_len) / hop + 1;
  frames.reserve(n_frames);
  for (size_t f = 0; f < n_frames; ++f) {
    frames.emplace_back(x.begin() + f * hop, x.begin() + f * hop + frame_len);
  }
  return frames;
}

std::vector<double> hann_window(int n) {
  if (n <= 0) throw PreconditionError("hann_window: non-positive length");
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) {
    w[k] = 0.5 * (1.0 - std::cos(2.0 * kPi * k / n));
  }
  return w;
}

void fft_inplace(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  if (!is_pow2(static_cast<int>(n))) {
    throw PreconditionError("fft_inplace: length must be a power of two");
  }
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> power_spectrum(const std::vector<double>& frame) {
  const size_t n = frame.size();
  if (!is_pow2(static_cast<int>(n))) {
    throw PreconditionError("power_spectrum: length must be a power of two");
  }
  std::vector<std::complex<double>> a(n);
  for (size_t i = 0; i < n; ++i) a[i] = frame[i];
  fft_inplace(a);
  std::vector<double> power(n / 2 + 1);
  for (size_t k = 0; k <= n / 2; ++k) power[k] = std::norm(a[k]);
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<std::vector<double>> mel_filterbank(const SpectralConfig& cfg) {
  check_config(cfg);
  const int n_bins = cfg.frame_len / 2 + 1;
  const double bin_hz =
      static_cast<double>(cfg.sample_rate) / static_cast<double>(cfg.frame_len);

  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(cfg.fmax_hz);
  std::vector<int> edge(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1);
    const int bin = static_cast<int>(std::llround(mel_to_hz(mel) / bin_hz));
    edge[i] = std::clamp(bin, 0, n_bins - 1);
  }
  for (int i = 0; i + 1 < cfg.n_mels + 2; ++i) {
    if (edge[i] == edge[i + 1]) {
      throw DegenerateFilter(
          "adjacent filter edges share spectrum bin " +
          std::to_string(edge[i]) + "; frame_len too small for " +
          std::to_string(cfg.n_mels) + " bands");
    }
  }

  std::vector<std::vector<double>> bank(
      cfg.n_mels, std::vector<double>(n_bins, 0.0));
  for (int m = 0; m < cfg.n_mels; ++m) {
    const int lo = edge[m];
    const int centre = edge[m + 1];
    const int hi = edge[m + 2];
    for (int b = lo + 1; b <= centre; ++b) {
      bank[m][b] = static_cast<double>(b - lo) / (centre - lo);
    }
    for (int b = centre + 1; b < hi; ++b) {
      bank[m][b] = static_cast<double>(hi - b) / (hi - centre);
    }
  }
  return bank;
}

Spectrogram log_mel_spectrogram(const AudioClip& clip,
                                const SpectralConfig& cfg) {
  check_config(cfg);
  if (clip.sample_rate != cfg.sample_rate) {
    throw PreconditionError("log_mel_spectrogram: clip rate " +
                            std::to_string(clip.sample_rate) +
                            " does not match config rate " +
                            std::to_string(cfg.sample_rate));
  }
  const auto frames = frame_signal(clip.samples, cfg);
  const auto window = hann_window(cfg.frame_len);
  const auto bank = mel_filterbank(cfg);

  Spectrogram out;
  out.n_frames = frames.size();
  out.n_bins = static_cast<size_t>(cfg.n_mels);
  out.values.resize(out.n_frames * out.n_bins);

  std::vector<double> windowed(cfg.frame_len);
  for (size_t f = 0; f < frames.size(); ++f) {
    for (int k = 0; k < cfg.frame_len; ++k) {
      windowed[k] = frames[f][k] * window[k];
    }
    const auto power = power_spectrum(windowed);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double acc = 0.0;
      const auto& row = bank[m];
      for (size_t b = 0; b < power.size(); ++b) acc += row[b] * power[b];
      out.values[f * out.n_bins + m] = std::log(acc + cfg.log_floor);
    }
  }
  return out;
}

std::vector<double> dct_ii_orthonormal(const std::vector<double>& x) {
  const size_t n = x.size();
  if (n == 0) throw PreconditionError("dct_ii_orthonormal: empty input");
  std::vector<double> out(n);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
      acc += x[i] * std::cos(kPi * (2.0 * i + 1.0) * k / (2.0 * n));
    }
    out[k] = (k == 0 ? scale0 : scale) * acc;
  }
  return out;
}

Spectrogram mfcc(const AudioClip& clip, const SpectralConfig& cfg) {
  const Spectrogram logmel = log_mel_spectrogram(clip, cfg);
  Spectrogram out;
  out.n_frames = logmel.n_frames;
  out.n_bins = static_cast<size_t>(cfg.n_mfcc);
  out.values.resize(out.n_frames * out.n_bins);
  std::vector<double> row(logmel.n_bins);
  for (size_t f = 0; f < logmel.n_frames; ++f) {
    for (size_t b = 0; b < logmel.n_bins; ++b) row[b] = logmel.at(f, b);
    const auto coeffs = dct_ii_orthonormal(row);
    for (size_t k = 0; k < out.n_bins; ++k) {
      out.values[f * out.n_bins + k] = coeffs[k];
    }
  }
  return out;
}

void write_spectrogram_csv(const Spectrogram& spec, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open for writing: " + path);
  f.precision(17);
  for (size_t r = 0; r < spec.n_frames; ++r) {
    for (size_t c = 0; c < spec.n_bins; ++c) {
      if (c) f << ',';
      f << spec.at(r, c);
    }
    f << '\n';
  }
  if (!f.good()) throw IoFailure("write failed: " + path);
}

}  // namespace coughpipe
