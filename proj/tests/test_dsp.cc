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

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "coughpipe/errors.h"
#include "coughpipe/rng.h"
#include "doctest.h"
#include "oracles.h"

using namespace coughpipe;

TEST_CASE("hann window of length 4 hits its textbook values") {
  const auto w = hann_window(4);
  REQUIRE(w.size() == 4);
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[1] == doctest::Approx(0.5));
  CHECK(w[2] == doctest::Approx(1.0));
  CHECK(w[3] == doctest::Approx(0.5));
}

TEST_CASE("periodic hann sums to n/2") {
  for (int n : {2, 8, 64, 512, 2048}) {
    const auto w = hann_window(n);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    CHECK(sum == doctest::Approx(n / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("mel scale pins 700 Hz and round-trips") {
  CHECK(hz_to_mel(700.0) ==
        doctest::Approx(2595.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(std::abs(hz_to_mel(700.0) - 781.1727) < 1e-3);
  CHECK(hz_to_mel(0.0) == doctest::Approx(0.0));
  for (double hz : {10.0, 440.0, 4000.0, 7999.0}) {
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-10));
  }
}

TEST_CASE("fft matches the naive dft on random input") {
  Rng rng(101);
  for (size_t n : {size_t{8}, size_t{64}, size_t{256}}) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const auto ref = oracles::naive_dft(x);
    std::vector<std::complex<double>> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = {x[i], 0.0};
    fft_inplace(a);
    for (size_t k = 0; k < n; ++k) {
      CHECK(std::abs(a[k] - ref[k]) < 1e-9 * static_cast<double>(n));
    }
  }
}

TEST_CASE("power spectrum of a bin-aligned cosine concentrates there") {
  const size_t n = 256;
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = std::cos(2.0 * oracles::kPi * 8.0 * static_cast<double>(i) /
                    static_cast<double>(n));
  }
  const auto p = power_spectrum(x);
  REQUIRE(p.size() == n / 2 + 1);
  // cos splits into two complex exponentials of amplitude n/2 each.
  CHECK(p[8] == doctest::Approx(n * n / 4.0).epsilon(1e-9));
  for (size_t k = 0; k <= n / 2; ++k) {
    if (k == 8) continue;
    CHECK(p[k] < 1e-6);
  }
}

TEST_CASE("power spectrum agrees with the naive dft") {
  Rng rng(103);
  std::vector<double> x(128);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  const auto p = power_spectrum(x);
  const auto ref = oracles::naive_dft(x);
  for (size_t k = 0; k <= 64; ++k) {
    CHECK(p[k] == doctest::Approx(std::norm(ref[k])).epsilon(1e-8));
  }
}

TEST_CASE("dct-ii matches the definition and preserves energy") {
  Rng rng(105);
  std::vector<double> x(40);
  for (auto& v : x) v = rng.uniform(-2.0, 2.0);
  const auto got = dct_ii_orthonormal(x);
  const auto ref = oracles::naive_dct_ii(x);
  REQUIRE(got.size() == ref.size());
  double ex = 0.0;
  double ec = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-10));
    ex += x[i] * x[i];
    ec += got[i] * got[i];
  }
  CHECK(ec == doctest::Approx(ex).epsilon(1e-10));  // orthonormality
}

TEST_CASE("dct-ii of a constant lives entirely in coefficient 0") {
  const std::vector<double> x(40, 3.0);
  const auto c = dct_ii_orthonormal(x);
  CHECK(c[0] == doctest::Approx(std::sqrt(40.0) * 3.0).epsilon(1e-12));
  for (size_t k = 1; k < c.size(); ++k) CHECK(std::abs(c[k]) < 1e-10);
}

TEST_CASE("framing counts frames as floor((n - frame) / hop) + 1") {
  SpectralConfig cfg;
  // One second at 16 kHz: (16000 - 2048) / 512 + 1 = 28 frames.
  std::vector<double> x(16000, 0.1);
  const auto frames = frame_signal(x, cfg);
  CHECK(frames.size() == 28);
  for (const auto& f : frames) CHECK(f.size() == 2048);
}

TEST_CASE("a short signal zero-pads into exactly one frame") {
  SpectralConfig cfg;
  std::vector<double> x(1000, 0.5);
  const auto frames = frame_signal(x, cfg);
  REQUIRE(frames.size() == 1);
  REQUIRE(frames[0].size() == 2048);
  for (size_t i = 0; i < 1000; ++i) CHECK(frames[0][i] == 0.5);
  for (size_t i = 1000; i < 2048; ++i) CHECK(frames[0][i] == 0.0);
}

TEST_CASE("an incomplete tail is dropped") {
  SpectralConfig cfg;
  // 2048 + 511 samples: the hop after the first frame cannot complete.
  std::vector<double> x(2048 + 511, 0.1);
  CHECK(frame_signal(x, cfg).size() == 1);
  x.push_back(0.1);  // 2048 + 512: now the second frame exists
  CHECK(frame_signal(x, cfg).size() == 2);
}

TEST_CASE("filterbank rows peak at exactly one") {
  SpectralConfig cfg;
  const auto fb = mel_filterbank(cfg);
  REQUIRE(fb.size() == 40);
  for (const auto& row : fb) {
    REQUIRE(row.size() == 1025);
    double mx = 0.0;
    for (double v : row) mx = std::max(mx, v);
    CHECK(mx == 1.0);  // exact, not approximate
  }
}

TEST_CASE("filterbank edges are nondecreasing and inside the range") {
  SpectralConfig cfg;
  const auto fb = mel_filterbank(cfg);
  // Find each row's first and last nonzero column; successive rows must
  // overlap like a staircase of triangles.
  int prev_first = -1;
  for (const auto& row : fb) {
    int first = -1;
    int last = -1;
    for (int k = 0; k < static_cast<int>(row.size()); ++k) {
      if (row[k] > 0.0) {
        if (first < 0) first = k;
        last = k;
      }
    }
    REQUIRE(first >= 0);
    CHECK(first >= prev_first);
    CHECK(last >= first);
    prev_first = first;
  }
}

TEST_CASE("too many bands for the frame length degenerate") {
  SpectralConfig few_bins;
  few_bins.frame_len = 64;  // 33 spectrum bins cannot host 40 bands at all
  CHECK_THROWS_AS(mel_filterbank(few_bins), PreconditionError);

  // 128 samples give 65 bins, enough to count but not to keep the
  // integer-snapped low-frequency edges apart.
  SpectralConfig collide;
  collide.frame_len = 128;
  CHECK_THROWS_AS(mel_filterbank(collide), DegenerateFilter);
  SpectralConfig wide;
  wide.frame_len = 512;
  CHECK_NOTHROW(mel_filterbank(wide));
}

TEST_CASE("log mel of silence sits at the log floor") {
  SpectralConfig cfg;
  AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.assign(16000, 0.0);
  const auto spec = log_mel_spectrogram(clip, cfg);
  CHECK(spec.n_frames == 28);
  CHECK(spec.n_bins == 40);
  const double floor_log = std::log(1e-10);
  for (double v : spec.values) {
    CHECK(v == doctest::Approx(floor_log).epsilon(1e-12));
  }
  CHECK(floor_log == doctest::Approx(-23.025850929940457).epsilon(1e-12));
}

TEST_CASE("mfcc of silence is the dct of a constant log-floor row") {
  SpectralConfig cfg;
  AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.assign(16000, 0.0);
  const auto cep = mfcc(clip, cfg);
  CHECK(cep.n_frames == 28);
  CHECK(cep.n_bins == 40);
  // DCT-II of a constant vector c over 40 bands: coefficient 0 equals
  // sqrt(40) * c, all higher coefficients vanish.
  const double expected_c0 = std::sqrt(40.0) * std::log(1e-10);
  for (size_t f = 0; f < cep.n_frames; ++f) {
    CHECK(cep.at(f, 0) == doctest::Approx(expected_c0).epsilon(1e-9));
    for (size_t k = 1; k < 40; ++k) {
      CHECK(std::abs(cep.at(f, k)) < 1e-9);
    }
  }
  CHECK(expected_c0 == doctest::Approx(-145.6285).epsilon(1e-4));
}

TEST_CASE("a band-limited tone lights up the matching mel band") {
  SpectralConfig cfg;
  AudioClip clip;
  clip.sample_rate = 16000;
  for (int i = 0; i < 16000; ++i) {
    clip.samples.push_back(
        0.5 * std::sin(2.0 * oracles::kPi * 1000.0 * i / 16000.0));
  }
  const auto spec = log_mel_spectrogram(clip, cfg);
  // Mean energy per band over frames.
  std::vector<double> mean(spec.n_bins, 0.0);
  for (size_t f = 0; f < spec.n_frames; ++f) {
    for (size_t b = 0; b < spec.n_bins; ++b) mean[b] += spec.at(f, b);
  }
  size_t hot = 0;
  for (size_t b = 1; b < mean.size(); ++b) {
    if (mean[b] > mean[hot]) hot = b;
  }
  // 1000 Hz in mel is about 1000.2; with 40 bands over 0..8000 the
  // centres step by ~68.6 mel starting near 68.6, so the hottest band
  // should sit at index 13 or 14.
  CHECK(hot >= 13);
  CHECK(hot <= 14);
}

TEST_CASE("spectral stages reject bad input") {
  SpectralConfig cfg;
  CHECK_THROWS_AS(frame_signal({}, cfg), PreconditionError);
  AudioClip wrong_rate;
  wrong_rate.sample_rate = 8000;
  wrong_rate.samples.assign(8000, 0.1);
  CHECK_THROWS_AS(log_mel_spectrogram(wrong_rate, cfg), PreconditionError);
  std::vector<double> not_pow2(100, 0.0);
  CHECK_THROWS_AS(power_spectrum(not_pow2), PreconditionError);
  SpectralConfig bad = cfg;
  bad.fmax_hz = 100.0;
  bad.fmin_hz = 200.0;
  CHECK_THROWS_AS(mel_filterbank(bad), PreconditionError);
}
