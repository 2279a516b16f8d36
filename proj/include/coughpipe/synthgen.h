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

#ifndef COUGHPIPE_SYNTHGEN_H_
#define COUGHPIPE_SYNTHGEN_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coughpipe/audio.h"
#include "coughpipe/features.h"
#include "coughpipe/rng.h"

namespace coughpipe {

// Parameters of the synthetic audio generator. Cough clips are trains of
// 1-4 exponentially decaying band-limited noise bursts above a soft noise
// floor; background clips are tonal hums, click trains, or low-frequency
// rumble.
struct SynthConfig {
  int sample_rate = 16000;
  double clip_len_s = 1.5;
  double margin_s = 0.05;  // silence kept at each end of a cough clip

  // Burst train geometry (seconds).
  double burst_dur_lo = 0.25;
  double burst_dur_hi = 0.45;
  double gap_lo = 0.05;
  double gap_hi = 0.15;
  double decay_tau_s = 0.06;

  // Burst level and spectrum. Every burst of an n-burst clip is
  // band-passed around band_centers_hz[n - 1], so each burst-count class
  // carries a distinct spectral signature as well as a distinct rhythm.
  double peak_lo = 0.5;
  double peak_hi = 0.9;
  std::array<double, 4> band_centers_hz = {350.0, 900.0, 1800.0, 2900.0};
  double band_q = 6.0;

  // Soft noise floor present in every clip.
  double floor_lo = 0.002;
  double floor_hi = 0.005;

  // Tonal background: a few steady sinusoids.
  int tones_lo = 2;
  int tones_hi = 4;
  double tone_freq_lo = 150.0;
  double tone_freq_hi = 2000.0;
  double tone_sep_hz = 80.0;  // minimum spacing between tones
  double tone_amp_lo = 0.02;
  double tone_amp_hi = 0.08;

  // Click background: sparse very short noise pips.
  int clicks_lo = 5;
  int clicks_hi = 20;
  double click_dur_lo = 0.001;
  double click_dur_hi = 0.003;
  double click_amp_lo = 0.25;
  double click_amp_hi = 0.5;

  // Rumble background: leaky-integrated white noise whose power falls
  // off with frequency, root-mean-square scaled into [rumble_rms_lo, hi].
  double rumble_leak = 0.999;
  double rumble_rms_lo = 0.02;
  double rumble_rms_hi = 0.08;
};

enum class BackgroundKind { kTonal, kClicks, kRumble };

const char* background_kind_name(BackgroundKind kind);

// A cough clip with exactly n_bursts bursts. Bursts never overlap and
// respect the margins; durations and gaps are drawn uniformly, capped so
// the remaining bursts always still fit.
//
// Throws PreconditionError (n_bursts outside 1..4),
// SpecInfeasible (the requested train cannot fit in clip_len_s, either
// on average duration or at minimum packing).
AudioClip gen_cough(const SynthConfig& cfg, int n_bursts, Rng& rng);

AudioClip gen_background(const SynthConfig& cfg, BackgroundKind kind,
                         Rng& rng);

struct CorpusConfig {
  SynthConfig synth;
  int per_burst_class = 50;       // cough clips per burst count 1..4
  int per_background_kind = 150;  // background clips per kind
};

struct CorpusSummary {
  int n_cough = 0;
  int n_background = 0;
  std::string manifest_path;
};

// Writes WAV files plus a manifest (with a burst_count column; 0 for
// backgrounds) under out_dir. Clip i of the corpus derives its random
// stream from (seed, i), so the corpus is byte-stable for a fixed seed.
//
// Throws IoFailure, SpecInfeasible.
CorpusSummary gen_corpus(const std::string& out_dir, const CorpusConfig& cfg,
                         uint64_t seed);

}  // namespace coughpipe

#endif  // COUGHPIPE_SYNTHGEN_H_
