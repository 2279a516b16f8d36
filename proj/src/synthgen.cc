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

#include "coughpipe/synthgen.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "coughpipe/errors.h"

namespace coughpipe {
namespace {

// Constant-peak-gain band-pass biquad.
struct Bandpass {
  double b0, b1, b2, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  Bandpass(double centre_hz, double q, double rate) {
    const double w0 = 2.0 * std::numbers::pi * centre_hz / rate;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0 = alpha / a0;
    b1 = 0.0;
    b2 = -alpha / a0;
    a1 = -2.0 * std::cos(w0) / a0;
    a2 = (1.0 - alpha) / a0;
  }

  double step(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

void add_noise_floor(std::vector<double>& samples, const SynthConfig& cfg,
                     Rng& rng) {
  const double amp = rng.uniform(cfg.floor_lo, cfg.floor_hi);
  for (double& s : samples) s += rng.normal(0.0, amp);
}

void clamp_unit_range(std::vector<double>& samples) {
  for (double& s : samples) s = std::clamp(s, -1.0, 1.0);
}

AudioClip finish(std::vector<double> samples, const SynthConfig& cfg,
                 std::string id) {
  clamp_unit_range(samples);
  AudioClip clip;
  clip.samples = std::move(samples);
  clip.sample_rate = cfg.sample_rate;
  clip.id = std::move(id);
  return clip;
}

}  // namespace

const char* background_kind_name(BackgroundKind kind) {
  switch (kind) {
    case BackgroundKind::kTonal:
      return "tonal";
    case BackgroundKind::kClicks:
      return "clicks";
    case BackgroundKind::kRumble:
      return "rumble";
  }
  return "unknown";
}

AudioClip gen_cough(const SynthConfig& cfg, int n_bursts, Rng& rng) {
  if (n_bursts < 1 ||
      n_bursts > static_cast<int>(cfg.band_centers_hz.size())) {
    throw PreconditionError("n_bursts must lie in 1..4");
  }
  const double margins = 2.0 * cfg.margin_s;
  const double mean_dur = 0.5 * (cfg.burst_dur_lo + cfg.burst_dur_hi);
  if (n_bursts * mean_dur + margins > cfg.clip_len_s) {
    throw SpecInfeasible(
        std::to_string(n_bursts) + " bursts of mean duration " +
        std::to_string(mean_dur) + " s cannot fit in " +
        std::to_string(cfg.clip_len_s) + " s");
  }
  if (n_bursts * cfg.burst_dur_lo + (n_bursts - 1) * cfg.gap_lo + margins >
      cfg.clip_len_s) {
    throw SpecInfeasible("minimum burst packing exceeds the clip length");
  }

  const auto n_samples =
      static_cast<size_t>(std::llround(cfg.clip_len_s * cfg.sample_rate));
  std::vector<double> samples(n_samples, 0.0);

  const double content_end = cfg.clip_len_s - cfg.margin_s;
  double cursor = cfg.margin_s;
  for (int i = 0; i < n_bursts; ++i) {
    const int after = n_bursts - 1 - i;  // bursts still to place
    if (i > 0) {
      const double reserve =
          (after + 1) * cfg.burst_dur_lo + after * cfg.gap_lo;
      const double gap_cap =
          std::min(cfg.gap_hi, content_end - cursor - reserve);
      cursor += rng.uniform(cfg.gap_lo, gap_cap);
    }
    const double reserve = after * (cfg.gap_lo + cfg.burst_dur_lo);
    const double dur_cap =
        std::min(cfg.burst_dur_hi, content_end - cursor - reserve);
    const double dur = rng.uniform(cfg.burst_dur_lo, dur_cap);

    const auto s0 = static_cast<size_t>(std::llround(cursor * cfg.sample_rate));
    auto s1 = static_cast<size_t>(std::llround((cursor + dur) * cfg.sample_rate));
    s1 = std::min(s1, n_samples);
    cursor += dur;

    Bandpass filter(cfg.band_centers_hz[static_cast<size_t>(n_bursts - 1)],
                    cfg.band_q, cfg.sample_rate);
    std::vector<double> burst(s1 - s0);
    double peak_abs = 0.0;
    for (size_t s = 0; s < burst.size(); ++s) {
      const double t = static_cast<double>(s) / cfg.sample_rate;
      const double env = std::exp(-t / cfg.decay_tau_s);
      burst[s] = env * filter.step(rng.normal());
      peak_abs = std::max(peak_abs, std::abs(burst[s]));
    }
    const double peak = rng.uniform(cfg.peak_lo, cfg.peak_hi);
    const double scale = peak_abs > 0.0 ? peak / peak_abs : 0.0;
    for (size_t s = 0; s < burst.size(); ++s) samples[s0 + s] += scale * burst[s];
  }

  add_noise_floor(samples, cfg, rng);
  return finish(std::move(samples), cfg, "cough");
}

AudioClip gen_background(const SynthConfig& cfg, BackgroundKind kind,
                         Rng& rng) {
  const auto n_samples =
      static_cast<size_t>(std::llround(cfg.clip_len_s * cfg.sample_rate));
  std::vector<double> samples(n_samples, 0.0);

  switch (kind) {
    case BackgroundKind::kTonal: {
      const int n_tones =
          cfg.tones_lo +
          static_cast<int>(rng.uniform_index(
              static_cast<size_t>(cfg.tones_hi - cfg.tones_lo + 1)));
      std::vector<double> freqs;
      while (static_cast<int>(freqs.size()) < n_tones) {
        const double f = rng.uniform(cfg.tone_freq_lo, cfg.tone_freq_hi);
        bool clear = true;
        for (double g : freqs) {
          if (std::abs(f - g) < cfg.tone_sep_hz) {
            clear = false;
            break;
          }
        }
        if (clear) freqs.push_back(f);
      }
      for (double f : freqs) {
        const double amp = rng.uniform(cfg.tone_amp_lo, cfg.tone_amp_hi);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double w = 2.0 * std::numbers::pi * f / cfg.sample_rate;
        for (size_t s = 0; s < n_samples; ++s) {
          samples[s] += amp * std::sin(w * static_cast<double>(s) + phase);
        }
      }
      break;
    }
    case BackgroundKind::kClicks: {
      const int n_clicks =
          cfg.clicks_lo +
          static_cast<int>(rng.uniform_index(
              static_cast<size_t>(cfg.clicks_hi - cfg.clicks_lo + 1)));
      for (int c = 0; c < n_clicks; ++c) {
        const double dur = rng.uniform(cfg.click_dur_lo, cfg.click_dur_hi);
        const auto width =
            std::max<size_t>(1, static_cast<size_t>(std::llround(
                                    dur * cfg.sample_rate)));
        const size_t start = rng.uniform_index(n_samples - width + 1);
        const double amp = rng.uniform(cfg.click_amp_lo, cfg.click_amp_hi);
        for (size_t s = 0; s < width; ++s) {
          // Hann-shaped pip so clicks have no hard edges.
          const double env =
              0.5 * (1.0 - std::cos(2.0 * std::numbers::pi *
                                    static_cast<double>(s) /
                                    static_cast<double>(width)));
          samples[start + s] += amp * env * rng.normal();
        }
      }
      break;
    }
    case BackgroundKind::kRumble: {
      double state = 0.0;
      double energy = 0.0;
      for (size_t s = 0; s < n_samples; ++s) {
        state = cfg.rumble_leak * state + rng.normal();
        samples[s] = state;
        energy += state * state;
      }
      const double rms = std::sqrt(energy / static_cast<double>(n_samples));
      const double target = rng.uniform(cfg.rumble_rms_lo, cfg.rumble_rms_hi);
      const double scale = rms > 0.0 ? target / rms : 0.0;
      for (double& s : samples) s *= scale;
      break;
    }
  }

  add_noise_floor(samples, cfg, rng);
  return finish(std::move(samples), cfg, background_kind_name(kind));
}

CorpusSummary gen_corpus(const std::string& out_dir, const CorpusConfig& cfg,
                         uint64_t seed) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoFailure("cannot create directory: " + out_dir);

  std::vector<ManifestRow> rows;
  CorpusSummary summary;
  uint64_t clip_index = 0;

  const auto emit = [&](const AudioClip& clip, const std::string& name,
                        int label, int burst_count) {
    const std::string path = (fs::path(out_dir) / (name + ".wav")).string();
    AudioClip named = clip;
    named.id = name;
    write_wav(named, path);
    ManifestRow row;
    row.path = name + ".wav";  // relative to the manifest
    row.label = label;
    row.activity = Activity::kUnknown;
    row.subject = "synthetic";
    row.burst_count = burst_count;
    rows.push_back(row);
  };

  for (int bursts = 1; bursts <= 4; ++bursts) {
    for (int i = 0; i < cfg.per_burst_class; ++i) {
      Rng rng(Rng::derive(seed, clip_index++));
      const AudioClip clip = gen_cough(cfg.synth, bursts, rng);
      emit(clip,
           "cough_b" + std::to_string(bursts) + "_" + std::to_string(i), 1,
           bursts);
      summary.n_cough += 1;
    }
  }
  for (BackgroundKind kind :
       {BackgroundKind::kTonal, BackgroundKind::kClicks,
        BackgroundKind::kRumble}) {
    for (int i = 0; i < cfg.per_background_kind; ++i) {
      Rng rng(Rng::derive(seed, clip_index++));
      const AudioClip clip = gen_background(cfg.synth, kind, rng);
      emit(clip,
           std::string("bg_") + background_kind_name(kind) + "_" +
               std::to_string(i),
           0, 0);
      summary.n_background += 1;
    }
  }

  summary.manifest_path = (fs::path(out_dir) / "manifest.csv").string();
  write_manifest(rows, summary.manifest_path);
  return summary;
}

}  // namespace coughpipe
