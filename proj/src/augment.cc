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

#include "coughpipe/augment.h"

#include <algorithm>

#include "coughpipe/errors.h"

namespace coughpipe {

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kOriginal:
      return "original";
    case Provenance::kNoise:
      return "noise";
    case Provenance::kInterpEven:
      return "interp_even";
    case Provenance::kInterpOdd:
      return "interp_odd";
  }
  return "original";
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "original") return Provenance::kOriginal;
  if (name == "noise") return Provenance::kNoise;
  if (name == "interp_even") return Provenance::kInterpEven;
  if (name == "interp_odd") return Provenance::kInterpOdd;
  throw PreconditionError("unknown provenance: " + name);
}

AudioClip add_gaussian_noise(const AudioClip& clip, double scale, Rng& rng) {
  if (scale < 0.0) throw PreconditionError("noise scale must be >= 0");
  if (clip.samples.empty()) throw PreconditionError("empty clip");
  AudioClip out = clip;
  for (double& x : out.samples) {
    x = std::clamp(x + scale * rng.normal(), -1.0, 1.0);
  }
  return out;
}

namespace {

// Keeps samples at indices congruent to `keep` (mod 2) and linearly
// interpolates the others from their kept neighbours, holding the nearest
// kept sample when a neighbour falls off either end.
std::vector<double> reconstruct(const std::vector<double>& x, size_t keep) {
  const size_t n = x.size();
  std::vector<double> out(n);
  for (size_t i = keep; i < n; i += 2) out[i] = x[i];
  for (size_t i = 1 - keep; i < n; i += 2) {
    const bool has_prev = i >= 1 && (i - 1) % 2 == keep % 2;
    const bool has_next = i + 1 < n;
    if (has_prev && has_next) {
      out[i] = 0.5 * (x[i - 1] + x[i + 1]);
    } else if (has_next) {
      out[i] = x[i + 1];
    } else {
      out[i] = x[i - 1];
    }
  }
  return out;
}

}  // namespace

InterpolatedPair interpolate_pair(const AudioClip& clip,
                                  const AugmentConfig& cfg, Rng& rng) {
  if (clip.samples.size() < 4) {
    throw TooShort("interpolate_pair needs at least 4 samples, got " +
                   std::to_string(clip.samples.size()));
  }
  InterpolatedPair pair;
  pair.even_recon = clip;
  pair.even_recon.samples = reconstruct(clip.samples, 0);
  pair.odd_recon = clip;
  pair.odd_recon.samples = reconstruct(clip.samples, 1);
  if (cfg.interp_noise_scale > 0.0) {
    pair.even_recon =
        add_gaussian_noise(pair.even_recon, cfg.interp_noise_scale, rng);
    pair.odd_recon =
        add_gaussian_noise(pair.odd_recon, cfg.interp_noise_scale, rng);
  }
  return pair;
}

std::vector<AugmentedClip> expand_cough_set(const std::vector<AudioClip>& clips,
                                            const AugmentConfig& cfg,
                                            uint64_t seed) {
  std::vector<AugmentedClip> out;
  out.reserve(clips.size() * 4);
  for (size_t i = 0; i < clips.size(); ++i) {
    const AudioClip& original = clips[i];
    Rng rng(Rng::derive(seed, i));

    AugmentedClip base;
    base.clip = original;
    base.provenance = Provenance::kOriginal;
    base.origin_id = original.id;
    out.push_back(base);

    AugmentedClip noisy;
    noisy.clip = add_gaussian_noise(original, cfg.noise_scale, rng);
    noisy.clip.id = original.id + "#noise";
    noisy.provenance = Provenance::kNoise;
    noisy.origin_id = original.id;
    out.push_back(std::move(noisy));

    InterpolatedPair pair = interpolate_pair(original, cfg, rng);
    AugmentedClip even;
    even.clip = std::move(pair.even_recon);
    even.clip.id = original.id + "#interp_even";
    even.provenance = Provenance::kInterpEven;
    even.origin_id = original.id;
    out.push_back(std::move(even));

    AugmentedClip odd;
    odd.clip = std::move(pair.odd_recon);
    odd.clip.id = original.id + "#interp_odd";
    odd.provenance = Provenance::kInterpOdd;
    odd.origin_id = original.id;
    out.push_back(std::move(odd));
  }
  return out;
}

}  // namespace coughpipe
