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

#ifndef COUGHPIPE_AUGMENT_H_
#define COUGHPIPE_AUGMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "coughpipe/audio.h"
#include "coughpipe/rng.h"

namespace coughpipe {

// How a training clip came to exist.
enum class Provenance { kOriginal, kNoise, kInterpEven, kInterpOdd };

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

// A clip together with its derivation record.
struct AugmentedClip {
  AudioClip clip;
  Provenance provenance = Provenance::kOriginal;
  std::string origin_id;  // id of the clip it was derived from
};

struct AugmentConfig {
  double noise_scale = 0.01;  // standard deviation of the additive noise
  // Optional extra noise applied to the two interpolation variants; kept
  // at zero so interpolation stays a pure resampling transform.
  double interp_noise_scale = 0.0;
};

// Adds zero-mean Gaussian noise of standard deviation `scale` to every
// sample and clamps the result to [-1, 1]. The noise stream is fully
// determined by the rng state.
//
// Throws PreconditionError (negative scale, empty clip).
AudioClip add_gaussian_noise(const AudioClip& clip, double scale, Rng& rng);

// Produces two same-length variants that each drop every second sample
// and fill the gaps by linear interpolation:
//  - even_recon keeps x[2k] and rebuilds odd positions from their kept
//    neighbours' average,
//  - odd_recon keeps x[2k+1] and rebuilds even positions symmetrically.
// A missing neighbour at either boundary is replaced by holding the
// nearest kept sample.
//
// Throws TooShort (fewer than 4 samples).
struct InterpolatedPair {
  AudioClip even_recon;
  AudioClip odd_recon;
};
InterpolatedPair interpolate_pair(const AudioClip& clip,
                                  const AugmentConfig& cfg, Rng& rng);

// Expands a set of cough clips fourfold: each original is kept and joined
// by its noisy copy and the two interpolation variants, every output
// tagged with its provenance and origin. Clip index i draws its noise
// from the substream derive(seed, i), so the expansion is reproducible
// and order-independent.
std::vector<AugmentedClip> expand_cough_set(const std::vector<AudioClip>& clips,
                                            const AugmentConfig& cfg,
                                            uint64_t seed);

}  // namespace coughpipe

#endif  // COUGHPIPE_AUGMENT_H_
