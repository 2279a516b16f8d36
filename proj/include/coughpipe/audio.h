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

#ifndef COUGHPIPE_AUDIO_H_
#define COUGHPIPE_AUDIO_H_

#include <cstdint>
#include <string>
#include <vector>

namespace coughpipe {

// The canonical sample rate every pipeline stage operates at.
constexpr int kCanonicalRate = 16000;

// A mono audio buffer. Samples are doubles in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kCanonicalRate;
  std::string id;  // stable identifier, normally the source path

  double duration_s() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

// Decodes a RIFF/WAVE file. Accepts 16-bit PCM and 32-bit IEEE float
// payloads with one or two channels; stereo is downmixed by averaging the
// channels per frame. 16-bit samples are scaled by 1/32768. The decoded
// samples are clamped to [-1, 1] and non-finite float samples map to 0.
//
// Throws MalformedContainer, UnsupportedEncoding, EmptyAudio, IoFailure.
AudioClip read_wav(const std::string& path);

// Encodes a clip as mono 16-bit PCM at the clip's sample rate, rounding
// samples half away from zero and clamping to the int16 range. The data
// chunk is exactly 2 * samples.size() bytes.
//
// Throws IoFailure, EmptyAudio, PreconditionError (non-positive rate).
void write_wav(const AudioClip& clip, const std::string& path);

// Linear-interpolation resampler. The output holds
// round(samples.size() * target_rate / source_rate) samples; output index
// i reads source position i * source_rate / target_rate, holding the last
// sample where that position runs past the end. Equal rates return the
// input unchanged.
//
// Throws PreconditionError (non-positive rate, empty input).
AudioClip resample_linear(const AudioClip& clip, int target_rate);

// read_wav followed by resampling to the canonical 16 kHz rate.
AudioClip load_canonical(const std::string& path);

}  // namespace coughpipe

#endif  // COUGHPIPE_AUDIO_H_
