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

#include "coughpipe/audio.h"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "coughpipe/errors.h"
#include "doctest.h"

using namespace coughpipe;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void push_u32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x & 0xFF));
  v.push_back(static_cast<uint8_t>((x >> 8) & 0xFF));
  v.push_back(static_cast<uint8_t>((x >> 16) & 0xFF));
  v.push_back(static_cast<uint8_t>((x >> 24) & 0xFF));
}

void push_u16(std::vector<uint8_t>& v, uint16_t x) {
  v.push_back(static_cast<uint8_t>(x & 0xFF));
  v.push_back(static_cast<uint8_t>((x >> 8) & 0xFF));
}

void push_tag(std::vector<uint8_t>& v, const char* tag) {
  for (int i = 0; i < 4; ++i) v.push_back(static_cast<uint8_t>(tag[i]));
}

// Hand-assembled minimal 16-bit PCM WAV.
std::vector<uint8_t> pcm16_wav(const std::vector<int16_t>& samples,
                               uint32_t rate, uint16_t channels = 1) {
  std::vector<uint8_t> v;
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  push_tag(v, "RIFF");
  push_u32(v, 36 + data_bytes);
  push_tag(v, "WAVE");
  push_tag(v, "fmt ");
  push_u32(v, 16);
  push_u16(v, 1);  // PCM
  push_u16(v, channels);
  push_u32(v, rate);
  push_u32(v, rate * channels * 2);
  push_u16(v, static_cast<uint16_t>(channels * 2));
  push_u16(v, 16);
  push_tag(v, "data");
  push_u32(v, data_bytes);
  for (int16_t s : samples) {
    push_u16(v, static_cast<uint16_t>(s));
  }
  return v;
}

}  // namespace

TEST_CASE("pcm16 wav round trip preserves samples to quantization") {
  const std::string path = temp_path("rt16.wav");
  AudioClip clip;
  clip.sample_rate = 16000;
  for (int i = 0; i < 1600; ++i) {
    clip.samples.push_back(0.75 * std::sin(2.0 * 3.14159265358979 * 440.0 *
                                           i / 16000.0));
  }
  write_wav(clip, path);
  const AudioClip back = read_wav(path);
  REQUIRE(back.samples.size() == clip.samples.size());
  CHECK(back.sample_rate == 16000);
  for (size_t i = 0; i < back.samples.size(); ++i) {
    // One 16-bit step is 1/32768 ~ 3.05e-5.
    CHECK(std::abs(back.samples[i] - clip.samples[i]) < 1.0 / 32768.0);
  }
  std::remove(path.c_str());
}

TEST_CASE("hand-built pcm16 file decodes with 1/32768 scaling") {
  const std::string path = temp_path("hand16.wav");
  write_bytes(path, pcm16_wav({0, 16384, -16384, 32767, -32768}, 16000));
  const AudioClip clip = read_wav(path);
  REQUIRE(clip.samples.size() == 5);
  CHECK(clip.samples[0] == doctest::Approx(0.0));
  CHECK(clip.samples[1] == doctest::Approx(0.5));
  CHECK(clip.samples[2] == doctest::Approx(-0.5));
  CHECK(clip.samples[3] == doctest::Approx(32767.0 / 32768.0));
  CHECK(clip.samples[4] == doctest::Approx(-1.0));
  std::remove(path.c_str());
}

TEST_CASE("stereo input downmixes by averaging the channels") {
  const std::string path = temp_path("stereo.wav");
  // Frames: (L, R) = (0.5, -0.5) -> 0, (0.25, 0.75) -> 0.5.
  write_bytes(path, pcm16_wav({16384, -16384, 8192, 24576}, 8000, 2));
  const AudioClip clip = read_wav(path);
  REQUIRE(clip.samples.size() == 2);
  CHECK(clip.samples[0] == doctest::Approx(0.0));
  CHECK(clip.samples[1] == doctest::Approx(0.5));
  CHECK(clip.sample_rate == 8000);
  std::remove(path.c_str());
}

TEST_CASE("wav writer rounds half away from zero and clamps") {
  const std::string path = temp_path("clamp.wav");
  AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples = {1.5, -1.5, 1.0, -1.0};
  write_wav(clip, path);
  const AudioClip back = read_wav(path);
  CHECK(back.samples[0] == doctest::Approx(32767.0 / 32768.0));
  CHECK(back.samples[1] == doctest::Approx(-1.0));
  CHECK(back.samples[2] == doctest::Approx(32767.0 / 32768.0));
  CHECK(back.samples[3] == doctest::Approx(-1.0));
  std::remove(path.c_str());
}

TEST_CASE("truncated container is rejected") {
  const std::string path = temp_path("trunc.wav");
  auto bytes = pcm16_wav({100, 200, 300}, 16000);
  bytes.resize(bytes.size() - 4);  // cut into the data chunk
  write_bytes(path, bytes);
  CHECK_THROWS_AS(read_wav(path), MalformedContainer);
  std::remove(path.c_str());
}

TEST_CASE("wrong magic is rejected") {
  const std::string path = temp_path("magic.wav");
  auto bytes = pcm16_wav({100}, 16000);
  bytes[0] = 'X';
  write_bytes(path, bytes);
  CHECK_THROWS_AS(read_wav(path), MalformedContainer);
  std::remove(path.c_str());
}

TEST_CASE("unsupported encoding is rejected") {
  const std::string path = temp_path("alaw.wav");
  auto bytes = pcm16_wav({100}, 16000);
  bytes[20] = 6;  // format tag: A-law
  write_bytes(path, bytes);
  CHECK_THROWS_AS(read_wav(path), UnsupportedEncoding);
  std::remove(path.c_str());
}

TEST_CASE("missing file raises an io failure") {
  CHECK_THROWS_AS(read_wav(temp_path("no_such_file_here.wav")), IoFailure);
}

TEST_CASE("zero samples raise empty audio") {
  const std::string path = temp_path("empty.wav");
  write_bytes(path, pcm16_wav({}, 16000));
  CHECK_THROWS_AS(read_wav(path), EmptyAudio);
  std::remove(path.c_str());
}

TEST_CASE("writer refuses an empty clip") {
  AudioClip clip;
  clip.sample_rate = 16000;
  CHECK_THROWS_AS(write_wav(clip, temp_path("never.wav")), EmptyAudio);
}

TEST_CASE("resampler output length follows the rate ratio") {
  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples.assign(8000, 0.25);
  const AudioClip up = resample_linear(clip, 16000);
  CHECK(up.sample_rate == 16000);
  CHECK(up.samples.size() == 16000);
  const AudioClip down = resample_linear(clip, 4000);
  CHECK(down.samples.size() == 4000);
}

TEST_CASE("resampling a linear ramp interpolates exactly") {
  AudioClip ramp;
  ramp.sample_rate = 8000;
  for (int i = 0; i < 100; ++i) ramp.samples.push_back(i * 0.001);
  const AudioClip up = resample_linear(ramp, 16000);
  // Linear interpolation reproduces a linear function exactly wherever
  // both neighbours exist.
  for (size_t i = 0; i + 2 < up.samples.size(); ++i) {
    CHECK(up.samples[i] == doctest::Approx(i * 0.0005).epsilon(1e-12));
  }
}

TEST_CASE("equal-rate resampling is the identity") {
  AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples = {0.1, -0.2, 0.3};
  const AudioClip same = resample_linear(clip, 16000);
  CHECK(same.samples == clip.samples);
}

TEST_CASE("a tone keeps its frequency through resampling") {
  AudioClip tone;
  tone.sample_rate = 48000;
  for (int i = 0; i < 48000; ++i) {
    tone.samples.push_back(
        std::sin(2.0 * 3.14159265358979 * 440.0 * i / 48000.0));
  }
  const AudioClip down = resample_linear(tone, 16000);
  REQUIRE(down.samples.size() == 16000);
  // Count mean-crossings: a 440 Hz tone crosses zero 880 times per second.
  int crossings = 0;
  for (size_t i = 1; i < down.samples.size(); ++i) {
    if ((down.samples[i - 1] < 0.0) != (down.samples[i] < 0.0)) ++crossings;
  }
  CHECK(crossings > 870);
  CHECK(crossings < 890);
}

TEST_CASE("load_canonical lands on 16 kHz") {
  const std::string path = temp_path("canon.wav");
  AudioClip clip;
  clip.sample_rate = 44100;
  clip.samples.assign(44100, 0.1);
  write_wav(clip, path);
  const AudioClip canon = load_canonical(path);
  CHECK(canon.sample_rate == kCanonicalRate);
  CHECK(canon.samples.size() == 16000);
  CHECK(canon.id == path);
  std::remove(path.c_str());
}
