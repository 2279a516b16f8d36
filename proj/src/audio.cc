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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "coughpipe/errors.h"

namespace coughpipe {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
// WAVE_FORMAT_EXTENSIBLE carries the real format in its sub-format GUID.
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

double clamp_unit(double x) {
  if (std::isnan(x)) return 0.0;
  return std::clamp(x, -1.0, 1.0);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw IoFailure("read failed: " + path);

  const uint8_t* data = reinterpret_cast<const uint8_t*>(bytes.data());
  const size_t size = bytes.size();
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw MalformedContainer("not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
  bool have_fmt = false;
  const uint8_t* payload = nullptr;
  size_t payload_size = 0;

  size_t pos = 12;
  while (pos + 8 <= size) {
    const uint8_t* chunk = data + pos;
    const uint32_t chunk_size = read_u32(chunk + 4);
    const size_t body = pos + 8;
    if (body + chunk_size > size) {
      throw MalformedContainer("chunk overruns file: " + path);
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw MalformedContainer("fmt chunk too small");
      format = read_u16(data + body);
      channels = read_u16(data + body + 2);
      sample_rate = read_u32(data + body + 4);
      bits = read_u16(data + body + 14);
      if (format == kFormatExtensible) {
        if (chunk_size < 40) {
          throw MalformedContainer("extensible fmt chunk too small");
        }
        format = read_u16(data + body + 24);  // first word of the GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      payload = data + body;
      payload_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) throw MalformedContainer("missing fmt chunk: " + path);
  if (payload == nullptr) throw MalformedContainer("missing data chunk: " + path);
  if (sample_rate == 0) throw MalformedContainer("zero sample rate: " + path);
  if (channels != 1 && channels != 2) {
    throw UnsupportedEncoding("unsupported channel count " +
                              std::to_string(channels) + ": " + path);
  }

  size_t bytes_per_sample;
  if (format == kFormatPcm && bits == 16) {
    bytes_per_sample = 2;
  } else if (format == kFormatFloat && bits == 32) {
    bytes_per_sample = 4;
  } else {
    throw UnsupportedEncoding("unsupported encoding (format " +
                              std::to_string(format) + ", " +
                              std::to_string(bits) + " bit): " + path);
  }

  const size_t frame_bytes = bytes_per_sample * channels;
  if (payload_size % frame_bytes != 0) {
    throw MalformedContainer("data chunk not a whole number of frames: " +
                             path);
  }
  const size_t n_frames = payload_size / frame_bytes;
  if (n_frames == 0) throw EmptyAudio("no samples: " + path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(sample_rate);
  clip.id = path;
  clip.samples.resize(n_frames);
  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (uint16_t c = 0; c < channels; ++c) {
      const uint8_t* p = payload + (i * channels + c) * bytes_per_sample;
      if (bytes_per_sample == 2) {
        const int16_t raw = static_cast<int16_t>(read_u16(p));
        acc += raw / 32768.0;
      } else {
        uint32_t u = read_u32(p);
        float f;
        std::memcpy(&f, &u, sizeof f);
        acc += clamp_unit(static_cast<double>(f));
      }
    }
    clip.samples[i] = clamp_unit(acc / channels);
  }
  return clip;
}

void write_wav(const AudioClip& clip, const std::string& path) {
  if (clip.sample_rate <= 0) {
    throw PreconditionError("write_wav: non-positive sample rate");
  }
  if (clip.samples.empty()) throw EmptyAudio("write_wav: empty clip");

  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  const uint32_t data_bytes = 2 * n;

  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  put_u32(out, 36 + data_bytes);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<uint32_t>(clip.sample_rate) * 2);  // byte rate
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits per sample
  out.append("data");
  put_u32(out, data_bytes);
  for (double x : clip.samples) {
    double scaled = std::round(clamp_unit(x) * 32768.0);
    scaled = std::clamp(scaled, -32768.0, 32767.0);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(scaled)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoFailure("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f.good()) throw IoFailure("write failed: " + path);
}

AudioClip resample_linear(const AudioClip& clip, int target_rate) {
  if (clip.sample_rate <= 0 || target_rate <= 0) {
    throw PreconditionError("resample_linear: non-positive sample rate");
  }
  if (clip.samples.empty()) {
    throw PreconditionError("resample_linear: empty clip");
  }
  if (target_rate == clip.sample_rate) return clip;

  const size_t n = clip.samples.size();
  const size_t m = static_cast<size_t>(std::llround(
      static_cast<double>(n) * target_rate / clip.sample_rate));

  AudioClip out;
  out.sample_rate = target_rate;
  out.id = clip.id;
  out.samples.resize(std::max<size_t>(m, 1));
  const double step =
      static_cast<double>(clip.sample_rate) / static_cast<double>(target_rate);
  for (size_t i = 0; i < out.samples.size(); ++i) {
    const double pos = static_cast<double>(i) * step;
    const size_t i0 = std::min(static_cast<size_t>(pos), n - 1);
    const size_t i1 = std::min(i0 + 1, n - 1);
    const double frac = pos - static_cast<double>(i0);
    out.samples[i] = (i1 == i0 || frac <= 0.0)
                         ? clip.samples[i0]
                         : clip.samples[i0] +
                               frac * (clip.samples[i1] - clip.samples[i0]);
  }
  return out;
}

AudioClip load_canonical(const std::string& path) {
  return resample_linear(read_wav(path), kCanonicalRate);
}

}  // namespace coughpipe
