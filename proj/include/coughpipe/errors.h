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

#ifndef COUGHPIPE_ERRORS_H_
#define COUGHPIPE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace coughpipe {

// Root of every error thrown by this library. Catching this type is enough
// to intercept any failure that the pipeline itself can diagnose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A value passed to an operation violates that operation's stated
// requirements (wrong sample rate, bad ratio vector, empty input, ...).
struct PreconditionError : Error {
  using Error::Error;
};

// ---- audio container errors ----

// The RIFF/WAVE container is structurally broken: bad magic, truncated
// chunk, or sizes that disagree with the payload.
struct MalformedContainer : Error {
  using Error::Error;
};

// The container is intact but the sample encoding is one we do not decode.
struct UnsupportedEncoding : Error {
  using Error::Error;
};

// The file decodes to zero samples.
struct EmptyAudio : Error {
  using Error::Error;
};

// The operating system refused a read or write.
struct IoFailure : Error {
  using Error::Error;
};

// ---- feature extraction errors ----

// The analysis windowing cannot be built for this configuration: two
// adjacent filter edge points collapsed onto the same spectrum bin.
struct DegenerateFilter : Error {
  using Error::Error;
};

// A signal is too short for the requested transformation.
struct TooShort : Error {
  using Error::Error;
};

// A clip is shorter than the minimum duration features are defined on.
struct ClipTooShort : Error {
  using Error::Error;
};

// A manifest row's audio could not be decoded (missing file, bad
// container, ...). Also raised when too many rows of a manifest fail.
struct DecodeFailure : Error {
  using Error::Error;
};

// A dataset is too small to be partitioned as requested.
struct TooFewSamples : Error {
  using Error::Error;
};

// ---- model errors ----

// Tensor dimensions do not line up with what a layer expects, or an
// architecture cannot be built for the configured input length.
struct ShapeMismatch : Error {
  using Error::Error;
};

// A forward pass produced a non-finite value; training has diverged.
struct NonFiniteActivation : Error {
  using Error::Error;
};

// A weight file was produced by a different architecture.
struct ArchitectureMismatch : Error {
  using Error::Error;
};

// Training labels contain a single class where two are required.
struct SingleClassInput : Error {
  using Error::Error;
};

// A feature vector's dimensionality differs from the model's.
struct DimensionMismatch : Error {
  using Error::Error;
};

// Two parallel arrays that must have equal length do not.
struct LengthMismatch : Error {
  using Error::Error;
};

// ---- clustering errors ----

// A point matrix with zero rows or zero columns.
struct EmptyMatrix : Error {
  using Error::Error;
};

// Fewer points than clusters requested.
struct TooFewPoints : Error {
  using Error::Error;
};

// A silhouette was requested for a labelling with fewer than two
// non-empty clusters.
struct SingleCluster : Error {
  using Error::Error;
};

// ---- synthesis errors ----

// The requested clip cannot hold the requested acoustic events.
struct SpecInfeasible : Error {
  using Error::Error;
};

// ---- command line errors ----

// The run configuration is missing a field or holds an invalid value.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace coughpipe

#endif  // COUGHPIPE_ERRORS_H_
