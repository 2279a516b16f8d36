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

#ifndef COUGHPIPE_FEATURES_H_
#define COUGHPIPE_FEATURES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coughpipe/audio.h"
#include "coughpipe/augment.h"
#include "coughpipe/dsp.h"

namespace coughpipe {

// Recording context of a clip.
enum class Activity { kSitting, kStanding, kWalking, kUnknown };

std::string activity_name(Activity a);
Activity activity_from_name(const std::string& name);

// Which rows of a manifest take part in a run.
enum class ActivityFilter { kAll, kWalking, kNonWalking };

std::string activity_filter_name(ActivityFilter f);
ActivityFilter activity_filter_from_name(const std::string& name);

// One row of a manifest CSV. The file carries a header
// `path,label,activity,subject` (extra columns are preserved only where
// declared below) with label one of {cough, no_cough}.
struct ManifestRow {
  std::string path;
  int label = 0;  // 1 = cough
  Activity activity = Activity::kUnknown;
  std::string subject;
  std::optional<int> burst_count;  // ground-truth column emitted by synth
};

// Parses a manifest CSV. Relative audio paths are resolved against the
// manifest's own directory.
//
// Throws IoFailure (unreadable file), PreconditionError (bad header, bad
// label or activity value, wrong column count).
std::vector<ManifestRow> load_manifest(const std::string& path);

void write_manifest(const std::vector<ManifestRow>& rows,
                    const std::string& path);

// Per-clip feature vector: the mean over frames of the first n_mfcc
// cepstral coefficients concatenated with the mean over frames of the
// n_mels log mel bands. Duration drops out entirely, so clips of any
// length map to n_mfcc + n_mels values (80 by default).
//
// Throws ClipTooShort (under 0.2 s), PreconditionError (rate mismatch).
std::vector<double> extract_features(const AudioClip& clip,
                                     const SpectralConfig& cfg);

enum class Split { kTrain, kVal, kTest };

std::string split_name(Split s);

// One example of the learning problem.
struct FeatureRow {
  std::string clip_id;
  std::string origin_id;  // clip it was augmented from; = clip_id if original
  std::vector<double> features;
  int label = 0;
  Activity activity = Activity::kUnknown;
  std::string subject;
  Provenance provenance = Provenance::kOriginal;
  Split split = Split::kTrain;
  std::optional<int> burst_count;
};

// A feature matrix with bookkeeping.
struct LabeledDataset {
  std::vector<FeatureRow> rows;
  size_t feature_dim = 0;
  // Manifest rows whose audio failed to decode, with the reason.
  std::vector<std::pair<std::string, std::string>> failures;
};

// A decoded, canonical-rate clip together with its manifest row.
struct DecodedClip {
  AudioClip clip;
  ManifestRow row;
};

struct DecodeReport {
  std::vector<DecodedClip> clips;  // manifest order
  std::vector<std::pair<std::string, std::string>> failures;  // path, why
};

// Throws DecodeFailure when more than 10% of `selected` rows failed.
void enforce_failure_budget(
    const std::vector<std::pair<std::string, std::string>>& failures,
    size_t selected);

// Decodes and canonicalizes every manifest row passing the activity
// filter. Unreadable or malformed files are recorded in `failures` and
// skipped, within the 10% budget. Output order follows the manifest
// regardless of how the work is scheduled.
//
// Throws PreconditionError (no rows match the filter), DecodeFailure.
DecodeReport decode_manifest(const std::vector<ManifestRow>& manifest,
                             ActivityFilter filter = ActivityFilter::kAll);

// decode_manifest plus feature extraction. Extraction failures (clips
// under the minimum duration) count against the same 10% budget.
//
// Throws DecodeFailure (failure budget exceeded), PreconditionError
// (empty selection).
LabeledDataset build_dataset(const std::vector<ManifestRow>& manifest,
                             const SpectralConfig& cfg,
                             ActivityFilter filter = ActivityFilter::kAll);

// Stratified split. Within each label class the original rows are
// shuffled by the seed and dealt into train/val/test by the ratios.
// Augmented rows always follow their origin's partition and are then
// dropped entirely when that partition is val or test, so near-duplicates
// can never straddle the evaluation boundary.
//
// Throws PreconditionError (ratios not summing to 1, negative entries),
// TooFewSamples (fewer than 5 original rows in some class).
void split_dataset(LabeledDataset& ds, const std::array<double, 3>& ratios,
                   uint64_t seed);

// Per-dimension affine map fitted on training rows: x -> (x - mean) / sd,
// with sd the population standard deviation. Dimensions with zero spread
// keep sd = 1 so they pass through centred.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;

  std::vector<double> apply(const std::vector<double>& x) const;
};

// Fits on the rows assigned to the training split.
//
// Throws PreconditionError (no training rows).
Standardizer fit_standardizer(const LabeledDataset& ds);

// Replaces every row's features with their standardized image.
void apply_standardizer(LabeledDataset& ds, const Standardizer& s);

// Writes the dataset as CSV: feature columns f0..f{d-1}, then clip_id,
// label, activity, subject, provenance, split.
void write_dataset_csv(const LabeledDataset& ds, const std::string& path);

}  // namespace coughpipe

#endif  // COUGHPIPE_FEATURES_H_
