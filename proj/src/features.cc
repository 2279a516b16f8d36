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

#include "coughpipe/features.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "coughpipe/errors.h"
#include "coughpipe/parallel.h"
#include "coughpipe/rng.h"

namespace coughpipe {
namespace {

constexpr double kMinClipSeconds = 0.2;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace

std::string activity_name(Activity a) {
  switch (a) {
    case Activity::kSitting:
      return "sitting";
    case Activity::kStanding:
      return "standing";
    case Activity::kWalking:
      return "walking";
    case Activity::kUnknown:
      return "unknown";
  }
  return "unknown";
}

Activity activity_from_name(const std::string& name) {
  if (name == "sitting") return Activity::kSitting;
  if (name == "standing") return Activity::kStanding;
  if (name == "walking") return Activity::kWalking;
  if (name == "unknown") return Activity::kUnknown;
  throw PreconditionError("unknown activity: " + name);
}

std::string activity_filter_name(ActivityFilter f) {
  switch (f) {
    case ActivityFilter::kAll:
      return "all";
    case ActivityFilter::kWalking:
      return "walking";
    case ActivityFilter::kNonWalking:
      return "non-walking";
  }
  return "all";
}

ActivityFilter activity_filter_from_name(const std::string& name) {
  if (name == "all") return ActivityFilter::kAll;
  if (name == "walking") return ActivityFilter::kWalking;
  if (name == "non-walking") return ActivityFilter::kNonWalking;
  throw PreconditionError("unknown activity filter: " + name);
}

std::string split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

std::vector<ManifestRow> load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open manifest: " + path);

  std::string line;
  if (!std::getline(f, line)) {
    throw PreconditionError("manifest is empty: " + path);
  }
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "path" || header[1] != "label" ||
      header[2] != "activity" || header[3] != "subject") {
    throw PreconditionError(
        "manifest header must start with path,label,activity,subject: " +
        path);
  }
  int burst_col = -1;
  for (size_t i = 4; i < header.size(); ++i) {
    if (header[i] == "burst_count") burst_col = static_cast<int>(i);
  }

  std::vector<ManifestRow> rows;
  size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw PreconditionError("manifest line " + std::to_string(line_no) +
                              " has " + std::to_string(fields.size()) +
                              " fields, expected " +
                              std::to_string(header.size()));
    }
    ManifestRow row;
    const std::filesystem::path entry(fields[0]);
    row.path = entry.is_absolute()
                   ? entry.string()
                   : (std::filesystem::path(path).parent_path() / entry)
                         .string();
    if (fields[1] == "cough") {
      row.label = 1;
    } else if (fields[1] == "no_cough") {
      row.label = 0;
    } else {
      throw PreconditionError("manifest line " + std::to_string(line_no) +
                              ": label must be cough or no_cough, got '" +
                              fields[1] + "'");
    }
    row.activity = activity_from_name(fields[2]);
    row.subject = fields[3];
    if (burst_col >= 0) {
      row.burst_count = std::stoi(fields[static_cast<size_t>(burst_col)]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest(const std::vector<ManifestRow>& rows,
                    const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open for writing: " + path);
  const bool bursts = std::any_of(rows.begin(), rows.end(), [](const auto& r) {
    return r.burst_count.has_value();
  });
  f << "path,label,activity,subject" << (bursts ? ",burst_count" : "") << "\n";
  for (const auto& r : rows) {
    f << r.path << ',' << (r.label ? "cough" : "no_cough") << ','
      << activity_name(r.activity) << ',' << r.subject;
    if (bursts) f << ',' << r.burst_count.value_or(0);
    f << "\n";
  }
  if (!f.good()) throw IoFailure("write failed: " + path);
}

std::vector<double> extract_features(const AudioClip& clip,
                                     const SpectralConfig& cfg) {
  if (clip.duration_s() < kMinClipSeconds) {
    throw ClipTooShort("clip " + clip.id + " is " +
                       std::to_string(clip.duration_s()) +
                       " s; features need at least 0.2 s");
  }
  const Spectrogram logmel = log_mel_spectrogram(clip, cfg);

  // Mean over frames of each cepstral coefficient, then of each band.
  std::vector<double> out(static_cast<size_t>(cfg.n_mfcc + cfg.n_mels), 0.0);
  std::vector<double> row(logmel.n_bins);
  for (size_t fr = 0; fr < logmel.n_frames; ++fr) {
    for (size_t b = 0; b < logmel.n_bins; ++b) row[b] = logmel.at(fr, b);
    const auto coeffs = dct_ii_orthonormal(row);
    for (int k = 0; k < cfg.n_mfcc; ++k) out[k] += coeffs[k];
    for (int b = 0; b < cfg.n_mels; ++b) out[cfg.n_mfcc + b] += row[b];
  }
  const double inv = 1.0 / static_cast<double>(logmel.n_frames);
  for (double& v : out) v *= inv;
  return out;
}

void enforce_failure_budget(
    const std::vector<std::pair<std::string, std::string>>& failures,
    size_t selected) {
  if (failures.size() * 10 > selected) {
    throw DecodeFailure(std::to_string(failures.size()) + " of " +
                        std::to_string(selected) +
                        " rows failed (over the 10% budget); "
                        "first failure: " +
                        failures.front().first + ": " +
                        failures.front().second);
  }
}

DecodeReport decode_manifest(const std::vector<ManifestRow>& manifest,
                             ActivityFilter filter) {
  std::vector<const ManifestRow*> selected;
  for (const auto& row : manifest) {
    const bool keep =
        filter == ActivityFilter::kAll ||
        (filter == ActivityFilter::kWalking &&
         row.activity == Activity::kWalking) ||
        (filter == ActivityFilter::kNonWalking &&
         (row.activity == Activity::kSitting ||
          row.activity == Activity::kStanding));
    if (keep) selected.push_back(&row);
  }
  if (selected.empty()) {
    throw PreconditionError("no manifest rows match filter '" +
                            activity_filter_name(filter) + "'");
  }

  struct Slot {
    AudioClip clip;
    bool ok = false;
    std::string error;
  };
  std::vector<Slot> slots(selected.size());
  parallel_for(selected.size(), [&](size_t i) {
    Slot& slot = slots[i];
    try {
      slot.clip = load_canonical(selected[i]->path);
      slot.ok = true;
    } catch (const Error& e) {
      slot.error = e.what();
    }
  });

  DecodeReport report;
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].ok) {
      report.clips.push_back({std::move(slots[i].clip), *selected[i]});
    } else {
      report.failures.emplace_back(selected[i]->path, slots[i].error);
    }
  }
  enforce_failure_budget(report.failures, selected.size());
  return report;
}

LabeledDataset build_dataset(const std::vector<ManifestRow>& manifest,
                             const SpectralConfig& cfg,
                             ActivityFilter filter) {
  DecodeReport decoded = decode_manifest(manifest, filter);
  const size_t selected = decoded.clips.size() + decoded.failures.size();

  struct Slot {
    FeatureRow row;
    bool ok = false;
    std::string error;
  };
  std::vector<Slot> slots(decoded.clips.size());
  parallel_for(decoded.clips.size(), [&](size_t i) {
    const DecodedClip& d = decoded.clips[i];
    Slot& slot = slots[i];
    try {
      slot.row.features = extract_features(d.clip, cfg);
      slot.row.clip_id = d.row.path;
      slot.row.origin_id = d.row.path;
      slot.row.label = d.row.label;
      slot.row.activity = d.row.activity;
      slot.row.subject = d.row.subject;
      slot.row.provenance = Provenance::kOriginal;
      slot.row.burst_count = d.row.burst_count;
      slot.ok = true;
    } catch (const Error& e) {
      slot.error = e.what();
    }
  });

  LabeledDataset ds;
  ds.feature_dim = static_cast<size_t>(cfg.n_mfcc + cfg.n_mels);
  ds.failures = std::move(decoded.failures);
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].ok) {
      ds.rows.push_back(std::move(slots[i].row));
    } else {
      ds.failures.emplace_back(decoded.clips[i].row.path, slots[i].error);
    }
  }
  enforce_failure_budget(ds.failures, selected);
  return ds;
}

void split_dataset(LabeledDataset& ds, const std::array<double, 3>& ratios,
                   uint64_t seed) {
  for (double r : ratios) {
    if (r < 0.0) throw PreconditionError("split ratios must be >= 0");
  }
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(total - 1.0) > 1e-9) {
    throw PreconditionError("split ratios must sum to 1");
  }

  // Partition the originals per class.
  std::vector<size_t> by_class[2];
  for (size_t i = 0; i < ds.rows.size(); ++i) {
    if (ds.rows[i].provenance == Provenance::kOriginal) {
      by_class[ds.rows[i].label == 1 ? 1 : 0].push_back(i);
    }
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < 5) {
      throw TooFewSamples("class " + std::to_string(c) + " has only " +
                          std::to_string(by_class[c].size()) +
                          " original rows; need at least 5");
    }
  }

  std::unordered_map<std::string, Split> origin_split;
  for (int c = 0; c < 2; ++c) {
    auto& idx = by_class[c];
    Rng rng(Rng::derive(seed, static_cast<uint64_t>(c)));
    rng.shuffle(idx);
    const size_t n = idx.size();
    const size_t n_train = static_cast<size_t>(
        std::llround(ratios[0] * static_cast<double>(n)));
    const size_t n_train_val = static_cast<size_t>(
        std::llround((ratios[0] + ratios[1]) * static_cast<double>(n)));
    for (size_t i = 0; i < n; ++i) {
      const Split s = i < n_train             ? Split::kTrain
                      : i < n_train_val       ? Split::kVal
                                              : Split::kTest;
      ds.rows[idx[i]].split = s;
      origin_split[ds.rows[idx[i]].clip_id] = s;
    }
  }

  // Derived rows inherit their origin's partition; any that would land in
  // val or test are dropped outright so evaluation never sees material
  // correlated with training rows (or vice versa).
  std::vector<FeatureRow> kept;
  kept.reserve(ds.rows.size());
  for (auto& row : ds.rows) {
    if (row.provenance == Provenance::kOriginal) {
      kept.push_back(std::move(row));
      continue;
    }
    const auto it = origin_split.find(row.origin_id);
    if (it == origin_split.end()) {
      throw PreconditionError("augmented row " + row.clip_id +
                              " has no original row " + row.origin_id);
    }
    row.split = it->second;
    if (row.split == Split::kTrain) kept.push_back(std::move(row));
  }
  ds.rows = std::move(kept);
}

std::vector<double> Standardizer::apply(const std::vector<double>& x) const {
  if (x.size() != mean.size()) {
    throw DimensionMismatch("standardizer fitted on " +
                            std::to_string(mean.size()) +
                            " dims, got " + std::to_string(x.size()));
  }
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / sd[i];
  return out;
}

Standardizer fit_standardizer(const LabeledDataset& ds) {
  std::vector<const FeatureRow*> train;
  for (const auto& row : ds.rows) {
    if (row.split == Split::kTrain) train.push_back(&row);
  }
  if (train.empty()) {
    throw PreconditionError("fit_standardizer: no training rows");
  }
  const size_t d = train.front()->features.size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.sd.assign(d, 0.0);
  for (const auto* row : train) {
    for (size_t i = 0; i < d; ++i) s.mean[i] += row->features[i];
  }
  const double inv_n = 1.0 / static_cast<double>(train.size());
  for (double& m : s.mean) m *= inv_n;
  for (const auto* row : train) {
    for (size_t i = 0; i < d; ++i) {
      const double dev = row->features[i] - s.mean[i];
      s.sd[i] += dev * dev;
    }
  }
  for (double& v : s.sd) {
    v = std::sqrt(v * inv_n);
    if (v == 0.0) v = 1.0;  // constant dimension passes through centred
  }
  return s;
}

void apply_standardizer(LabeledDataset& ds, const Standardizer& s) {
  for (auto& row : ds.rows) row.features = s.apply(row.features);
}

void write_dataset_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open for writing: " + path);
  f.precision(17);
  for (size_t i = 0; i < ds.feature_dim; ++i) f << 'f' << i << ',';
  f << "clip_id,label,activity,subject,provenance,split\n";
  for (const auto& row : ds.rows) {
    for (double v : row.features) f << v << ',';
    f << row.clip_id << ',' << (row.label ? "cough" : "no_cough") << ','
      << activity_name(row.activity) << ',' << row.subject << ','
      << provenance_name(row.provenance) << ',' << split_name(row.split)
      << "\n";
  }
  if (!f.good()) throw IoFailure("write failed: " + path);
}

}  // namespace coughpipe
