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

#ifndef COUGHPIPE_PIPELINE_H_
#define COUGHPIPE_PIPELINE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coughpipe/augment.h"
#include "coughpipe/cluster.h"
#include "coughpipe/cnn.h"
#include "coughpipe/dsp.h"
#include "coughpipe/features.h"
#include "coughpipe/forest.h"
#include "coughpipe/metrics.h"
#include "coughpipe/synthgen.h"

namespace coughpipe {

// Everything a run needs, overridable from a JSON config file. The
// master seed fans out into fixed substreams (split, augmentation,
// weight init, batch order, forest, clustering) so every stage is
// independently reproducible.
struct PipelineConfig {
  uint64_t seed = 1;
  SpectralConfig spectral;
  AugmentConfig augment;
  std::array<double, 3> split_ratios = {0.64, 0.16, 0.20};
  CnnConfig cnn;
  ForestConfig forest;
  KMeansConfig cluster;
  int cluster_k_min = 2;
  int cluster_k_max = 10;
  int elbow_k_min = 1;
  int elbow_k_max = 10;
  CorpusConfig corpus;
  double threshold = 0.5;
  ActivityFilter activity = ActivityFilter::kAll;
  double scan_window_s = 1.5;
  double scan_hop_s = 0.5;
};

// Fixed stream ids hung off the master seed.
namespace seed_stream {
inline constexpr uint64_t kSplit = 1;
inline constexpr uint64_t kAugment = 2;
inline constexpr uint64_t kCnnInit = 3;
inline constexpr uint64_t kCnnTrain = 4;
inline constexpr uint64_t kForest = 5;
inline constexpr uint64_t kCluster = 6;
}  // namespace seed_stream

// Parses a JSON config file. Every key is optional; unknown keys are
// rejected so typos cannot silently fall back to defaults.
//
// Throws ConfigError.
PipelineConfig load_config(const std::string& path);

// Which trainable model a command runs.
enum class ModelKind { kCnn, kForest };
const char* model_kind_name(ModelKind m);
ModelKind model_kind_from_name(const std::string& name);

// How far the cough set is expanded before training.
enum class AugmentMode { kNone, kNoise, kNoiseInterp };
const char* augment_mode_name(AugmentMode m);
AugmentMode augment_mode_from_name(const std::string& name);

// The dataset after decoding, augmentation, feature extraction,
// splitting and standardization. Matrices hold standardized features.
struct AssembledData {
  LabeledDataset data;  // rows carry raw features and split tags
  Standardizer scaler;
  size_t n_cough_originals = 0;
  size_t n_cough_rows = 0;  // originals plus surviving augmented rows
  std::vector<std::vector<double>> train_x, val_x, test_x;
  std::vector<int> train_y, val_y, test_y;
  std::vector<size_t> train_rows, val_rows, test_rows;  // indices into data
};

// Decode -> augment coughs (per mode) -> features -> stratified split ->
// standardize on the training rows.
//
// Throws DecodeFailure, TooFewSamples, PreconditionError, SingleClassInput
// (a split ends up with one class).
AssembledData assemble_dataset(const std::vector<ManifestRow>& manifest,
                               const PipelineConfig& cfg, AugmentMode mode);

struct TrainResult {
  ModelKind model = ModelKind::kCnn;
  MetricsSummary test_metrics;
  ConfusionMatrix test_cm;
  TrainReport cnn_report;    // meaningful for the network only
  std::string weights_path;  // empty for the forest
  std::string metrics_path;
};

// Trains one model and writes metrics.json, confusion.csv/.svg and (for
// the network) model.cpw plus loss_curve.svg under out_dir.
TrainResult run_train(const std::vector<ManifestRow>& manifest,
                      const PipelineConfig& cfg, ModelKind model,
                      AugmentMode mode, const std::string& out_dir);

// Applies a saved network to every manifest row that passes the filter
// and writes metrics.json + confusion.csv/.svg under out_dir.
MetricsSummary run_eval(const std::vector<ManifestRow>& manifest,
                        const PipelineConfig& cfg,
                        const std::string& weights_path,
                        const std::string& out_dir);

struct AblationRow {
  AugmentMode mode = AugmentMode::kNone;
  MetricsSummary metrics;
};

// Trains the network once per augmentation condition on the same split
// and evaluates each on the shared untouched test rows. Writes
// ablation.csv and ablation.svg under out_dir.
std::vector<AblationRow> run_ablation(const std::vector<ManifestRow>& manifest,
                                      const PipelineConfig& cfg,
                                      const std::string& out_dir);

struct ClusterArtifacts {
  std::vector<ElbowPoint> elbow;
  KSelection selection;
  KMeansResult clustering;  // at the selected k
  std::vector<std::string> clip_ids;
  std::vector<int> burst_counts;  // 0 when the manifest has no column
  std::string report_path;
};

// Clusters the standardized features of the original cough clips. Writes
// elbow.csv, elbow.svg, silhouette.svg and cluster_report.json.
ClusterArtifacts run_cluster(const std::vector<ManifestRow>& manifest,
                             const PipelineConfig& cfg,
                             const std::string& out_dir);

struct AugmentSummary {
  size_t n_cough_inputs = 0;  // original cough clips read
  size_t n_written = 0;       // augmented WAV files written
  std::string manifest_path;
};

// Materializes the augmented cough set as WAV files plus a manifest that
// lists the originals (by absolute path) and the new files. Intended for
// inspection and export; training augments in memory instead.
AugmentSummary run_augment(const std::vector<ManifestRow>& manifest,
                           const PipelineConfig& cfg,
                           const std::string& out_dir);

struct ScanEvent {
  double start_s = 0.0;
  double end_s = 0.0;
  double max_prob = 0.0;
};

// Slides a window over one clip, scores each window with the model, and
// merges consecutive over-threshold windows into events.
std::vector<ScanEvent> scan_clip(const AudioClip& clip, const LoadedModel& model,
                                 const PipelineConfig& cfg);

// scan_clip on a WAV file; writes events JSON to out_path.
std::vector<ScanEvent> run_scan(const std::string& wav_path,
                                const std::string& weights_path,
                                const PipelineConfig& cfg,
                                const std::string& out_path);

// Renders report.md from whichever artifacts (metrics.json, ablation.csv,
// cluster_report.json, events.json) exist under dir.
std::string run_report(const std::string& dir);

// Generates the synthetic corpus under out_dir.
CorpusSummary run_synth(const std::string& out_dir, const PipelineConfig& cfg);

// metrics.json contents shared by train and eval.
void write_metrics_json(const std::string& path, const MetricsSummary& m,
                        const ConfusionMatrix& cm, ModelKind model,
                        const PipelineConfig& cfg,
                        const TrainReport* report);

}  // namespace coughpipe

#endif  // COUGHPIPE_PIPELINE_H_
