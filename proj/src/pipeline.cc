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

#include "coughpipe/pipeline.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "coughpipe/errors.h"
#include "coughpipe/parallel.h"
#include "coughpipe/svg.h"

namespace coughpipe {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) throw IoFailure("cannot open for writing: " + path);
  f << text;
  if (!f.good()) throw IoFailure("write failed: " + path);
}

// ---------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------

void check_keys(const json& obj, const std::string& scope,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(scope + " must be a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw ConfigError("unknown config key '" + scope + "." + key + "'");
    }
  }
}

template <typename T>
void assign(const json& obj, const char* key, T& out,
            const std::string& scope) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config value '" + scope + "." + key +
                      "' has the wrong type");
  }
}

template <typename T, size_t N>
void assign_array(const json& obj, const char* key, std::array<T, N>& out,
                  const std::string& scope) {
  if (!obj.contains(key)) return;
  const json& arr = obj.at(key);
  if (!arr.is_array() || arr.size() != N) {
    throw ConfigError("config value '" + scope + "." + key + "' must be an " +
                      "array of " + std::to_string(N) + " numbers");
  }
  for (size_t i = 0; i < N; ++i) {
    try {
      out[i] = arr.at(i).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config value '" + scope + "." + key +
                        "' has the wrong element type");
    }
  }
}

void parse_spectral(const json& obj, SpectralConfig& cfg) {
  check_keys(obj, "spectral",
             {"sample_rate", "frame_len", "hop", "n_mels", "n_mfcc",
              "fmin_hz", "fmax_hz", "log_floor"});
  assign(obj, "sample_rate", cfg.sample_rate, "spectral");
  assign(obj, "frame_len", cfg.frame_len, "spectral");
  assign(obj, "hop", cfg.hop, "spectral");
  assign(obj, "n_mels", cfg.n_mels, "spectral");
  assign(obj, "n_mfcc", cfg.n_mfcc, "spectral");
  assign(obj, "fmin_hz", cfg.fmin_hz, "spectral");
  assign(obj, "fmax_hz", cfg.fmax_hz, "spectral");
  assign(obj, "log_floor", cfg.log_floor, "spectral");
}

void parse_cnn(const json& obj, CnnConfig& cfg, bool& input_len_given) {
  check_keys(obj, "cnn",
             {"input_len", "kernel", "conv_filters", "pool", "dense_units",
              "dropout_rate", "learning_rate", "beta1", "beta2", "epsilon",
              "batch_size", "max_epochs", "patience", "positive_weight"});
  input_len_given = obj.contains("input_len");
  assign(obj, "input_len", cfg.input_len, "cnn");
  assign(obj, "kernel", cfg.kernel, "cnn");
  assign_array(obj, "conv_filters", cfg.conv_filters, "cnn");
  assign(obj, "pool", cfg.pool, "cnn");
  assign_array(obj, "dense_units", cfg.dense_units, "cnn");
  assign(obj, "dropout_rate", cfg.dropout_rate, "cnn");
  assign(obj, "learning_rate", cfg.learning_rate, "cnn");
  assign(obj, "beta1", cfg.beta1, "cnn");
  assign(obj, "beta2", cfg.beta2, "cnn");
  assign(obj, "epsilon", cfg.epsilon, "cnn");
  assign(obj, "batch_size", cfg.batch_size, "cnn");
  assign(obj, "max_epochs", cfg.max_epochs, "cnn");
  assign(obj, "patience", cfg.patience, "cnn");
  assign(obj, "positive_weight", cfg.positive_weight, "cnn");
}

void parse_synth(const json& obj, CorpusConfig& cfg) {
  check_keys(obj, "synth",
             {"clip_len_s", "burst_dur_lo", "burst_dur_hi", "gap_lo",
              "gap_hi", "decay_tau_s", "peak_lo", "peak_hi", "band_q",
              "per_burst_class", "per_background_kind"});
  assign(obj, "clip_len_s", cfg.synth.clip_len_s, "synth");
  assign(obj, "burst_dur_lo", cfg.synth.burst_dur_lo, "synth");
  assign(obj, "burst_dur_hi", cfg.synth.burst_dur_hi, "synth");
  assign(obj, "gap_lo", cfg.synth.gap_lo, "synth");
  assign(obj, "gap_hi", cfg.synth.gap_hi, "synth");
  assign(obj, "decay_tau_s", cfg.synth.decay_tau_s, "synth");
  assign(obj, "peak_lo", cfg.synth.peak_lo, "synth");
  assign(obj, "peak_hi", cfg.synth.peak_hi, "synth");
  assign(obj, "band_q", cfg.synth.band_q, "synth");
  assign(obj, "per_burst_class", cfg.per_burst_class, "synth");
  assign(obj, "per_background_kind", cfg.per_background_kind, "synth");
}

PipelineConfig parse_config(const json& root) {
  PipelineConfig cfg;
  check_keys(root, "config",
             {"seed", "threshold", "activity", "split", "spectral", "augment",
              "cnn", "forest", "cluster", "synth", "scan"});
  assign(root, "seed", cfg.seed, "config");
  assign(root, "threshold", cfg.threshold, "config");
  if (cfg.threshold < 0.0 || cfg.threshold > 1.0) {
    throw ConfigError("config.threshold must lie in [0, 1]");
  }
  if (root.contains("activity")) {
    std::string name;
    assign(root, "activity", name, "config");
    try {
      cfg.activity = activity_filter_from_name(name);
    } catch (const Error& e) {
      throw ConfigError(std::string("config.activity: ") + e.what());
    }
  }
  assign_array(root, "split", cfg.split_ratios, "config");

  bool input_len_given = false;
  if (root.contains("spectral")) parse_spectral(root.at("spectral"), cfg.spectral);
  if (root.contains("cnn")) parse_cnn(root.at("cnn"), cfg.cnn, input_len_given);
  if (root.contains("augment")) {
    const json& obj = root.at("augment");
    check_keys(obj, "augment", {"noise_scale", "interp_noise_scale"});
    assign(obj, "noise_scale", cfg.augment.noise_scale, "augment");
    assign(obj, "interp_noise_scale", cfg.augment.interp_noise_scale,
           "augment");
  }
  if (root.contains("forest")) {
    const json& obj = root.at("forest");
    check_keys(obj, "forest",
               {"n_trees", "max_depth", "min_samples_split", "mtry"});
    assign(obj, "n_trees", cfg.forest.n_trees, "forest");
    assign(obj, "max_depth", cfg.forest.max_depth, "forest");
    assign(obj, "min_samples_split", cfg.forest.min_samples_split, "forest");
    assign(obj, "mtry", cfg.forest.mtry, "forest");
  }
  if (root.contains("cluster")) {
    const json& obj = root.at("cluster");
    check_keys(obj, "cluster",
               {"k", "n_restarts", "max_iter", "tol", "k_min", "k_max",
                "elbow_k_min", "elbow_k_max"});
    assign(obj, "k", cfg.cluster.k, "cluster");
    assign(obj, "n_restarts", cfg.cluster.n_restarts, "cluster");
    assign(obj, "max_iter", cfg.cluster.max_iter, "cluster");
    assign(obj, "tol", cfg.cluster.tol, "cluster");
    assign(obj, "k_min", cfg.cluster_k_min, "cluster");
    assign(obj, "k_max", cfg.cluster_k_max, "cluster");
    assign(obj, "elbow_k_min", cfg.elbow_k_min, "cluster");
    assign(obj, "elbow_k_max", cfg.elbow_k_max, "cluster");
  }
  if (root.contains("synth")) parse_synth(root.at("synth"), cfg.corpus);
  if (root.contains("scan")) {
    const json& obj = root.at("scan");
    check_keys(obj, "scan", {"window_s", "hop_s"});
    assign(obj, "window_s", cfg.scan_window_s, "scan");
    assign(obj, "hop_s", cfg.scan_hop_s, "scan");
    if (cfg.scan_window_s <= 0.0 || cfg.scan_hop_s <= 0.0) {
      throw ConfigError("scan window and hop must be positive");
    }
  }

  const int derived_len = cfg.spectral.n_mfcc + cfg.spectral.n_mels;
  if (!input_len_given) {
    cfg.cnn.input_len = derived_len;
  } else if (cfg.cnn.input_len != derived_len) {
    throw ConfigError("cnn.input_len (" + std::to_string(cfg.cnn.input_len) +
                      ") must equal n_mfcc + n_mels (" +
                      std::to_string(derived_len) + ")");
  }
  return cfg;
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const IoFailure& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(root);
}

const char* model_kind_name(ModelKind m) {
  return m == ModelKind::kCnn ? "cnn" : "forest";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "cnn") return ModelKind::kCnn;
  if (name == "forest") return ModelKind::kForest;
  throw ConfigError("unknown model '" + name + "' (want cnn or forest)");
}

const char* augment_mode_name(AugmentMode m) {
  switch (m) {
    case AugmentMode::kNone:
      return "original";
    case AugmentMode::kNoise:
      return "noise";
    case AugmentMode::kNoiseInterp:
      return "noise_interp";
  }
  return "original";
}

AugmentMode augment_mode_from_name(const std::string& name) {
  if (name == "original") return AugmentMode::kNone;
  if (name == "noise") return AugmentMode::kNoise;
  if (name == "noise_interp") return AugmentMode::kNoiseInterp;
  throw ConfigError("unknown augment mode '" + name +
                    "' (want original, noise or noise_interp)");
}

// ---------------------------------------------------------------------
// Dataset assembly
// ---------------------------------------------------------------------

namespace {

struct PendingClip {
  AudioClip clip;
  const ManifestRow* meta = nullptr;
  Provenance provenance = Provenance::kOriginal;
  std::string clip_id;
  std::string origin_id;
};

void require_both_classes(const std::vector<int>& y, const char* split) {
  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1) {
    throw SingleClassInput(std::string("the ") + split +
                           " split contains a single class; training "
                           "needs both");
  }
}

}  // namespace

AssembledData assemble_dataset(const std::vector<ManifestRow>& manifest,
                               const PipelineConfig& cfg, AugmentMode mode) {
  DecodeReport decoded = decode_manifest(manifest, cfg.activity);
  const size_t selected = decoded.clips.size() + decoded.failures.size();

  std::unordered_map<std::string, const ManifestRow*> meta_by_id;
  std::vector<PendingClip> pending;
  pending.reserve(decoded.clips.size());
  std::vector<AudioClip> coughs;
  for (auto& d : decoded.clips) {
    PendingClip p;
    p.meta = &d.row;
    p.provenance = Provenance::kOriginal;
    p.clip_id = d.row.path;
    p.origin_id = d.row.path;
    p.clip = std::move(d.clip);
    p.clip.id = d.row.path;
    meta_by_id[d.row.path] = &d.row;
    if (d.row.label == 1 && mode != AugmentMode::kNone) {
      coughs.push_back(p.clip);
    }
    pending.push_back(std::move(p));
  }
  const size_t n_originals = pending.size();

  if (!coughs.empty()) {
    const uint64_t aug_seed = Rng::derive(cfg.seed, seed_stream::kAugment);
    for (auto& aug : expand_cough_set(coughs, cfg.augment, aug_seed)) {
      if (aug.provenance == Provenance::kOriginal) continue;
      if (mode == AugmentMode::kNoise &&
          aug.provenance != Provenance::kNoise) {
        continue;
      }
      PendingClip p;
      p.meta = meta_by_id.at(aug.origin_id);
      p.provenance = aug.provenance;
      p.clip_id = aug.clip.id;
      p.origin_id = aug.origin_id;
      p.clip = std::move(aug.clip);
      pending.push_back(std::move(p));
    }
  }

  struct Slot {
    FeatureRow row;
    bool ok = false;
    std::string error;
  };
  std::vector<Slot> slots(pending.size());
  parallel_for(pending.size(), [&](size_t i) {
    const PendingClip& p = pending[i];
    Slot& slot = slots[i];
    try {
      slot.row.features = extract_features(p.clip, cfg.spectral);
      slot.row.clip_id = p.clip_id;
      slot.row.origin_id = p.origin_id;
      slot.row.label = p.meta->label;
      slot.row.activity = p.meta->activity;
      slot.row.subject = p.meta->subject;
      slot.row.provenance = p.provenance;
      slot.row.burst_count = p.meta->burst_count;
      slot.ok = true;
    } catch (const Error& e) {
      slot.error = e.what();
    }
  });

  AssembledData out;
  out.data.feature_dim =
      static_cast<size_t>(cfg.spectral.n_mfcc + cfg.spectral.n_mels);
  out.data.failures = std::move(decoded.failures);
  std::vector<std::pair<std::string, std::string>> original_failures =
      out.data.failures;
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].ok) {
      if (slots[i].row.label == 1 &&
          slots[i].row.provenance == Provenance::kOriginal) {
        out.n_cough_originals += 1;
      }
      out.data.rows.push_back(std::move(slots[i].row));
    } else {
      out.data.failures.emplace_back(pending[i].clip_id, slots[i].error);
      if (i < n_originals) {
        original_failures.emplace_back(pending[i].clip_id, slots[i].error);
      }
    }
  }
  // Only original rows count against the decode budget: a derived clip
  // that comes out too short is just dropped.
  enforce_failure_budget(original_failures, selected);

  split_dataset(out.data, cfg.split_ratios,
                Rng::derive(cfg.seed, seed_stream::kSplit));
  // Count cough rows only after the split has discarded augmented rows
  // whose origin fell into val or test.
  for (const FeatureRow& row : out.data.rows) {
    if (row.label == 1) out.n_cough_rows += 1;
  }
  out.scaler = fit_standardizer(out.data);

  for (size_t i = 0; i < out.data.rows.size(); ++i) {
    const FeatureRow& row = out.data.rows[i];
    const std::vector<double> x = out.scaler.apply(row.features);
    switch (row.split) {
      case Split::kTrain:
        out.train_x.push_back(x);
        out.train_y.push_back(row.label);
        out.train_rows.push_back(i);
        break;
      case Split::kVal:
        out.val_x.push_back(x);
        out.val_y.push_back(row.label);
        out.val_rows.push_back(i);
        break;
      case Split::kTest:
        out.test_x.push_back(x);
        out.test_y.push_back(row.label);
        out.test_rows.push_back(i);
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------
// Training and evaluation
// ---------------------------------------------------------------------

void write_metrics_json(const std::string& path, const MetricsSummary& m,
                        const ConfusionMatrix& cm, ModelKind model,
                        const PipelineConfig& cfg,
                        const TrainReport* report) {
  json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["confusion"] = {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
  j["model"] = model_kind_name(model);
  j["seed"] = cfg.seed;
  j["threshold"] = cfg.threshold;
  if (report != nullptr) {
    j["training"] = {{"best_epoch", report->best_epoch},
                     {"stopped_epoch", report->stopped_epoch},
                     {"best_val_loss", report->best_val_loss}};
  }
  write_text_file(path, j.dump(2) + "\n");
}

namespace {

void write_loss_curve(const std::string& path, const TrainReport& report) {
  svg::Series train{"train loss", {}};
  svg::Series val{"val loss", {}};
  for (size_t e = 0; e < report.epochs.size(); ++e) {
    const double x = static_cast<double>(e + 1);
    train.points.emplace_back(x, report.epochs[e].train_loss);
    val.points.emplace_back(x, report.epochs[e].val_loss);
  }
  svg::write_line_chart(path, "Training curves", "epoch", "loss",
                        {train, val});
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoFailure("cannot create directory: " + dir);
}

}  // namespace

TrainResult run_train(const std::vector<ManifestRow>& manifest,
                      const PipelineConfig& cfg, ModelKind model,
                      AugmentMode mode, const std::string& out_dir) {
  ensure_dir(out_dir);
  AssembledData a = assemble_dataset(manifest, cfg, mode);
  require_both_classes(a.train_y, "train");

  TrainResult res;
  res.model = model;
  std::vector<double> test_probs;
  if (model == ModelKind::kCnn) {
    if (static_cast<size_t>(cfg.cnn.input_len) != a.data.feature_dim) {
      throw ConfigError("cnn.input_len does not match the feature width");
    }
    require_both_classes(a.val_y, "val");
    Rng init_rng(Rng::derive(cfg.seed, seed_stream::kCnnInit));
    CnnParameters params = init_params(cfg.cnn, init_rng);
    res.cnn_report =
        train(params, cfg.cnn, a.train_x, a.train_y, a.val_x, a.val_y,
              Rng::derive(cfg.seed, seed_stream::kCnnTrain));
    test_probs = forward_eval(params, cfg.cnn, a.test_x);

    res.weights_path = (fs::path(out_dir) / "model.cpw").string();
    FeatureScaler scaler{a.scaler.mean, a.scaler.sd};
    save_weights(params, cfg.cnn, res.weights_path, scaler);
    write_loss_curve((fs::path(out_dir) / "loss_curve.svg").string(),
                     res.cnn_report);
  } else {
    const RandomForest forest =
        train_forest(a.train_x, a.train_y, cfg.forest,
                     Rng::derive(cfg.seed, seed_stream::kForest));
    test_probs = forest_prob_batch(forest, a.test_x);
  }

  res.test_cm = confusion(test_probs, a.test_y, cfg.threshold);
  res.test_metrics = summarize(res.test_cm);
  res.metrics_path = (fs::path(out_dir) / "metrics.json").string();
  write_metrics_json(res.metrics_path, res.test_metrics, res.test_cm, model,
                     cfg, model == ModelKind::kCnn ? &res.cnn_report : nullptr);
  write_confusion_csv(res.test_cm,
                      (fs::path(out_dir) / "confusion.csv").string());
  write_confusion_svg(res.test_cm,
                      (fs::path(out_dir) / "confusion.svg").string());
  write_dataset_csv(a.data, (fs::path(out_dir) / "dataset.csv").string());
  return res;
}

MetricsSummary run_eval(const std::vector<ManifestRow>& manifest,
                        const PipelineConfig& cfg,
                        const std::string& weights_path,
                        const std::string& out_dir) {
  ensure_dir(out_dir);
  const LoadedModel model = load_weights(weights_path, cfg.cnn);
  if (!model.scaler.has_value()) {
    throw PreconditionError(
        "weight file carries no feature scaler; evaluate with a model "
        "saved by training");
  }
  const FeatureScaler& sc = *model.scaler;

  const LabeledDataset ds =
      build_dataset(manifest, cfg.spectral, cfg.activity);
  if (sc.mean.size() != ds.feature_dim) {
    throw ArchitectureMismatch("model expects " +
                               std::to_string(sc.mean.size()) +
                               " features, manifest yields " +
                               std::to_string(ds.feature_dim));
  }

  std::vector<std::vector<double>> x;
  std::vector<int> y;
  x.reserve(ds.rows.size());
  for (const auto& row : ds.rows) {
    std::vector<double> v(row.features.size());
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] = (row.features[i] - sc.mean[i]) / sc.sd[i];
    }
    x.push_back(std::move(v));
    y.push_back(row.label);
  }

  const std::vector<double> probs = forward_eval(model.params, cfg.cnn, x);
  const ConfusionMatrix cm = confusion(probs, y, cfg.threshold);
  const MetricsSummary m = summarize(cm);
  write_metrics_json((fs::path(out_dir) / "metrics.json").string(), m, cm,
                     ModelKind::kCnn, cfg, nullptr);
  write_confusion_csv(cm, (fs::path(out_dir) / "confusion.csv").string());
  write_confusion_svg(cm, (fs::path(out_dir) / "confusion.svg").string());
  return m;
}

std::vector<AblationRow> run_ablation(const std::vector<ManifestRow>& manifest,
                                      const PipelineConfig& cfg,
                                      const std::string& out_dir) {
  ensure_dir(out_dir);
  std::vector<AblationRow> rows;
  for (const AugmentMode mode :
       {AugmentMode::kNone, AugmentMode::kNoise, AugmentMode::kNoiseInterp}) {
    const std::string sub =
        (fs::path(out_dir) / augment_mode_name(mode)).string();
    const TrainResult res =
        run_train(manifest, cfg, ModelKind::kCnn, mode, sub);
    rows.push_back({mode, res.test_metrics});
  }

  std::ostringstream csv;
  csv << "condition,accuracy,precision,recall,f1\n";
  csv.precision(17);
  for (const auto& row : rows) {
    csv << augment_mode_name(row.mode) << ',' << row.metrics.accuracy << ','
        << row.metrics.precision << ',' << row.metrics.recall << ','
        << row.metrics.f1 << "\n";
  }
  write_text_file((fs::path(out_dir) / "ablation.csv").string(), csv.str());

  std::vector<std::string> groups;
  svg::BarSeries acc{"accuracy", {}}, prec{"precision", {}},
      rec{"recall", {}}, f1{"f1", {}};
  for (const auto& row : rows) {
    groups.push_back(augment_mode_name(row.mode));
    acc.values.push_back(row.metrics.accuracy);
    prec.values.push_back(row.metrics.precision);
    rec.values.push_back(row.metrics.recall);
    f1.values.push_back(row.metrics.f1);
  }
  svg::write_bar_chart((fs::path(out_dir) / "ablation.svg").string(),
                       "Augmentation ablation (test metrics)", groups,
                       {acc, prec, rec, f1});
  return rows;
}

// ---------------------------------------------------------------------
// Clustering
// ---------------------------------------------------------------------

ClusterArtifacts run_cluster(const std::vector<ManifestRow>& manifest,
                             const PipelineConfig& cfg,
                             const std::string& out_dir) {
  ensure_dir(out_dir);
  const LabeledDataset all =
      build_dataset(manifest, cfg.spectral, cfg.activity);
  LabeledDataset coughs;
  coughs.feature_dim = all.feature_dim;
  for (const auto& row : all.rows) {
    if (row.label == 1) coughs.rows.push_back(row);
  }
  if (coughs.rows.empty()) {
    throw TooFewPoints("no cough rows to cluster");
  }

  // All rows default to the training split here, so the scaler sees
  // every cough clip.
  const Standardizer scaler = fit_standardizer(coughs);
  std::vector<std::vector<double>> points;
  points.reserve(coughs.rows.size());
  for (const auto& row : coughs.rows) points.push_back(scaler.apply(row.features));

  const uint64_t cluster_seed = Rng::derive(cfg.seed, seed_stream::kCluster);
  ClusterArtifacts art;
  art.elbow = elbow_curve(points, cfg.elbow_k_min, cfg.elbow_k_max,
                          cfg.cluster, cluster_seed);
  art.selection = select_k(points, cfg.cluster_k_min, cfg.cluster_k_max,
                           cfg.cluster, cluster_seed);
  KMeansConfig chosen = cfg.cluster;
  chosen.k = art.selection.k;
  art.clustering = kmeans(
      points, chosen,
      Rng::derive(cluster_seed, static_cast<uint64_t>(art.selection.k)));
  for (const auto& row : coughs.rows) {
    art.clip_ids.push_back(row.clip_id);
    art.burst_counts.push_back(row.burst_count.value_or(0));
  }

  // elbow.csv + charts
  std::ostringstream csv;
  csv << "k,wcss\n";
  csv.precision(17);
  for (const auto& p : art.elbow) csv << p.k << ',' << p.wcss << "\n";
  write_text_file((fs::path(out_dir) / "elbow.csv").string(), csv.str());

  svg::Series elbow_series{"wcss", {}};
  for (const auto& p : art.elbow) {
    elbow_series.points.emplace_back(p.k, p.wcss);
  }
  svg::write_line_chart((fs::path(out_dir) / "elbow.svg").string(),
                        "Elbow curve", "k", "within-cluster SS",
                        {elbow_series});
  svg::Series sil_series{"mean silhouette", {}};
  for (const auto& p : art.selection.per_k) {
    sil_series.points.emplace_back(p.k, p.silhouette);
  }
  svg::write_line_chart((fs::path(out_dir) / "silhouette.svg").string(),
                        "Silhouette by k", "k", "mean silhouette",
                        {sil_series});

  json j;
  j["selected_k"] = art.selection.k;
  j["best_silhouette"] = art.selection.silhouette;
  j["silhouette"] = json::array();
  for (const auto& p : art.selection.per_k) {
    j["silhouette"].push_back({{"k", p.k}, {"score", p.silhouette}});
  }
  j["elbow"] = json::array();
  for (const auto& p : art.elbow) {
    j["elbow"].push_back({{"k", p.k}, {"wcss", p.wcss}});
  }
  j["wcss"] = art.clustering.wcss;
  j["iterations"] = art.clustering.iterations;
  j["restart"] = art.clustering.restart;
  std::vector<size_t> sizes(static_cast<size_t>(art.selection.k), 0);
  for (int c : art.clustering.assignment) sizes[static_cast<size_t>(c)] += 1;
  j["cluster_sizes"] = sizes;
  j["assignments"] = json::array();
  for (size_t i = 0; i < art.clip_ids.size(); ++i) {
    json row = {{"clip_id", art.clip_ids[i]},
                {"cluster", art.clustering.assignment[i]}};
    if (art.burst_counts[i] > 0) row["burst_count"] = art.burst_counts[i];
    j["assignments"].push_back(row);
  }
  art.report_path = (fs::path(out_dir) / "cluster_report.json").string();
  write_text_file(art.report_path, j.dump(2) + "\n");
  return art;
}

// ---------------------------------------------------------------------
// Augment export
// ---------------------------------------------------------------------

AugmentSummary run_augment(const std::vector<ManifestRow>& manifest,
                           const PipelineConfig& cfg,
                           const std::string& out_dir) {
  ensure_dir(out_dir);
  DecodeReport decoded = decode_manifest(manifest, cfg.activity);

  std::vector<AudioClip> coughs;
  std::unordered_map<std::string, const ManifestRow*> meta_by_id;
  std::vector<ManifestRow> out_rows;
  for (auto& d : decoded.clips) {
    d.clip.id = d.row.path;
    meta_by_id[d.row.path] = &d.row;
    ManifestRow original = d.row;
    original.path = fs::absolute(d.row.path).string();
    out_rows.push_back(std::move(original));
    if (d.row.label == 1) coughs.push_back(d.clip);
  }

  AugmentSummary summary;
  summary.n_cough_inputs = coughs.size();
  if (!coughs.empty()) {
    const uint64_t aug_seed = Rng::derive(cfg.seed, seed_stream::kAugment);
    size_t index = 0;
    for (const auto& aug : expand_cough_set(coughs, cfg.augment, aug_seed)) {
      if (aug.provenance == Provenance::kOriginal) continue;
      const ManifestRow& origin = *meta_by_id.at(aug.origin_id);
      const std::string name = "aug_" + std::to_string(index++) + "_" +
                               fs::path(origin.path).stem().string() + "_" +
                               provenance_name(aug.provenance) + ".wav";
      write_wav(aug.clip, (fs::path(out_dir) / name).string());
      ManifestRow row = origin;
      row.path = name;  // relative to the manifest written below
      out_rows.push_back(std::move(row));
      summary.n_written += 1;
    }
  }

  summary.manifest_path = (fs::path(out_dir) / "manifest.csv").string();
  write_manifest(out_rows, summary.manifest_path);
  return summary;
}

// ---------------------------------------------------------------------
// Scanning
// ---------------------------------------------------------------------

std::vector<ScanEvent> scan_clip(const AudioClip& clip,
                                 const LoadedModel& model,
                                 const PipelineConfig& cfg) {
  if (!model.scaler.has_value()) {
    throw PreconditionError("scanning needs a weight file with a scaler");
  }
  const FeatureScaler& sc = *model.scaler;
  const auto rate = static_cast<double>(clip.sample_rate);
  const auto win = static_cast<size_t>(
      std::llround(cfg.scan_window_s * rate));
  const auto hop =
      std::max<size_t>(1, static_cast<size_t>(std::llround(
                              cfg.scan_hop_s * rate)));
  if (clip.samples.empty()) throw EmptyAudio("cannot scan an empty clip");

  std::vector<size_t> starts;
  std::vector<size_t> lengths;
  if (clip.samples.size() <= win) {
    starts.push_back(0);
    lengths.push_back(clip.samples.size());
  } else {
    for (size_t s = 0; s + win <= clip.samples.size(); s += hop) {
      starts.push_back(s);
      lengths.push_back(win);
    }
  }

  std::vector<std::vector<double>> x;
  x.reserve(starts.size());
  for (size_t w = 0; w < starts.size(); ++w) {
    AudioClip window;
    window.sample_rate = clip.sample_rate;
    window.id = clip.id + "@" + std::to_string(starts[w]);
    window.samples.assign(
        clip.samples.begin() + static_cast<ptrdiff_t>(starts[w]),
        clip.samples.begin() + static_cast<ptrdiff_t>(starts[w] + lengths[w]));
    std::vector<double> f = extract_features(window, cfg.spectral);
    if (f.size() != sc.mean.size()) {
      throw ArchitectureMismatch("scan features do not match the model");
    }
    for (size_t i = 0; i < f.size(); ++i) {
      f[i] = (f[i] - sc.mean[i]) / sc.sd[i];
    }
    x.push_back(std::move(f));
  }

  const std::vector<double> probs = forward_eval(model.params, cfg.cnn, x);

  std::vector<ScanEvent> events;
  for (size_t w = 0; w < probs.size(); ++w) {
    if (probs[w] < cfg.threshold) continue;
    const double start_s = static_cast<double>(starts[w]) / rate;
    const double end_s =
        static_cast<double>(starts[w] + lengths[w]) / rate;
    const bool merge =
        !events.empty() && w > 0 && probs[w - 1] >= cfg.threshold;
    if (merge) {
      events.back().end_s = end_s;
      events.back().max_prob = std::max(events.back().max_prob, probs[w]);
    } else {
      events.push_back({start_s, end_s, probs[w]});
    }
  }
  return events;
}

std::vector<ScanEvent> run_scan(const std::string& wav_path,
                                const std::string& weights_path,
                                const PipelineConfig& cfg,
                                const std::string& out_path) {
  const AudioClip clip = load_canonical(wav_path);
  const LoadedModel model = load_weights(weights_path, cfg.cnn);
  const std::vector<ScanEvent> events = scan_clip(clip, model, cfg);

  json j;
  j["clip"] = wav_path;
  j["window_s"] = cfg.scan_window_s;
  j["hop_s"] = cfg.scan_hop_s;
  j["threshold"] = cfg.threshold;
  j["events"] = json::array();
  for (const auto& e : events) {
    j["events"].push_back({{"start_s", e.start_s},
                           {"end_s", e.end_s},
                           {"max_prob", e.max_prob}});
  }
  write_text_file(out_path, j.dump(2) + "\n");
  return events;
}

// ---------------------------------------------------------------------
// Reporting and synthesis
// ---------------------------------------------------------------------

namespace {

void append_metrics_section(std::ostringstream& md, const fs::path& file) {
  const json j = json::parse(read_text_file(file.string()));
  md << "## Classification metrics\n\n";
  md << "| metric | value |\n|---|---|\n";
  for (const char* key : {"accuracy", "precision", "recall", "f1"}) {
    md << "| " << key << " | " << j.at(key).get<double>() << " |\n";
  }
  const auto& cm = j.at("confusion");
  md << "\nConfusion counts: tp=" << cm.at("tp").get<uint64_t>()
     << ", fp=" << cm.at("fp").get<uint64_t>()
     << ", fn=" << cm.at("fn").get<uint64_t>()
     << ", tn=" << cm.at("tn").get<uint64_t>() << " (model "
     << j.at("model").get<std::string>() << ", seed "
     << j.at("seed").get<uint64_t>() << ").\n\n";
}

void append_ablation_section(std::ostringstream& md, const fs::path& file) {
  std::ifstream f(file);
  std::string line;
  std::getline(f, line);  // header
  md << "## Augmentation ablation\n\n";
  md << "| condition | accuracy | precision | recall | f1 |\n";
  md << "|---|---|---|---|---|\n";
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::string cells = line;
    std::replace(cells.begin(), cells.end(), ',', '|');
    md << "| " << cells << " |\n";
  }
  md << "\n";
}

void append_cluster_section(std::ostringstream& md, const fs::path& file) {
  const json j = json::parse(read_text_file(file.string()));
  md << "## Cough-type clustering\n\n";
  md << "Selected k = " << j.at("selected_k").get<int>()
     << " (mean silhouette " << j.at("best_silhouette").get<double>()
     << ").\n\n| k | mean silhouette |\n|---|---|\n";
  for (const auto& p : j.at("silhouette")) {
    md << "| " << p.at("k").get<int>() << " | "
       << p.at("score").get<double>() << " |\n";
  }
  md << "\n";
}

void append_events_section(std::ostringstream& md, const fs::path& file) {
  const json j = json::parse(read_text_file(file.string()));
  const auto& events = j.at("events");
  md << "## Scan events\n\n" << events.size() << " event(s) in "
     << j.at("clip").get<std::string>() << ".\n\n";
  if (!events.empty()) {
    md << "| start (s) | end (s) | max prob |\n|---|---|---|\n";
    for (const auto& e : events) {
      md << "| " << e.at("start_s").get<double>() << " | "
         << e.at("end_s").get<double>() << " | "
         << e.at("max_prob").get<double>() << " |\n";
    }
    md << "\n";
  }
}

}  // namespace

std::string run_report(const std::string& dir) {
  std::ostringstream md;
  md << "# Run report\n\n";
  bool any = false;

  const fs::path base(dir);
  if (fs::exists(base / "metrics.json")) {
    append_metrics_section(md, base / "metrics.json");
    any = true;
  }
  if (fs::exists(base / "ablation.csv")) {
    append_ablation_section(md, base / "ablation.csv");
    any = true;
  }
  if (fs::exists(base / "cluster_report.json")) {
    append_cluster_section(md, base / "cluster_report.json");
    any = true;
  }
  if (fs::exists(base / "events.json")) {
    append_events_section(md, base / "events.json");
    any = true;
  }
  if (!any) {
    throw IoFailure("no artifacts (metrics.json, ablation.csv, "
                    "cluster_report.json, events.json) found under " +
                    dir);
  }

  const std::string out = (base / "report.md").string();
  write_text_file(out, md.str());
  return out;
}

CorpusSummary run_synth(const std::string& out_dir,
                        const PipelineConfig& cfg) {
  return gen_corpus(out_dir, cfg.corpus, cfg.seed);
}

}  // namespace coughpipe
