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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coughpipe/errors.h"
#include "coughpipe/pipeline.h"

namespace {

// Exit codes: 0 success, 1 unexpected, 2 configuration/usage,
// 3 data problems, 4 numerical divergence during training.
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDiverged = 4;

struct GlobalOptions {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_given = false;
  std::string activity;
};

coughpipe::PipelineConfig make_config(const GlobalOptions& g) {
  coughpipe::PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = coughpipe::load_config(g.config_path);
  if (g.seed_given) cfg.seed = g.seed;
  if (!g.activity.empty()) {
    try {
      cfg.activity = coughpipe::activity_filter_from_name(g.activity);
    } catch (const coughpipe::Error& e) {
      throw coughpipe::ConfigError(e.what());
    }
  }
  return cfg;
}

std::vector<coughpipe::ManifestRow> manifest_for(const std::string& path) {
  return coughpipe::load_manifest(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cough detection and cough-type clustering pipeline"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path,
                 "JSON configuration file (defaults apply when omitted)");
  auto* seed_opt =
      app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--activity", g.activity,
                 "Row filter: all, walking or non-walking");

  std::string manifest_path, out_path, weights_path, wav_path;
  std::string model_name = "cnn", augment_name = "noise_interp";

  auto* synth = app.add_subcommand("synth", "Generate the synthetic corpus");
  synth->add_option("--out", out_path, "Output directory")->required();

  auto* features =
      app.add_subcommand("features", "Extract per-clip features to CSV");
  features->add_option("--manifest", manifest_path, "Manifest CSV")
      ->required();
  features->add_option("--out", out_path, "Output CSV file")->required();

  auto* augment =
      app.add_subcommand("augment", "Write the augmented cough set as WAVs");
  augment->add_option("--manifest", manifest_path, "Manifest CSV")
      ->required();
  augment->add_option("--out", out_path, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a model and report");
  train->add_option("--manifest", manifest_path, "Manifest CSV")->required();
  train->add_option("--out", out_path, "Output directory")->required();
  train->add_option("--model", model_name, "cnn or forest")
      ->check(CLI::IsMember({"cnn", "forest"}));
  train->add_option("--augment-mode", augment_name,
                    "original, noise or noise_interp")
      ->check(CLI::IsMember({"original", "noise", "noise_interp"}));

  auto* eval = app.add_subcommand("eval", "Score a manifest with a model");
  eval->add_option("--manifest", manifest_path, "Manifest CSV")->required();
  eval->add_option("--weights", weights_path, "Weight file")->required();
  eval->add_option("--out", out_path, "Output directory")->required();

  auto* ablation = app.add_subcommand(
      "ablation", "Train once per augmentation condition and compare");
  ablation->add_option("--manifest", manifest_path, "Manifest CSV")
      ->required();
  ablation->add_option("--out", out_path, "Output directory")->required();

  auto* cluster =
      app.add_subcommand("cluster", "Cluster cough clips by type");
  cluster->add_option("--manifest", manifest_path, "Manifest CSV")
      ->required();
  cluster->add_option("--out", out_path, "Output directory")->required();

  auto* scan = app.add_subcommand("scan", "Find cough events in one WAV");
  scan->add_option("--wav", wav_path, "Audio file to scan")->required();
  scan->add_option("--weights", weights_path, "Weight file")->required();
  scan->add_option("--out", out_path, "Output events JSON")->required();

  auto* report = app.add_subcommand(
      "report", "Summarize the artifacts in a directory as Markdown");
  report->add_option("--out", out_path, "Directory holding the artifacts")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    const coughpipe::PipelineConfig cfg = make_config(g);

    if (synth->parsed()) {
      const auto summary = coughpipe::run_synth(out_path, cfg);
      std::cout << "wrote " << summary.n_cough << " cough and "
                << summary.n_background << " background clips; manifest at "
                << summary.manifest_path << "\n";
    } else if (features->parsed()) {
      const auto rows = manifest_for(manifest_path);
      const auto ds =
          coughpipe::build_dataset(rows, cfg.spectral, cfg.activity);
      coughpipe::write_dataset_csv(ds, out_path);
      std::cout << "wrote " << ds.rows.size() << " feature rows ("
                << ds.failures.size() << " failures) to " << out_path
                << "\n";
    } else if (augment->parsed()) {
      const auto summary =
          coughpipe::run_augment(manifest_for(manifest_path), cfg, out_path);
      std::cout << "expanded " << summary.n_cough_inputs << " coughs into "
                << summary.n_written << " new clips; manifest at "
                << summary.manifest_path << "\n";
    } else if (train->parsed()) {
      const auto res = coughpipe::run_train(
          manifest_for(manifest_path), cfg,
          coughpipe::model_kind_from_name(model_name),
          coughpipe::augment_mode_from_name(augment_name), out_path);
      std::cout << "test accuracy " << res.test_metrics.accuracy << ", f1 "
                << res.test_metrics.f1 << "; metrics at " << res.metrics_path
                << "\n";
    } else if (eval->parsed()) {
      const auto m = coughpipe::run_eval(manifest_for(manifest_path), cfg,
                                         weights_path, out_path);
      std::cout << "accuracy " << m.accuracy << ", f1 " << m.f1
                << "; metrics written to " << out_path << "\n";
    } else if (ablation->parsed()) {
      const auto rows =
          coughpipe::run_ablation(manifest_for(manifest_path), cfg, out_path);
      for (const auto& row : rows) {
        std::cout << coughpipe::augment_mode_name(row.mode) << ": f1 "
                  << row.metrics.f1 << "\n";
      }
    } else if (cluster->parsed()) {
      const auto art =
          coughpipe::run_cluster(manifest_for(manifest_path), cfg, out_path);
      std::cout << "selected k = " << art.selection.k
                << " (mean silhouette " << art.selection.silhouette
                << "); report at " << art.report_path << "\n";
    } else if (scan->parsed()) {
      const auto events =
          coughpipe::run_scan(wav_path, weights_path, cfg, out_path);
      std::cout << events.size() << " event(s); written to " << out_path
                << "\n";
    } else if (report->parsed()) {
      const std::string path = coughpipe::run_report(out_path);
      std::cout << "report written to " << path << "\n";
    }
    return 0;
  } catch (const coughpipe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const coughpipe::NonFiniteActivation& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const coughpipe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitUnexpected;
  }
}
