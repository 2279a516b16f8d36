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

#ifndef COUGHPIPE_CNN_H_
#define COUGHPIPE_CNN_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coughpipe/rng.h"

namespace coughpipe {

// One-dimensional convolutional binary classifier:
//   [conv(kernel 3, valid) -> relu -> maxpool(2)] x 4
//   -> flatten -> dropout -> dense -> relu -> dropout
//   -> dense -> relu -> dropout -> dense(1) -> sigmoid.
// All arithmetic is double precision.
struct CnnConfig {
  int input_len = 80;
  int kernel = 3;
  std::array<int, 4> conv_filters = {128, 64, 32, 16};
  int pool = 2;
  std::array<int, 2> dense_units = {64, 32};
  double dropout_rate = 0.3;

  // Optimiser and schedule.
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 1000;
  int patience = 100;  // epochs without val-loss improvement before halting
  // Multiplier on the positive-class term of the loss.
  double positive_weight = 1.0;
};

// Static shape chain for a config; computed once and reused everywhere.
struct CnnDims {
  std::array<int, 4> conv_in_len;
  std::array<int, 4> conv_out_len;
  std::array<int, 4> pool_out_len;
  std::array<int, 4> in_channels;
  int flat_dim = 0;
};

// Validates that every layer keeps a positive length and returns the
// chain. Throws ShapeMismatch when the input is too short for the stack.
CnnDims compute_dims(const CnnConfig& cfg);

// One row of the architecture audit table.
struct LayerShape {
  std::string name;
  int out_len = 0;       // time axis (or unit count for flat layers)
  int out_channels = 0;  // 1 for flat layers
  int64_t param_count = 0;
};

// The full layer table with output shapes and learnable parameter counts.
std::vector<LayerShape> architecture_audit(const CnnConfig& cfg);

int64_t total_param_count(const CnnConfig& cfg);

// Learnable parameters. Conv weights are [kernel][in][out] flattened with
// out fastest; dense weights are [in][out] with out fastest.
struct CnnParameters {
  std::array<std::vector<double>, 4> conv_w;
  std::array<std::vector<double>, 4> conv_b;
  std::array<std::vector<double>, 3> dense_w;
  std::array<std::vector<double>, 3> dense_b;

  // The 14 tensors in declared order (conv_w0, conv_b0, ..., dense_b2).
  std::vector<std::vector<double>*> tensors();
  std::vector<const std::vector<double>*> tensors() const;
};

// Glorot-uniform weights, zero biases.
CnnParameters init_params(const CnnConfig& cfg, Rng& rng);

// Zero-filled parameters with the same shapes (gradient holder).
CnnParameters zeros_like(const CnnConfig& cfg);

// Dropout keep masks for one batch, one entry per unit; the same shapes
// as the three dropped activations.
struct DropoutMasks {
  std::array<std::vector<uint8_t>, 3> keep;
};

DropoutMasks draw_masks(const CnnConfig& cfg, size_t batch, Rng& rng);
DropoutMasks full_masks(const CnnConfig& cfg, size_t batch);  // keep all

// Everything the backward pass needs. Activations are stored batch-major.
struct ForwardCache {
  size_t batch = 0;
  std::array<std::vector<double>, 4> stage_in;   // input to conv i
  std::array<std::vector<double>, 4> conv_pre;   // pre-relu conv output
  std::array<std::vector<uint8_t>, 4> pool_arg;  // winner offset per output
  std::vector<double> flat;                      // pool4 output, flattened
  DropoutMasks masks;
  std::array<std::vector<double>, 3> dense_in;   // post-dropout inputs
  std::array<std::vector<double>, 3> dense_pre;  // pre-activation outputs
  std::vector<double> probs;
};

// Training-mode forward pass with the given dropout masks. Kept units are
// scaled by 1/(1 - rate) so evaluation needs no rescaling.
//
// Throws ShapeMismatch, NonFiniteActivation.
ForwardCache forward_masked(const CnnParameters& params, const CnnConfig& cfg,
                            const std::vector<std::vector<double>>& batch,
                            const DropoutMasks& masks);

// Training-mode forward pass that draws fresh masks from the rng.
ForwardCache forward_train(const CnnParameters& params, const CnnConfig& cfg,
                           const std::vector<std::vector<double>>& batch,
                           Rng& rng);

// Inference-mode probabilities (dropout disabled).
std::vector<double> forward_eval(const CnnParameters& params,
                                 const CnnConfig& cfg,
                                 const std::vector<std::vector<double>>& batch);

// Mean binary cross-entropy with probabilities clamped to
// [1e-7, 1 - 1e-7] inside the logs. positive_weight scales the y = 1 term.
//
// Throws LengthMismatch, PreconditionError.
double bce_loss(const std::vector<double>& probs,
                const std::vector<int>& labels, double positive_weight = 1.0);

// Exact reverse-mode gradient of bce_loss over the cached forward pass,
// holding the dropout masks fixed.
CnnParameters backward(const CnnParameters& params, const CnnConfig& cfg,
                       const ForwardCache& cache,
                       const std::vector<int>& labels);

// Adam optimiser state (first and second moments plus the step counter).
struct AdamState {
  CnnParameters m;
  CnnParameters v;
  int64_t t = 0;
};

AdamState init_adam(const CnnConfig& cfg);

// One bias-corrected Adam update:
//   theta -= lr * m_hat / (sqrt(v_hat) + epsilon).
void adam_step(CnnParameters& params, const CnnParameters& grad,
               AdamState& state, const CnnConfig& cfg);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;     // 1-based epoch whose weights were kept
  int stopped_epoch = 0;  // last epoch that ran
  double best_val_loss = 0.0;
};

// Mini-batch training with early stopping: runs at most max_epochs, halts
// once the validation loss has not strictly improved for `patience`
// epochs, and restores the parameters of the best epoch. The seed drives
// both the shuffle order and the dropout streams.
//
// Throws PreconditionError (empty split), LengthMismatch (feature and
// label counts disagree), NonFiniteActivation (divergence).
TrainReport train(CnnParameters& params, const CnnConfig& cfg,
                  const std::vector<std::vector<double>>& train_x,
                  const std::vector<int>& train_y,
                  const std::vector<std::vector<double>>& val_x,
                  const std::vector<int>& val_y, uint64_t seed);

// Feature scaling carried along with the weights so a saved model can be
// applied to raw features.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> sd;
};

// Versioned binary weight file: magic, format version, architecture hash
// and fields, then each tensor as a little-endian count and raw
// little-endian doubles, then the optional feature scaler. Loading a file
// whose architecture differs from `cfg` fails.
//
// Throws IoFailure (unreadable, truncated, bad magic),
// ArchitectureMismatch.
void save_weights(const CnnParameters& params, const CnnConfig& cfg,
                  const std::string& path,
                  const std::optional<FeatureScaler>& scaler = std::nullopt);

struct LoadedModel {
  CnnParameters params;
  std::optional<FeatureScaler> scaler;
};

LoadedModel load_weights(const std::string& path, const CnnConfig& cfg);

}  // namespace coughpipe

#endif  // COUGHPIPE_CNN_H_
