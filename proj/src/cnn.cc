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

#include "coughpipe/cnn.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "coughpipe/errors.h"

namespace coughpipe {
namespace {

constexpr double kProbClamp = 1e-7;
constexpr char kMagic[4] = {'C', 'P', 'W', '1'};
constexpr uint32_t kFormatVersion = 1;

void check_scalars(const CnnConfig& cfg) {
  if (cfg.input_len <= 0) throw PreconditionError("input_len must be > 0");
  if (cfg.kernel <= 0) throw PreconditionError("kernel must be > 0");
  if (cfg.pool <= 0) throw PreconditionError("pool must be > 0");
  for (int f : cfg.conv_filters) {
    if (f <= 0) throw PreconditionError("conv filters must be > 0");
  }
  for (int u : cfg.dense_units) {
    if (u <= 0) throw PreconditionError("dense units must be > 0");
  }
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0) {
    throw PreconditionError("dropout_rate must lie in [0, 1)");
  }
  if (cfg.batch_size <= 0) throw PreconditionError("batch_size must be > 0");
  if (cfg.max_epochs <= 0) throw PreconditionError("max_epochs must be > 0");
  if (cfg.patience <= 0) throw PreconditionError("patience must be > 0");
  if (cfg.positive_weight <= 0.0) {
    throw PreconditionError("positive_weight must be > 0");
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Packs a batch of rows into one contiguous [batch, input_len] buffer.
std::vector<double> pack_batch(const std::vector<std::vector<double>>& batch,
                               int input_len) {
  if (batch.empty()) throw PreconditionError("empty batch");
  std::vector<double> packed(batch.size() * static_cast<size_t>(input_len));
  for (size_t b = 0; b < batch.size(); ++b) {
    if (batch[b].size() != static_cast<size_t>(input_len)) {
      throw ShapeMismatch("batch row " + std::to_string(b) + " has " +
                          std::to_string(batch[b].size()) +
                          " features, model expects " +
                          std::to_string(input_len));
    }
    std::copy(batch[b].begin(), batch[b].end(),
              packed.begin() + b * static_cast<size_t>(input_len));
  }
  return packed;
}

// out[b,t,o] = bias[o] + sum_{k,c} in[b,t+k,c] * w[k,c,o]
void conv_forward(const std::vector<double>& in, size_t batch, int len,
                  int c_in, const std::vector<double>& w,
                  const std::vector<double>& bias, int kernel, int c_out,
                  std::vector<double>& out) {
  const int t_out = len - kernel + 1;
  out.assign(batch * static_cast<size_t>(t_out) * c_out, 0.0);
  for (size_t b = 0; b < batch; ++b) {
    const double* in_base = in.data() + b * static_cast<size_t>(len) * c_in;
    double* out_base = out.data() + b * static_cast<size_t>(t_out) * c_out;
    for (int t = 0; t < t_out; ++t) {
      double* out_row = out_base + static_cast<size_t>(t) * c_out;
      for (int o = 0; o < c_out; ++o) out_row[o] = bias[o];
      for (int k = 0; k < kernel; ++k) {
        const double* in_row = in_base + static_cast<size_t>(t + k) * c_in;
        for (int c = 0; c < c_in; ++c) {
          const double a = in_row[c];
          const double* w_row =
              w.data() + (static_cast<size_t>(k) * c_in + c) * c_out;
          for (int o = 0; o < c_out; ++o) out_row[o] += a * w_row[o];
        }
      }
    }
  }
}

// Max pooling over relu(pre), recording which window offset won.
void relu_pool_forward(const std::vector<double>& pre, size_t batch, int t_in,
                       int channels, int pool, std::vector<double>& out,
                       std::vector<uint8_t>& arg) {
  const int t_out = t_in / pool;
  out.assign(batch * static_cast<size_t>(t_out) * channels, 0.0);
  arg.assign(out.size(), 0);
  for (size_t b = 0; b < batch; ++b) {
    const double* pre_base = pre.data() + b * static_cast<size_t>(t_in) * channels;
    double* out_base = out.data() + b * static_cast<size_t>(t_out) * channels;
    uint8_t* arg_base = arg.data() + b * static_cast<size_t>(t_out) * channels;
    for (int t = 0; t < t_out; ++t) {
      for (int o = 0; o < channels; ++o) {
        double best = std::max(pre_base[static_cast<size_t>(t * pool) * channels + o], 0.0);
        uint8_t best_k = 0;
        for (int k = 1; k < pool; ++k) {
          const double v = std::max(
              pre_base[static_cast<size_t>(t * pool + k) * channels + o], 0.0);
          if (v > best) {
            best = v;
            best_k = static_cast<uint8_t>(k);
          }
        }
        out_base[static_cast<size_t>(t) * channels + o] = best;
        arg_base[static_cast<size_t>(t) * channels + o] = best_k;
      }
    }
  }
}

// pre[b,o] = bias[o] + sum_i in[b,i] * w[i,o]
void dense_forward(const std::vector<double>& in, size_t batch, int n_in,
                   const std::vector<double>& w, const std::vector<double>& bias,
                   int n_out, std::vector<double>& pre) {
  pre.assign(batch * static_cast<size_t>(n_out), 0.0);
  for (size_t b = 0; b < batch; ++b) {
    const double* in_row = in.data() + b * static_cast<size_t>(n_in);
    double* out_row = pre.data() + b * static_cast<size_t>(n_out);
    for (int o = 0; o < n_out; ++o) out_row[o] = bias[o];
    for (int i = 0; i < n_in; ++i) {
      const double a = in_row[i];
      const double* w_row = w.data() + static_cast<size_t>(i) * n_out;
      for (int o = 0; o < n_out; ++o) out_row[o] += a * w_row[o];
    }
  }
}

void apply_dropout(const std::vector<double>& in,
                   const std::vector<uint8_t>& keep, double rate,
                   std::vector<double>& out) {
  out.resize(in.size());
  if (rate <= 0.0) {
    out = in;
    return;
  }
  const double scale = 1.0 / (1.0 - rate);
  for (size_t i = 0; i < in.size(); ++i) {
    out[i] = keep[i] ? in[i] * scale : 0.0;
  }
}

}  // namespace

CnnDims compute_dims(const CnnConfig& cfg) {
  check_scalars(cfg);
  CnnDims dims;
  int len = cfg.input_len;
  int channels = 1;
  for (int s = 0; s < 4; ++s) {
    dims.conv_in_len[s] = len;
    dims.in_channels[s] = channels;
    const int conv_out = len - cfg.kernel + 1;
    if (conv_out < cfg.pool) {
      throw ShapeMismatch(
          "stage " + std::to_string(s + 1) + " output length " +
          std::to_string(conv_out) + " cannot be pooled by " +
          std::to_string(cfg.pool) + "; input_len " +
          std::to_string(cfg.input_len) + " is too short for this stack");
    }
    dims.conv_out_len[s] = conv_out;
    dims.pool_out_len[s] = conv_out / cfg.pool;
    len = dims.pool_out_len[s];
    channels = cfg.conv_filters[s];
  }
  dims.flat_dim = len * channels;
  return dims;
}

std::vector<LayerShape> architecture_audit(const CnnConfig& cfg) {
  const CnnDims dims = compute_dims(cfg);
  std::vector<LayerShape> table;
  for (int s = 0; s < 4; ++s) {
    const int64_t params =
        static_cast<int64_t>(cfg.kernel) * dims.in_channels[s] *
            cfg.conv_filters[s] +
        cfg.conv_filters[s];
    table.push_back({"conv1d_" + std::to_string(s + 1), dims.conv_out_len[s],
                     cfg.conv_filters[s], params});
    table.push_back({"max_pooling1d_" + std::to_string(s + 1),
                     dims.pool_out_len[s], cfg.conv_filters[s], 0});
  }
  table.push_back({"flatten", dims.flat_dim, 1, 0});
  int in_dim = dims.flat_dim;
  const int units[3] = {cfg.dense_units[0], cfg.dense_units[1], 1};
  for (int s = 0; s < 3; ++s) {
    table.push_back({"dropout_" + std::to_string(s + 1), in_dim, 1, 0});
    table.push_back({"dense_" + std::to_string(s + 1), units[s], 1,
                     static_cast<int64_t>(in_dim) * units[s] + units[s]});
    in_dim = units[s];
  }
  return table;
}

int64_t total_param_count(const CnnConfig& cfg) {
  int64_t total = 0;
  for (const auto& layer : architecture_audit(cfg)) total += layer.param_count;
  return total;
}

std::vector<std::vector<double>*> CnnParameters::tensors() {
  std::vector<std::vector<double>*> t;
  for (int s = 0; s < 4; ++s) {
    t.push_back(&conv_w[s]);
    t.push_back(&conv_b[s]);
  }
  for (int s = 0; s < 3; ++s) {
    t.push_back(&dense_w[s]);
    t.push_back(&dense_b[s]);
  }
  return t;
}

std::vector<const std::vector<double>*> CnnParameters::tensors() const {
  std::vector<const std::vector<double>*> t;
  for (int s = 0; s < 4; ++s) {
    t.push_back(&conv_w[s]);
    t.push_back(&conv_b[s]);
  }
  for (int s = 0; s < 3; ++s) {
    t.push_back(&dense_w[s]);
    t.push_back(&dense_b[s]);
  }
  return t;
}

CnnParameters zeros_like(const CnnConfig& cfg) {
  const CnnDims dims = compute_dims(cfg);
  CnnParameters p;
  for (int s = 0; s < 4; ++s) {
    p.conv_w[s].assign(static_cast<size_t>(cfg.kernel) * dims.in_channels[s] *
                           cfg.conv_filters[s],
                       0.0);
    p.conv_b[s].assign(static_cast<size_t>(cfg.conv_filters[s]), 0.0);
  }
  int in_dim = dims.flat_dim;
  const int units[3] = {cfg.dense_units[0], cfg.dense_units[1], 1};
  for (int s = 0; s < 3; ++s) {
    p.dense_w[s].assign(static_cast<size_t>(in_dim) * units[s], 0.0);
    p.dense_b[s].assign(static_cast<size_t>(units[s]), 0.0);
    in_dim = units[s];
  }
  return p;
}

CnnParameters init_params(const CnnConfig& cfg, Rng& rng) {
  const CnnDims dims = compute_dims(cfg);
  CnnParameters p = zeros_like(cfg);
  for (int s = 0; s < 4; ++s) {
    const double fan_in = static_cast<double>(cfg.kernel) * dims.in_channels[s];
    const double fan_out =
        static_cast<double>(cfg.kernel) * cfg.conv_filters[s];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : p.conv_w[s]) w = rng.uniform(-limit, limit);
  }
  int in_dim = dims.flat_dim;
  const int units[3] = {cfg.dense_units[0], cfg.dense_units[1], 1};
  for (int s = 0; s < 3; ++s) {
    const double limit =
        std::sqrt(6.0 / (static_cast<double>(in_dim) + units[s]));
    for (double& w : p.dense_w[s]) w = rng.uniform(-limit, limit);
    in_dim = units[s];
  }
  return p;
}

DropoutMasks draw_masks(const CnnConfig& cfg, size_t batch, Rng& rng) {
  const CnnDims dims = compute_dims(cfg);
  const int widths[3] = {dims.flat_dim, cfg.dense_units[0],
                         cfg.dense_units[1]};
  DropoutMasks m;
  for (int j = 0; j < 3; ++j) {
    m.keep[j].resize(batch * static_cast<size_t>(widths[j]));
    for (auto& bit : m.keep[j]) {
      bit = cfg.dropout_rate > 0.0 && rng.uniform() < cfg.dropout_rate ? 0 : 1;
    }
  }
  return m;
}

DropoutMasks full_masks(const CnnConfig& cfg, size_t batch) {
  const CnnDims dims = compute_dims(cfg);
  const int widths[3] = {dims.flat_dim, cfg.dense_units[0],
                         cfg.dense_units[1]};
  DropoutMasks m;
  for (int j = 0; j < 3; ++j) {
    m.keep[j].assign(batch * static_cast<size_t>(widths[j]), 1);
  }
  return m;
}

ForwardCache forward_masked(const CnnParameters& params, const CnnConfig& cfg,
                            const std::vector<std::vector<double>>& batch,
                            const DropoutMasks& masks) {
  const CnnDims dims = compute_dims(cfg);
  ForwardCache cache;
  cache.batch = batch.size();
  cache.masks = masks;
  cache.stage_in[0] = pack_batch(batch, cfg.input_len);

  for (int s = 0; s < 4; ++s) {
    conv_forward(cache.stage_in[s], cache.batch, dims.conv_in_len[s],
                 dims.in_channels[s], params.conv_w[s], params.conv_b[s],
                 cfg.kernel, cfg.conv_filters[s], cache.conv_pre[s]);
    std::vector<double>& pooled =
        s < 3 ? cache.stage_in[s + 1] : cache.flat;
    relu_pool_forward(cache.conv_pre[s], cache.batch, dims.conv_out_len[s],
                      cfg.conv_filters[s], cfg.pool, pooled,
                      cache.pool_arg[s]);
  }

  const int units[3] = {cfg.dense_units[0], cfg.dense_units[1], 1};
  const std::vector<double>* current = &cache.flat;
  int in_dim = dims.flat_dim;
  std::vector<double> activated;
  for (int s = 0; s < 3; ++s) {
    apply_dropout(*current, masks.keep[s], cfg.dropout_rate,
                  cache.dense_in[s]);
    dense_forward(cache.dense_in[s], cache.batch, in_dim, params.dense_w[s],
                  params.dense_b[s], units[s], cache.dense_pre[s]);
    if (s < 2) {
      activated.resize(cache.dense_pre[s].size());
      for (size_t i = 0; i < activated.size(); ++i) {
        activated[i] = std::max(cache.dense_pre[s][i], 0.0);
      }
      current = &activated;
      // dense_in[s + 1] is filled from `activated` on the next iteration.
      in_dim = units[s];
    }
  }

  cache.probs.resize(cache.batch);
  for (size_t b = 0; b < cache.batch; ++b) {
    const double z = cache.dense_pre[2][b];
    if (!std::isfinite(z)) {
      throw NonFiniteActivation(
          "non-finite output logit; training has diverged");
    }
    cache.probs[b] = sigmoid(z);
  }
  return cache;
}

ForwardCache forward_train(const CnnParameters& params, const CnnConfig& cfg,
                           const std::vector<std::vector<double>>& batch,
                           Rng& rng) {
  return forward_masked(params, cfg, batch, draw_masks(cfg, batch.size(), rng));
}

std::vector<double> forward_eval(const CnnParameters& params,
                                 const CnnConfig& cfg,
                                 const std::vector<std::vector<double>>& batch) {
  // Evaluation runs in fixed-size chunks; each sample's arithmetic is
  // independent, so chunking cannot change the numbers.
  constexpr size_t kChunk = 64;
  std::vector<double> probs;
  probs.reserve(batch.size());
  for (size_t start = 0; start < batch.size(); start += kChunk) {
    const size_t end = std::min(batch.size(), start + kChunk);
    const std::vector<std::vector<double>> chunk(batch.begin() + start,
                                                 batch.begin() + end);
    CnnConfig eval_cfg = cfg;
    eval_cfg.dropout_rate = 0.0;
    const ForwardCache cache = forward_masked(
        params, eval_cfg, chunk, full_masks(eval_cfg, chunk.size()));
    probs.insert(probs.end(), cache.probs.begin(), cache.probs.end());
  }
  return probs;
}

double bce_loss(const std::vector<double>& probs,
                const std::vector<int>& labels, double positive_weight) {
  if (probs.size() != labels.size()) {
    throw LengthMismatch("bce_loss: " + std::to_string(probs.size()) +
                         " probabilities vs " + std::to_string(labels.size()) +
                         " labels");
  }
  if (probs.empty()) throw PreconditionError("bce_loss: empty input");
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
    if (labels[i] == 1) {
      acc -= positive_weight * std::log(p);
    } else if (labels[i] == 0) {
      acc -= std::log(1.0 - p);
    } else {
      throw PreconditionError("bce_loss: label must be 0 or 1");
    }
  }
  return acc / static_cast<double>(probs.size());
}

CnnParameters backward(const CnnParameters& params, const CnnConfig& cfg,
                       const ForwardCache& cache,
                       const std::vector<int>& labels) {
  if (labels.size() != cache.batch) {
    throw LengthMismatch("backward: label count does not match batch");
  }
  const CnnDims dims = compute_dims(cfg);
  CnnParameters grad = zeros_like(cfg);
  const size_t batch = cache.batch;
  const double inv_b = 1.0 / static_cast<double>(batch);

  // d(loss)/d(logit) of the clamp-free cross entropy.
  std::vector<double> delta(batch);
  for (size_t b = 0; b < batch; ++b) {
    const double p = cache.probs[b];
    delta[b] = labels[b] == 1 ? cfg.positive_weight * (p - 1.0) * inv_b
                              : p * inv_b;
  }

  // Dense stack, output layer first.
  const int units[3] = {cfg.dense_units[0], cfg.dense_units[1], 1};
  const double drop_scale =
      cfg.dropout_rate > 0.0 ? 1.0 / (1.0 - cfg.dropout_rate) : 1.0;
  std::vector<double> d_out = delta;  // gradient at dense_pre[s]
  for (int s = 2; s >= 0; --s) {
    const int n_out = units[s];
    const int n_in = s == 0 ? dims.flat_dim : units[s - 1];
    const std::vector<double>& in = cache.dense_in[s];
    std::vector<double> d_in(batch * static_cast<size_t>(n_in), 0.0);
    for (size_t b = 0; b < batch; ++b) {
      const double* in_row = in.data() + b * static_cast<size_t>(n_in);
      const double* dout_row = d_out.data() + b * static_cast<size_t>(n_out);
      double* din_row = d_in.data() + b * static_cast<size_t>(n_in);
      for (int o = 0; o < n_out; ++o) grad.dense_b[s][o] += dout_row[o];
      for (int i = 0; i < n_in; ++i) {
        const double a = in_row[i];
        double* gw_row = grad.dense_w[s].data() + static_cast<size_t>(i) * n_out;
        const double* w_row =
            params.dense_w[s].data() + static_cast<size_t>(i) * n_out;
        double acc = 0.0;
        for (int o = 0; o < n_out; ++o) {
          gw_row[o] += a * dout_row[o];
          acc += w_row[o] * dout_row[o];
        }
        din_row[i] = acc;
      }
    }
    // Through this layer's input dropout.
    for (size_t i = 0; i < d_in.size(); ++i) {
      d_in[i] = cache.masks.keep[s][i] ? d_in[i] * drop_scale : 0.0;
    }
    if (s > 0) {
      // Through the previous layer's relu.
      for (size_t i = 0; i < d_in.size(); ++i) {
        if (cache.dense_pre[s - 1][i] <= 0.0) d_in[i] = 0.0;
      }
    }
    d_out = std::move(d_in);
  }

  // d_out now sits at the flatten output (= pool4 output).
  std::vector<double> d_pool = std::move(d_out);
  for (int s = 3; s >= 0; --s) {
    const int t_out = dims.pool_out_len[s];
    const int t_conv = dims.conv_out_len[s];
    const int channels = cfg.conv_filters[s];
    // Route pooled gradients to the winning pre-activation when it was
    // positive (relu gate).
    std::vector<double> d_pre(
        batch * static_cast<size_t>(t_conv) * channels, 0.0);
    for (size_t b = 0; b < batch; ++b) {
      const size_t pool_base = b * static_cast<size_t>(t_out) * channels;
      const size_t pre_base = b * static_cast<size_t>(t_conv) * channels;
      for (int t = 0; t < t_out; ++t) {
        for (int o = 0; o < channels; ++o) {
          const size_t pooled_idx = pool_base + static_cast<size_t>(t) * channels + o;
          const int win_t = t * cfg.pool + cache.pool_arg[s][pooled_idx];
          const size_t pre_idx =
              pre_base + static_cast<size_t>(win_t) * channels + o;
          if (cache.conv_pre[s][pre_idx] > 0.0) {
            d_pre[pre_idx] += d_pool[pooled_idx];
          }
        }
      }
    }
    // Conv weight/bias/input gradients.
    const int len = dims.conv_in_len[s];
    const int c_in = dims.in_channels[s];
    const std::vector<double>& in = cache.stage_in[s];
    std::vector<double> d_in(batch * static_cast<size_t>(len) * c_in, 0.0);
    for (size_t b = 0; b < batch; ++b) {
      const double* in_base = in.data() + b * static_cast<size_t>(len) * c_in;
      double* din_base = d_in.data() + b * static_cast<size_t>(len) * c_in;
      const double* dpre_base =
          d_pre.data() + b * static_cast<size_t>(t_conv) * channels;
      for (int t = 0; t < t_conv; ++t) {
        const double* dpre_row = dpre_base + static_cast<size_t>(t) * channels;
        for (int o = 0; o < channels; ++o) grad.conv_b[s][o] += dpre_row[o];
        for (int k = 0; k < cfg.kernel; ++k) {
          const double* in_row = in_base + static_cast<size_t>(t + k) * c_in;
          double* din_row = din_base + static_cast<size_t>(t + k) * c_in;
          for (int c = 0; c < c_in; ++c) {
            const double a = in_row[c];
            double* gw_row = grad.conv_w[s].data() +
                             (static_cast<size_t>(k) * c_in + c) * channels;
            const double* w_row = params.conv_w[s].data() +
                                  (static_cast<size_t>(k) * c_in + c) * channels;
            double acc = 0.0;
            for (int o = 0; o < channels; ++o) {
              gw_row[o] += a * dpre_row[o];
              acc += w_row[o] * dpre_row[o];
            }
            din_row[c] += acc;
          }
        }
      }
    }
    d_pool = std::move(d_in);
  }
  return grad;
}

AdamState init_adam(const CnnConfig& cfg) {
  AdamState st;
  st.m = zeros_like(cfg);
  st.v = zeros_like(cfg);
  st.t = 0;
  return st;
}

void adam_step(CnnParameters& params, const CnnParameters& grad,
               AdamState& state, const CnnConfig& cfg) {
  state.t += 1;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  auto p_tensors = params.tensors();
  auto g_tensors = grad.tensors();
  auto m_tensors = state.m.tensors();
  auto v_tensors = state.v.tensors();
  for (size_t t = 0; t < p_tensors.size(); ++t) {
    std::vector<double>& p = *p_tensors[t];
    const std::vector<double>& g = *g_tensors[t];
    std::vector<double>& m = *m_tensors[t];
    std::vector<double>& v = *v_tensors[t];
    if (p.size() != g.size()) {
      throw ShapeMismatch("adam_step: gradient shape mismatch");
    }
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

TrainReport train(CnnParameters& params, const CnnConfig& cfg,
                  const std::vector<std::vector<double>>& train_x,
                  const std::vector<int>& train_y,
                  const std::vector<std::vector<double>>& val_x,
                  const std::vector<int>& val_y, uint64_t seed) {
  if (train_x.empty() || val_x.empty()) {
    throw PreconditionError("train: empty training or validation split");
  }
  if (train_x.size() != train_y.size() || val_x.size() != val_y.size()) {
    throw LengthMismatch("train: features and labels disagree");
  }

  Rng shuffle_rng(Rng::derive(seed, 1));
  Rng dropout_rng(Rng::derive(seed, 2));
  AdamState adam = init_adam(cfg);

  std::vector<size_t> order(train_x.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainReport report;
  report.best_val_loss = std::numeric_limits<double>::infinity();
  CnnParameters best = params;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(),
                                  start + static_cast<size_t>(cfg.batch_size));
      std::vector<std::vector<double>> bx;
      std::vector<int> by;
      bx.reserve(end - start);
      by.reserve(end - start);
      for (size_t i = start; i < end; ++i) {
        bx.push_back(train_x[order[i]]);
        by.push_back(train_y[order[i]]);
      }
      const ForwardCache cache = forward_train(params, cfg, bx, dropout_rng);
      const double loss = bce_loss(cache.probs, by, cfg.positive_weight);
      if (!std::isfinite(loss)) {
        throw NonFiniteActivation("non-finite training loss at epoch " +
                                  std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(end - start);
      const CnnParameters grad = backward(params, cfg, cache, by);
      adam_step(params, grad, adam, cfg);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(train_x.size());
    const std::vector<double> val_probs = forward_eval(params, cfg, val_x);
    stats.val_loss = bce_loss(val_probs, val_y, cfg.positive_weight);
    if (!std::isfinite(stats.val_loss)) {
      throw NonFiniteActivation("non-finite validation loss at epoch " +
                                std::to_string(epoch));
    }
    report.epochs.push_back(stats);
    report.stopped_epoch = epoch;

    if (stats.val_loss < report.best_val_loss) {
      report.best_val_loss = stats.val_loss;
      report.best_epoch = epoch;
      best = params;
    }
    if (epoch - report.best_epoch >= cfg.patience) break;
  }

  params = best;
  return report;
}

namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  put_u64(out, std::bit_cast<uint64_t>(d));
}

struct Reader {
  const uint8_t* p;
  const uint8_t* end;
  std::string path;

  void need(size_t n) const {
    if (static_cast<size_t>(end - p) < n) {
      throw IoFailure("weight file truncated: " + path);
    }
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    p += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  uint8_t u8() {
    need(1);
    return *p++;
  }
};

std::vector<uint32_t> arch_fields(const CnnConfig& cfg) {
  return {static_cast<uint32_t>(cfg.input_len),
          static_cast<uint32_t>(cfg.kernel),
          static_cast<uint32_t>(cfg.conv_filters[0]),
          static_cast<uint32_t>(cfg.conv_filters[1]),
          static_cast<uint32_t>(cfg.conv_filters[2]),
          static_cast<uint32_t>(cfg.conv_filters[3]),
          static_cast<uint32_t>(cfg.pool),
          static_cast<uint32_t>(cfg.dense_units[0]),
          static_cast<uint32_t>(cfg.dense_units[1])};
}

uint64_t arch_hash(const CnnConfig& cfg) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (uint32_t field : arch_fields(cfg)) {
    for (int i = 0; i < 4; ++i) {
      h ^= (field >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace

void save_weights(const CnnParameters& params, const CnnConfig& cfg,
                  const std::string& path,
                  const std::optional<FeatureScaler>& scaler) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u64(out, arch_hash(cfg));
  for (uint32_t field : arch_fields(cfg)) put_u32(out, field);
  for (const auto* tensor : params.tensors()) {
    put_u64(out, tensor->size());
    for (double v : *tensor) put_f64(out, v);
  }
  out.push_back(scaler.has_value() ? 1 : 0);
  if (scaler.has_value()) {
    if (scaler->mean.size() != scaler->sd.size()) {
      throw PreconditionError("feature scaler mean/sd length mismatch");
    }
    put_u64(out, scaler->mean.size());
    for (double v : scaler->mean) put_f64(out, v);
    for (double v : scaler->sd) put_f64(out, v);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoFailure("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f.good()) throw IoFailure("write failed: " + path);
}

LoadedModel load_weights(const std::string& path, const CnnConfig& cfg) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());

  Reader r{reinterpret_cast<const uint8_t*>(bytes.data()),
           reinterpret_cast<const uint8_t*>(bytes.data()) + bytes.size(),
           path};
  r.need(4);
  if (std::memcmp(r.p, kMagic, 4) != 0) {
    throw IoFailure("not a weight file (bad magic): " + path);
  }
  r.p += 4;
  const uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw IoFailure("unsupported weight format version " +
                    std::to_string(version) + ": " + path);
  }
  const uint64_t stored_hash = r.u64();
  std::vector<uint32_t> stored_fields(9);
  for (auto& field : stored_fields) field = r.u32();
  if (stored_hash != arch_hash(cfg) || stored_fields != arch_fields(cfg)) {
    throw ArchitectureMismatch(
        "weight file was written for a different architecture: " + path);
  }

  LoadedModel model;
  model.params = zeros_like(cfg);
  for (auto* tensor : model.params.tensors()) {
    const uint64_t n = r.u64();
    if (n != tensor->size()) {
      throw ArchitectureMismatch("tensor size mismatch in " + path);
    }
    for (auto& v : *tensor) v = r.f64();
  }
  if (r.u8() == 1) {
    FeatureScaler scaler;
    const uint64_t n = r.u64();
    scaler.mean.resize(n);
    scaler.sd.resize(n);
    for (auto& v : scaler.mean) v = r.f64();
    for (auto& v : scaler.sd) v = r.f64();
    model.scaler = std::move(scaler);
  }
  return model;
}

}  // namespace coughpipe
