// Copyright 2026 The escolm Authors.
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

#include "escolm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "escolm/errors.hpp"
#include "escolm/kernels.hpp"

namespace escolm {

void ModelConfig::validate() const {
  if (vocab_size <= static_cast<std::size_t>(kNumSpecialTokens)) {
    throw ConfigError("vocab_size must exceed the special tokens");
  }
  if (max_len == 0 || hidden_dim == 0 || heads == 0 || ffn_dim == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (hidden_dim % heads != 0) throw ConfigError("hidden_dim must be divisible by heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

ParamLayout::ParamLayout(const ModelConfig& config) {
  auto add = [this](std::string name, std::size_t rows, std::size_t cols, ParamKind kind) {
    Tensor t{total, rows, cols};
    total += rows * cols;
    tensors.push_back({std::move(name), t, kind});
    return t;
  };
  const std::size_t d = config.hidden_dim;
  const std::size_t f = config.ffn_dim;
  token_embedding = add("token_embedding", config.vocab_size, d, ParamKind::kEmbedding);
  position_embedding = add("position_embedding", config.max_len, d, ParamKind::kEmbedding);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerLayout layer;
    layer.wq = add(p + "attn.wq", d, d, ParamKind::kWeight);
    layer.bq = add(p + "attn.bq", 1, d, ParamKind::kBias);
    layer.wk = add(p + "attn.wk", d, d, ParamKind::kWeight);
    layer.bk = add(p + "attn.bk", 1, d, ParamKind::kBias);
    layer.wv = add(p + "attn.wv", d, d, ParamKind::kWeight);
    layer.bv = add(p + "attn.bv", 1, d, ParamKind::kBias);
    layer.wo = add(p + "attn.wo", d, d, ParamKind::kWeight);
    layer.bo = add(p + "attn.bo", 1, d, ParamKind::kBias);
    layer.ln1_gain = add(p + "ln1.gain", 1, d, ParamKind::kNormGain);
    layer.ln1_bias = add(p + "ln1.bias", 1, d, ParamKind::kNormBias);
    layer.w1 = add(p + "ffn.w1", d, f, ParamKind::kWeight);
    layer.b1 = add(p + "ffn.b1", 1, f, ParamKind::kBias);
    layer.w2 = add(p + "ffn.w2", f, d, ParamKind::kWeight);
    layer.b2 = add(p + "ffn.b2", 1, d, ParamKind::kBias);
    layer.ln2_gain = add(p + "ln2.gain", 1, d, ParamKind::kNormGain);
    layer.ln2_bias = add(p + "ln2.bias", 1, d, ParamKind::kNormBias);
    layers.push_back(layer);
  }
  mlm_weight = add("mlm.weight", d, config.vocab_size, ParamKind::kWeight);
  mlm_bias = add("mlm.bias", 1, config.vocab_size, ParamKind::kBias);
  erp_weight = add("erp.weight", d, 3, ParamKind::kWeight);
  erp_bias = add("erp.bias", 1, 3, ParamKind::kBias);
}

Parameters::Parameters(const ModelConfig& config)
    : config_(config), layout_(config), values_(layout_.total, 0.0) {
  config_.validate();
}

std::vector<bool> Parameters::decay_mask() const {
  std::vector<bool> mask(values_.size(), false);
  for (const auto& nt : layout_.tensors) {
    if (!is_decayed(nt.kind)) continue;
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(nt.tensor.offset), nt.tensor.size(),
                true);
  }
  return mask;
}

Parameters init_params(const ModelConfig& config, Rng& rng) {
  Parameters params(config);
  for (const auto& nt : params.layout().tensors) {
    double* p = params.data(nt.tensor);
    for (std::size_t i = 0; i < nt.tensor.size(); ++i) {
      switch (nt.kind) {
        case ParamKind::kEmbedding:
        case ParamKind::kWeight:
          p[i] = 0.02 * rng.normal();
          break;
        case ParamKind::kNormGain:
          p[i] = 1.0;
          break;
        case ParamKind::kBias:
        case ParamKind::kNormBias:
          p[i] = 0.0;
          break;
      }
    }
  }
  return params;
}

namespace {

constexpr double kLayerNormEps = 1e-5;

// Y[t] = b + X[t] W for t < rows; X is rows x in, W is in x out.
void linear_forward(const kernels::KernelTable& k, const double* x, std::size_t rows,
                    std::size_t in, const double* w, const double* b, std::size_t out,
                    double* y) {
  for (std::size_t t = 0; t < rows; ++t) {
    double* yt = y + t * out;
    std::copy_n(b, out, yt);
    const double* xt = x + t * in;
    for (std::size_t i = 0; i < in; ++i) k.axpy(xt[i], w + i * out, yt, out);
  }
}

// Accumulates dX += dY W^T, dW += X^T dY, db += colsum(dY). dx may be null.
void linear_backward(const kernels::KernelTable& k, const double* x, std::size_t rows,
                     std::size_t in, const double* w, std::size_t out, const double* dy,
                     double* dx, double* dw, double* db) {
  for (std::size_t t = 0; t < rows; ++t) {
    const double* dyt = dy + t * out;
    const double* xt = x + t * in;
    for (std::size_t i = 0; i < in; ++i) {
      if (dx) dx[t * in + i] += k.dot(w + i * out, dyt, out);
      k.axpy(xt[i], dyt, dw + i * out, out);
    }
    for (std::size_t j = 0; j < out; ++j) db[j] += dyt[j];
  }
}

void layer_norm_forward(const double* x, std::size_t rows, std::size_t d, const double* gain,
                        const double* bias, double* y, double* xhat, double* inv_std) {
  for (std::size_t t = 0; t < rows; ++t) {
    const double* xt = x + t * d;
    double mean = 0.0;
    for (std::size_t i = 0; i < d; ++i) mean += xt[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) var += (xt[i] - mean) * (xt[i] - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std[t] = inv;
    for (std::size_t i = 0; i < d; ++i) {
      const double h = (xt[i] - mean) * inv;
      xhat[t * d + i] = h;
      y[t * d + i] = gain[i] * h + bias[i];
    }
  }
}

// dx = d LN / d x applied to dy (overwrites dx); accumulates gain/bias grads.
void layer_norm_backward(const double* dy, const double* xhat, const double* inv_std,
                         std::size_t rows, std::size_t d, const double* gain, double* dgain,
                         double* dbias, double* dx) {
  std::vector<double> dxhat(d);
  for (std::size_t t = 0; t < rows; ++t) {
    const double* dyt = dy + t * d;
    const double* ht = xhat + t * d;
    double mean_dxhat = 0.0;
    double mean_dxhat_h = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dxhat[i] = dyt[i] * gain[i];
      dgain[i] += dyt[i] * ht[i];
      dbias[i] += dyt[i];
      mean_dxhat += dxhat[i];
      mean_dxhat_h += dxhat[i] * ht[i];
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_h /= static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) {
      dx[t * d + i] = inv_std[t] * (dxhat[i] - mean_dxhat - ht[i] * mean_dxhat_h);
    }
  }
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

struct LayerCache {
  std::vector<double> x_in, q, k, v, probs, ctx, attn_drop;
  std::vector<double> xhat1, inv1, y1, u, f, ffn_drop, xhat2, inv2;
};

struct SequenceCache {
  std::size_t length = 0;
  std::vector<char> key_ok;
  std::vector<LayerCache> layers;
  std::vector<double> hidden;
};

void check_ids(const ModelConfig& config, std::span<const TokenId> ids) {
  if (ids.empty()) throw ShapeError("empty input sequence");
  if (ids.size() > config.max_len) {
    throw ShapeError("sequence length " + std::to_string(ids.size()) + " exceeds max_len " +
                     std::to_string(config.max_len));
  }
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
      throw ShapeError("token id " + std::to_string(id) + " out of range");
    }
  }
}

void apply_dropout(std::vector<double>& values, std::vector<double>& mask, double rate,
                   Rng* rng) {
  mask.clear();
  if (rate <= 0.0 || rng == nullptr) return;
  mask.resize(values.size());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < values.size(); ++i) {
    mask[i] = rng->uniform01() < rate ? 0.0 : keep_scale;
    values[i] *= mask[i];
  }
}

// Encoder pass; fills `cache` with everything the backward pass needs.
void encode_sequence(const Parameters& params, std::span<const TokenId> ids, SequenceCache& cache,
                     Rng* dropout_rng) {
  const auto& k = kernels::active();
  const ModelConfig& cfg = params.config();
  const ParamLayout& layout = params.layout();
  const std::size_t n = ids.size();
  const std::size_t d = cfg.hidden_dim;
  const std::size_t heads = cfg.heads;
  const std::size_t dh = d / heads;
  const std::size_t f = cfg.ffn_dim;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.length = n;
  cache.key_ok.assign(n, 1);
  for (std::size_t j = 0; j < n; ++j) cache.key_ok[j] = ids[j] != kPadId;
  if (std::none_of(cache.key_ok.begin(), cache.key_ok.end(), [](char c) { return c != 0; })) {
    throw ShapeError("sequence consists of padding only");
  }

  std::vector<double> x(n * d);
  const double* tok = params.data(layout.token_embedding);
  const double* pos = params.data(layout.position_embedding);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      x[t * d + i] = tok[static_cast<std::size_t>(ids[t]) * d + i] + pos[t * d + i];
    }
  }

  cache.layers.resize(cfg.layers);
  std::vector<double> scores(n);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const LayerLayout& ll = layout.layers[l];
    LayerCache& c = cache.layers[l];
    c.x_in = x;
    c.q.resize(n * d);
    c.k.resize(n * d);
    c.v.resize(n * d);
    linear_forward(k, x.data(), n, d, params.data(ll.wq), params.data(ll.bq), d, c.q.data());
    linear_forward(k, x.data(), n, d, params.data(ll.wk), params.data(ll.bk), d, c.k.data());
    linear_forward(k, x.data(), n, d, params.data(ll.wv), params.data(ll.bv), d, c.v.data());

    c.probs.assign(heads * n * n, 0.0);
    c.ctx.assign(n * d, 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * dh;
      for (std::size_t i = 0; i < n; ++i) {
        double max_score = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
          if (!cache.key_ok[j]) continue;
          scores[j] = k.dot(&c.q[i * d + off], &c.k[j * d + off], dh) * inv_sqrt_dh;
          max_score = std::max(max_score, scores[j]);
        }
        double z = 0.0;
        double* p = &c.probs[(h * n + i) * n];
        for (std::size_t j = 0; j < n; ++j) {
          if (!cache.key_ok[j]) continue;
          p[j] = std::exp(scores[j] - max_score);
          z += p[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (!cache.key_ok[j]) continue;
          p[j] /= z;
          k.axpy(p[j], &c.v[j * d + off], &c.ctx[i * d + off], dh);
        }
      }
    }

    std::vector<double> o(n * d);
    linear_forward(k, c.ctx.data(), n, d, params.data(ll.wo), params.data(ll.bo), d, o.data());
    apply_dropout(o, c.attn_drop, cfg.dropout, dropout_rng);
    for (std::size_t i = 0; i < n * d; ++i) o[i] += x[i];
    c.y1.resize(n * d);
    c.xhat1.resize(n * d);
    c.inv1.resize(n);
    layer_norm_forward(o.data(), n, d, params.data(ll.ln1_gain), params.data(ll.ln1_bias),
                       c.y1.data(), c.xhat1.data(), c.inv1.data());

    c.u.resize(n * f);
    linear_forward(k, c.y1.data(), n, d, params.data(ll.w1), params.data(ll.b1), f, c.u.data());
    c.f.resize(n * f);
    for (std::size_t i = 0; i < n * f; ++i) c.f[i] = gelu(c.u[i]);
    std::vector<double> g(n * d);
    linear_forward(k, c.f.data(), n, f, params.data(ll.w2), params.data(ll.b2), d, g.data());
    apply_dropout(g, c.ffn_drop, cfg.dropout, dropout_rng);
    for (std::size_t i = 0; i < n * d; ++i) g[i] += c.y1[i];
    c.xhat2.resize(n * d);
    c.inv2.resize(n);
    layer_norm_forward(g.data(), n, d, params.data(ll.ln2_gain), params.data(ll.ln2_bias),
                       x.data(), c.xhat2.data(), c.inv2.data());
  }
  cache.hidden = std::move(x);
}

// Back-propagates d loss / d hidden through the encoder into `grad`.
void backprop_sequence(const Parameters& params, std::span<const TokenId> ids,
                       const SequenceCache& cache, std::vector<double> dx, double* grad) {
  const auto& k = kernels::active();
  const ModelConfig& cfg = params.config();
  const ParamLayout& layout = params.layout();
  const std::size_t n = cache.length;
  const std::size_t d = cfg.hidden_dim;
  const std::size_t heads = cfg.heads;
  const std::size_t dh = d / heads;
  const std::size_t f = cfg.ffn_dim;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  auto g = [&](const Tensor& t) { return grad + t.offset; };

  std::vector<double> dr(n * d), dy1(n * d), dff(n * f), dctx(n * d), dq(n * d), dk(n * d),
      dv(n * d), dxin(n * d), dp(n);
  for (std::size_t l = cfg.layers; l-- > 0;) {
    const LayerLayout& ll = layout.layers[l];
    const LayerCache& c = cache.layers[l];

    layer_norm_backward(dx.data(), c.xhat2.data(), c.inv2.data(), n, d,
                        params.data(ll.ln2_gain), g(ll.ln2_gain), g(ll.ln2_bias), dr.data());
    dy1 = dr;  // residual branch
    if (!c.ffn_drop.empty()) {
      for (std::size_t i = 0; i < n * d; ++i) dr[i] *= c.ffn_drop[i];
    }
    std::fill(dff.begin(), dff.end(), 0.0);
    linear_backward(k, c.f.data(), n, f, params.data(ll.w2), d, dr.data(), dff.data(), g(ll.w2),
                    g(ll.b2));
    for (std::size_t i = 0; i < n * f; ++i) dff[i] *= gelu_grad(c.u[i]);
    linear_backward(k, c.y1.data(), n, d, params.data(ll.w1), f, dff.data(), dy1.data(), g(ll.w1),
                    g(ll.b1));

    layer_norm_backward(dy1.data(), c.xhat1.data(), c.inv1.data(), n, d,
                        params.data(ll.ln1_gain), g(ll.ln1_gain), g(ll.ln1_bias), dr.data());
    dxin = dr;  // residual branch
    if (!c.attn_drop.empty()) {
      for (std::size_t i = 0; i < n * d; ++i) dr[i] *= c.attn_drop[i];
    }
    std::fill(dctx.begin(), dctx.end(), 0.0);
    linear_backward(k, c.ctx.data(), n, d, params.data(ll.wo), d, dr.data(), dctx.data(),
                    g(ll.wo), g(ll.bo));

    std::fill(dq.begin(), dq.end(), 0.0);
    std::fill(dk.begin(), dk.end(), 0.0);
    std::fill(dv.begin(), dv.end(), 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * dh;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = &c.probs[(h * n + i) * n];
        const double* dci = &dctx[i * d + off];
        double weighted = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (!cache.key_ok[j]) continue;
          dp[j] = k.dot(dci, &c.v[j * d + off], dh);
          weighted += p[j] * dp[j];
          k.axpy(p[j], dci, &dv[j * d + off], dh);
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (!cache.key_ok[j]) continue;
          const double ds = p[j] * (dp[j] - weighted) * inv_sqrt_dh;
          k.axpy(ds, &c.k[j * d + off], &dq[i * d + off], dh);
          k.axpy(ds, &c.q[i * d + off], &dk[j * d + off], dh);
        }
      }
    }
    linear_backward(k, c.x_in.data(), n, d, params.data(ll.wq), d, dq.data(), dxin.data(),
                    g(ll.wq), g(ll.bq));
    linear_backward(k, c.x_in.data(), n, d, params.data(ll.wk), d, dk.data(), dxin.data(),
                    g(ll.wk), g(ll.bk));
    linear_backward(k, c.x_in.data(), n, d, params.data(ll.wv), d, dv.data(), dxin.data(),
                    g(ll.wv), g(ll.bv));
    dx = dxin;
  }

  double* dtok = g(layout.token_embedding);
  double* dpos = g(layout.position_embedding);
  for (std::size_t t = 0; t < n; ++t) {
    k.axpy(1.0, &dx[t * d], dtok + static_cast<std::size_t>(ids[t]) * d, d);
    k.axpy(1.0, &dx[t * d], dpos + t * d, d);
  }
}

void head_logits(const kernels::KernelTable& k, const double* h, std::size_t d, const double* w,
                 const double* b, std::size_t out, double* logits) {
  linear_forward(k, h, 1, d, w, b, out, logits);
}

// log-softmax in place; returns nothing, values become log-probabilities.
void log_softmax(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  const double lse = m + std::log(s);
  for (double& v : z) v -= lse;
}

std::size_t argmax(std::span<const double> z) {
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

void check_instance(const ModelConfig& config, const MaskedInstance& inst) {
  check_ids(config, inst.input_ids);
  if (inst.mlm_labels.size() != inst.input_ids.size()) {
    throw ShapeError("mlm_labels length differs from input length");
  }
  for (const auto& label : inst.mlm_labels) {
    if (label && (*label < 0 || static_cast<std::size_t>(*label) >= config.vocab_size)) {
      throw ShapeError("mlm label out of range");
    }
  }
}

// Shared loss/gradient driver. `grad` may be null for evaluation only.
BatchStats run_batch(const Parameters& params, std::span<const MaskedInstance> batch,
                     const LossOptions& options, double* grad, Rng* dropout_rng) {
  const ModelConfig& cfg = params.config();
  const ParamLayout& layout = params.layout();
  const auto& k = kernels::active();
  const std::size_t d = cfg.hidden_dim;
  const std::size_t vocab = cfg.vocab_size;

  BatchStats stats;
  if (batch.empty()) return stats;
  std::size_t labeled_total = 0;
  for (const auto& inst : batch) {
    check_instance(cfg, inst);
    labeled_total += inst.labeled_count();
  }
  const double batch_size = static_cast<double>(batch.size());
  const double mlm_weight = options.mlm_reduction == MlmReduction::kMean
                                ? (labeled_total > 0 ? 1.0 / static_cast<double>(labeled_total)
                                                     : 0.0)
                                : 1.0 / batch_size;
  const double erp_weight = 1.0 / batch_size;

  SequenceCache cache;
  std::vector<double> logits(vocab);
  for (const auto& inst : batch) {
    encode_sequence(params, inst.input_ids, cache, dropout_rng);
    const std::size_t n = cache.length;
    std::vector<double> dh;
    if (grad) dh.assign(n * d, 0.0);

    for (std::size_t t = 0; t < n; ++t) {
      if (!inst.mlm_labels[t]) continue;
      const auto target = static_cast<std::size_t>(*inst.mlm_labels[t]);
      head_logits(k, &cache.hidden[t * d], d, params.data(layout.mlm_weight),
                  params.data(layout.mlm_bias), vocab, logits.data());
      if (argmax(logits) == target) ++stats.mlm_correct;
      ++stats.mlm_labeled;
      log_softmax(logits);
      stats.loss.mlm -= mlm_weight * logits[target];
      if (!grad) continue;
      // d(-log p_target)/dz = softmax - onehot
      for (double& v : logits) v = std::exp(v) * mlm_weight;
      logits[target] -= mlm_weight;
      linear_backward(k, &cache.hidden[t * d], 1, d, params.data(layout.mlm_weight), vocab,
                      logits.data(), &dh[t * d], grad + layout.mlm_weight.offset,
                      grad + layout.mlm_bias.offset);
    }

    std::array<double, 3> erp{};
    head_logits(k, cache.hidden.data(), d, params.data(layout.erp_weight),
                params.data(layout.erp_bias), 3, erp.data());
    const auto r = static_cast<std::size_t>(to_int(inst.erp_label));
    const bool correct = argmax(erp) == r;
    ++stats.erp_total;
    ++stats.erp_total_by_relation[r];
    if (correct) {
      ++stats.erp_correct;
      ++stats.erp_correct_by_relation[r];
    }
    log_softmax(erp);
    stats.loss.erp -= erp_weight * erp[r];
    if (!grad) continue;
    for (double& v : erp) v = std::exp(v) * erp_weight;
    erp[r] -= erp_weight;
    linear_backward(k, cache.hidden.data(), 1, d, params.data(layout.erp_weight), 3, erp.data(),
                    dh.data(), grad + layout.erp_weight.offset, grad + layout.erp_bias.offset);

    backprop_sequence(params, inst.input_ids, cache, std::move(dh), grad);
  }
  stats.loss.total = stats.loss.mlm + stats.loss.erp;
  return stats;
}

}  // namespace

ForwardOutput forward(const Parameters& params, std::span<const TokenId> ids) {
  const ModelConfig& cfg = params.config();
  check_ids(cfg, ids);
  SequenceCache cache;
  encode_sequence(params, ids, cache, nullptr);
  const auto& k = kernels::active();
  const ParamLayout& layout = params.layout();
  ForwardOutput out;
  out.length = ids.size();
  out.hidden_dim = cfg.hidden_dim;
  out.vocab_size = cfg.vocab_size;
  out.hidden = std::move(cache.hidden);
  out.mlm_logits.resize(out.length * cfg.vocab_size);
  linear_forward(k, out.hidden.data(), out.length, cfg.hidden_dim, params.data(layout.mlm_weight),
                 params.data(layout.mlm_bias), cfg.vocab_size, out.mlm_logits.data());
  head_logits(k, out.hidden.data(), cfg.hidden_dim, params.data(layout.erp_weight),
              params.data(layout.erp_bias), 3, out.erp_logits.data());
  return out;
}

std::vector<ForwardOutput> forward(const Parameters& params,
                                   std::span<const MaskedInstance> batch) {
  std::vector<ForwardOutput> out;
  out.reserve(batch.size());
  for (const auto& inst : batch) out.push_back(forward(params, inst.input_ids));
  return out;
}

LossValue loss(const ForwardOutput& output, std::span<const std::optional<TokenId>> mlm_labels,
               Relation erp_label, const LossOptions& options) {
  if (mlm_labels.size() != output.length) {
    throw ShapeError("mlm_labels length differs from output length");
  }
  LossValue value;
  std::size_t labeled = 0;
  std::vector<double> z(output.vocab_size);
  for (std::size_t t = 0; t < output.length; ++t) {
    if (!mlm_labels[t]) continue;
    const auto target = static_cast<std::size_t>(*mlm_labels[t]);
    if (target >= output.vocab_size) throw ShapeError("mlm label out of range");
    const auto row = output.mlm_logits_at(t);
    std::copy(row.begin(), row.end(), z.begin());
    log_softmax(z);
    value.mlm -= z[target];
    ++labeled;
  }
  if (labeled > 0 && options.mlm_reduction == MlmReduction::kMean) {
    value.mlm /= static_cast<double>(labeled);
  }
  std::array<double, 3> erp = output.erp_logits;
  log_softmax(erp);
  value.erp = -erp[static_cast<std::size_t>(to_int(erp_label))];
  value.total = value.mlm + value.erp;
  return value;
}

Gradients backward(const Parameters& params, std::span<const MaskedInstance> batch,
                   const LossOptions& options, Rng* dropout_rng) {
  Gradients out;
  out.values.assign(params.values().size(), 0.0);
  out.stats = run_batch(params, batch, options, out.values.data(), dropout_rng);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (!std::isfinite(out.values[i])) {
      throw NonFiniteGradient("gradient entry " + std::to_string(i) + " is not finite");
    }
  }
  return out;
}

BatchStats evaluate(const Parameters& params, std::span<const MaskedInstance> batch,
                    const LossOptions& options) {
  return run_batch(params, batch, options, nullptr, nullptr);
}

}  // namespace escolm
