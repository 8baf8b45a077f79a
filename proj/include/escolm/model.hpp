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

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "escolm/masking.hpp"
#include "escolm/relation.hpp"
#include "escolm/rng.hpp"
#include "escolm/tokenizer.hpp"

namespace escolm {

// Post-norm transformer encoder with an MLM head over every position and an
// ERP head over the final state of the first (CLS) position. With zero
// layers the hidden states are the summed token and position embeddings.
struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t max_len = 64;
  std::size_t layers = 2;
  std::size_t hidden_dim = 32;
  std::size_t heads = 2;
  std::size_t ffn_dim = 64;
  double dropout = 0.0;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

enum class ParamKind { kEmbedding, kWeight, kBias, kNormGain, kNormBias };

// Decoupled weight decay applies to embeddings and weight matrices only.
constexpr bool is_decayed(ParamKind kind) {
  return kind == ParamKind::kEmbedding || kind == ParamKind::kWeight;
}

struct Tensor {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
  ParamKind kind;
};

struct LayerLayout {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln1_gain, ln1_bias;
  Tensor w1, b1, w2, b2;
  Tensor ln2_gain, ln2_bias;
};

// Offsets of every tensor inside one flat parameter vector. Matrices are
// row-major with shape (inputs, outputs).
struct ParamLayout {
  explicit ParamLayout(const ModelConfig& config);

  Tensor token_embedding;     // vocab x hidden
  Tensor position_embedding;  // max_len x hidden
  std::vector<LayerLayout> layers;
  Tensor mlm_weight, mlm_bias;  // hidden x vocab, vocab
  Tensor erp_weight, erp_bias;  // hidden x 3, 3
  std::vector<NamedTensor> tensors;
  std::size_t total = 0;
};

class Parameters {
 public:
  explicit Parameters(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const ParamLayout& layout() const { return layout_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data(const Tensor& t) { return values_.data() + t.offset; }
  const double* data(const Tensor& t) const { return values_.data() + t.offset; }
  std::vector<bool> decay_mask() const;

  bool operator==(const Parameters& other) const {
    return config_ == other.config_ && values_ == other.values_;
  }

 private:
  ModelConfig config_;
  ParamLayout layout_;
  std::vector<double> values_;
};

// Weights and embeddings ~ N(0, 0.02^2), biases 0, norm gains 1.
Parameters init_params(const ModelConfig& config, Rng& rng);

struct ForwardOutput {
  std::size_t length = 0;
  std::size_t hidden_dim = 0;
  std::size_t vocab_size = 0;
  std::vector<double> hidden;      // length x hidden_dim
  std::vector<double> mlm_logits;  // length x vocab_size
  std::array<double, 3> erp_logits{};

  std::span<const double> hidden_at(std::size_t t) const {
    return std::span<const double>(hidden).subspan(t * hidden_dim, hidden_dim);
  }
  std::span<const double> mlm_logits_at(std::size_t t) const {
    return std::span<const double>(mlm_logits).subspan(t * vocab_size, vocab_size);
  }
};

// Deterministic inference pass (no dropout). PAD keys are excluded from
// attention. Throws ShapeError on empty, over-long or out-of-range input.
ForwardOutput forward(const Parameters& params, std::span<const TokenId> ids);
std::vector<ForwardOutput> forward(const Parameters& params,
                                   std::span<const MaskedInstance> batch);

enum class MlmReduction { kMean, kSum };

struct LossOptions {
  // kMean averages over labeled positions; kSum sums per instance.
  MlmReduction mlm_reduction = MlmReduction::kMean;
};

struct LossValue {
  double total = 0.0;
  double mlm = 0.0;
  double erp = 0.0;
};

// total = mlm + erp; mlm is 0 when no position is labeled.
LossValue loss(const ForwardOutput& output, std::span<const std::optional<TokenId>> mlm_labels,
               Relation erp_label, const LossOptions& options = {});

struct BatchStats {
  LossValue loss;
  std::size_t mlm_labeled = 0;
  std::size_t mlm_correct = 0;
  std::size_t erp_total = 0;
  std::size_t erp_correct = 0;
  std::array<std::size_t, 3> erp_total_by_relation{};
  std::array<std::size_t, 3> erp_correct_by_relation{};
};

struct Gradients {
  std::vector<double> values;  // same layout as Parameters::values()
  BatchStats stats;
};

// Batch loss: MLM averaged over every labeled position of the batch (or, in
// kSum mode, summed per instance and averaged over instances) plus ERP
// averaged over instances. Returns the exact gradient of that loss.
// `dropout_rng` enables dropout when the config asks for it.
// Throws ShapeError, NonFiniteGradient.
Gradients backward(const Parameters& params, std::span<const MaskedInstance> batch,
                   const LossOptions& options = {}, Rng* dropout_rng = nullptr);

// Loss and accuracies without gradients.
BatchStats evaluate(const Parameters& params, std::span<const MaskedInstance> batch,
                    const LossOptions& options = {});

}  // namespace escolm
