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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "escolm/relation.hpp"
#include "escolm/rng.hpp"
#include "escolm/tokenizer.hpp"

namespace escolm {

// Serialized form of an unlabeled MLM position.
inline constexpr int kIgnoreLabel = -100;

struct MaskingPolicy {
  double select_rate = 0.15;
  double mask_frac = 0.8;
  double random_frac = 0.1;
  double keep_frac = 0.1;

  void validate() const;
};

struct MaskedInstance {
  std::vector<TokenId> input_ids;
  // Original id at selected positions, nullopt elsewhere.
  std::vector<std::optional<TokenId>> mlm_labels;
  Relation erp_label = Relation::kRandom;
  std::size_t boundary = 0;

  std::size_t labeled_count() const;
  bool operator==(const MaskedInstance&) const = default;
};

// CLS, SEP and PAD positions are never selected.
bool is_maskable(TokenId id);

// Dynamic masking: every call draws a fresh pattern from `rng`. Each
// maskable position is selected independently with probability
// select_rate, then replaced by MASK, by a uniform regular token, or kept.
MaskedInstance mask_sequence(const TokenSequence& seq, const Vocab& vocab,
                             const MaskingPolicy& policy, Relation erp_label, Rng& rng);

// Pre-training instance JSONL line and its inverse.
std::string instance_to_json_line(const MaskedInstance& instance);
MaskedInstance instance_from_json_line(const std::string& line);

}  // namespace escolm
