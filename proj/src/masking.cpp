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

#include "escolm/masking.hpp"

#include <algorithm>
#include <cmath>

#include "escolm/errors.hpp"
#include "json.hpp"

namespace escolm {

void MaskingPolicy::validate() const {
  if (!(select_rate > 0.0 && select_rate < 1.0)) {
    throw ConfigError("select_rate must lie in (0, 1)");
  }
  if (mask_frac < 0.0 || random_frac < 0.0 || keep_frac < 0.0 ||
      std::abs(mask_frac + random_frac + keep_frac - 1.0) > 1e-12) {
    throw ConfigError("mask/random/keep fractions must be nonnegative and sum to 1");
  }
}

std::size_t MaskedInstance::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(mlm_labels.begin(), mlm_labels.end(), [](const auto& l) { return l.has_value(); }));
}

bool is_maskable(TokenId id) { return id != kClsId && id != kSepId && id != kPadId; }

MaskedInstance mask_sequence(const TokenSequence& seq, const Vocab& vocab,
                             const MaskingPolicy& policy, Relation erp_label, Rng& rng) {
  policy.validate();
  if (vocab.size() <= static_cast<std::size_t>(kNumSpecialTokens)) {
    throw ConfigError("vocabulary has no regular tokens to sample replacements from");
  }
  const std::uint64_t regular = vocab.size() - kNumSpecialTokens;
  MaskedInstance out;
  out.input_ids = seq.ids();
  out.mlm_labels.assign(seq.size(), std::nullopt);
  out.erp_label = erp_label;
  out.boundary = seq.segment_boundary();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const TokenId original = out.input_ids[i];
    if (!is_maskable(original)) continue;
    if (rng.uniform01() >= policy.select_rate) continue;
    out.mlm_labels[i] = original;
    const double u = rng.uniform01();
    if (u < policy.mask_frac) {
      out.input_ids[i] = kMaskId;
    } else if (u < policy.mask_frac + policy.random_frac) {
      out.input_ids[i] = kNumSpecialTokens + static_cast<TokenId>(rng.uniform(regular));
    }
  }
  return out;
}

std::string instance_to_json_line(const MaskedInstance& instance) {
  nlohmann::ordered_json obj;
  obj["input_ids"] = instance.input_ids;
  std::vector<int> labels;
  labels.reserve(instance.mlm_labels.size());
  for (const auto& l : instance.mlm_labels) labels.push_back(l ? *l : kIgnoreLabel);
  obj["mlm_labels"] = labels;
  obj["erp_label"] = to_int(instance.erp_label);
  obj["boundary"] = instance.boundary;
  return obj.dump();
}

MaskedInstance instance_from_json_line(const std::string& line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
    MaskedInstance out;
    out.input_ids = obj.at("input_ids").get<std::vector<TokenId>>();
    for (int l : obj.at("mlm_labels").get<std::vector<int>>()) {
      out.mlm_labels.push_back(l == kIgnoreLabel ? std::nullopt : std::optional<TokenId>(l));
    }
    const auto relation = relation_from_int(obj.at("erp_label").get<long long>());
    if (!relation) throw ShapeError("erp_label must be 0, 1 or 2");
    out.erp_label = *relation;
    out.boundary = obj.at("boundary").get<std::size_t>();
    if (out.input_ids.size() != out.mlm_labels.size()) {
      throw ShapeError("input_ids and mlm_labels differ in length");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ShapeError(std::string("bad instance line: ") + e.what());
  }
}

}  // namespace escolm
