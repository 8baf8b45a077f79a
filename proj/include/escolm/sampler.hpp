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
#include <cstdint>
#include <string>
#include <vector>

#include "escolm/relation.hpp"
#include "escolm/rng.hpp"
#include "escolm/taxonomy.hpp"

namespace escolm {

// An anchor/partner pair of description entries plus its ERP label. The
// entries are handles into the store the pair was drawn from.
struct PairSample {
  EntryRef anchor;
  EntryRef partner;
  Relation relation = Relation::kRandom;

  bool operator==(const PairSample&) const = default;
};

struct SamplerConfig {
  std::uint64_t seed = 0;
  // Reject Random partners that happen to be Linked or Grouped to the anchor,
  // and keep Linked partners out of the Grouped pool.
  bool strict_disjoint_random = true;
  int max_retries = 64;

  void validate() const;
};

// Relation tests on concepts. A concept is linked to itself.
bool is_linked(const TaxonomyStore& store, ConceptIndex a, ConceptIndex b);
bool is_grouped(const TaxonomyStore& store, ConceptIndex a, ConceptIndex b);

// Uniform over description entries. Throws EmptyCorpus.
EntryRef sample_anchor(const TaxonomyStore& store, Rng& rng);

// Partner for `anchor` under `relation`. Partner language is unconstrained.
// Throws DegenerateRelation when no eligible partner exists.
EntryRef sample_partner(const TaxonomyStore& store, const EntryRef& anchor, Relation relation,
                        const SamplerConfig& config, Rng& rng);

// Relation drawn uniformly; a degenerate relation is excluded and the
// relation redrawn, and the anchor is redrawn only when all three fail.
// Throws EmptyCorpus, ExhaustedRetries.
PairSample sample_pair(const TaxonomyStore& store, const SamplerConfig& config, Rng& rng);

// Strongest true relation, Linked > Grouped > Random.
Relation verify_relation(const TaxonomyStore& store, const EntryRef& anchor,
                         const EntryRef& partner);
inline Relation verify_relation(const TaxonomyStore& store, const PairSample& pair) {
  return verify_relation(store, pair.anchor, pair.partner);
}
// Id-level variant. Throws UnknownId if either side is not a description entry.
Relation verify_relation(const TaxonomyStore& store, const DescriptionEntry& anchor,
                         const DescriptionEntry& partner);

// Deterministic pair stream. Samples are produced in fixed-size chunks, each
// from its own stream derived from (seed, chunk index), so the n-th sample
// does not depend on how many workers produced the stream.
class PairStream {
 public:
  static constexpr std::size_t kChunkSize = 4096;

  PairStream(const TaxonomyStore& store, SamplerConfig config);

  PairSample next();
  // Reposition so that the following next() returns sample `index`.
  void seek(std::uint64_t index);
  std::uint64_t position() const { return position_; }

 private:
  const TaxonomyStore* store_;
  SamplerConfig config_;
  std::uint64_t position_ = 0;
  Rng rng_;
};

// First n samples of PairStream(store, config), produced by `workers`
// threads. Output is independent of the worker count.
std::vector<PairSample> sample_pairs(const TaxonomyStore& store, const SamplerConfig& config,
                                     std::size_t n, unsigned workers = 1);

// One line of the `sample` JSONL output.
std::string pair_to_json_line(const TaxonomyStore& store, const PairSample& pair);

}  // namespace escolm
