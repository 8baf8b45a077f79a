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

#include "escolm/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "escolm/errors.hpp"
#include "json.hpp"

namespace escolm {

namespace {

template <typename T>
bool intersects(std::span<const T> a, std::span<const T> b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

// Uniform entry among the description entries of `concepts`, skipping
// concept `excluded`. Returns nullopt when there is none.
std::optional<EntryRef> uniform_entry(const TaxonomyStore& store,
                                      std::span<const ConceptIndex> concepts,
                                      ConceptIndex excluded, Rng& rng) {
  std::uint64_t total = 0;
  for (ConceptIndex c : concepts) {
    if (c != excluded) total += store.entries_of(c).size();
  }
  if (total == 0) return std::nullopt;
  std::uint64_t k = rng.uniform(total);
  for (ConceptIndex c : concepts) {
    if (c == excluded) continue;
    const auto entries = store.entries_of(c);
    if (k < entries.size()) return entries[k];
    k -= entries.size();
  }
  return std::nullopt;  // unreachable
}

std::optional<EntryRef> try_linked(const TaxonomyStore& store, const EntryRef& anchor, Rng& rng) {
  const ConceptIndex a = anchor.concept_index;
  // Only owners whose page holds another described concept can serve.
  std::vector<ConceptIndex> usable;
  for (ConceptIndex owner : store.page_owners(a)) {
    for (ConceptIndex m : store.page(owner)) {
      if (m != a && !store.entries_of(m).empty()) {
        usable.push_back(owner);
        break;
      }
    }
  }
  if (usable.empty()) return std::nullopt;
  const ConceptIndex owner = usable[rng.uniform(usable.size())];
  return uniform_entry(store, store.page(owner), a, rng);
}

std::optional<EntryRef> try_grouped(const TaxonomyStore& store, const EntryRef& anchor,
                                    bool strict, Rng& rng) {
  const ConceptIndex a = anchor.concept_index;
  std::vector<ConceptIndex> pool;
  for (GroupIndex g : store.groups_of(a)) {
    const auto members = store.group_member_indices(g);
    pool.insert(pool.end(), members.begin(), members.end());
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (strict) {
    std::erase_if(pool, [&](ConceptIndex c) { return is_linked(store, a, c); });
  }
  return uniform_entry(store, pool, a, rng);
}

std::optional<EntryRef> try_random(const TaxonomyStore& store, const EntryRef& anchor,
                                   const SamplerConfig& config, Rng& rng) {
  const auto entries = store.entries();
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    const EntryRef candidate = entries[rng.uniform(entries.size())];
    if (candidate == anchor) continue;
    if (!config.strict_disjoint_random) return candidate;
    if (verify_relation(store, anchor, candidate) == Relation::kRandom) return candidate;
  }
  return std::nullopt;
}

std::optional<EntryRef> try_partner(const TaxonomyStore& store, const EntryRef& anchor,
                                    Relation relation, const SamplerConfig& config, Rng& rng) {
  switch (relation) {
    case Relation::kLinked:
      return try_linked(store, anchor, rng);
    case Relation::kGrouped:
      return try_grouped(store, anchor, config.strict_disjoint_random, rng);
    case Relation::kRandom:
      return try_random(store, anchor, config, rng);
  }
  return std::nullopt;
}

}  // namespace

void SamplerConfig::validate() const {
  if (max_retries < 1) throw ConfigError("max_retries must be >= 1");
}

bool is_linked(const TaxonomyStore& store, ConceptIndex a, ConceptIndex b) {
  return a == b || intersects(store.page_owners(a), store.page_owners(b));
}

bool is_grouped(const TaxonomyStore& store, ConceptIndex a, ConceptIndex b) {
  return intersects(store.groups_of(a), store.groups_of(b));
}

EntryRef sample_anchor(const TaxonomyStore& store, Rng& rng) {
  const auto entries = store.entries();
  if (entries.empty()) throw EmptyCorpus("taxonomy has no nonempty descriptions");
  return entries[rng.uniform(entries.size())];
}

EntryRef sample_partner(const TaxonomyStore& store, const EntryRef& anchor, Relation relation,
                        const SamplerConfig& config, Rng& rng) {
  config.validate();
  if (auto partner = try_partner(store, anchor, relation, config, rng)) return *partner;
  throw DegenerateRelation("no " + std::string(to_string(relation)) + " partner for '" +
                           store.at(anchor.concept_index).concept_id + "'/" +
                           store.language(anchor.language));
}

PairSample sample_pair(const TaxonomyStore& store, const SamplerConfig& config, Rng& rng) {
  config.validate();
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    const EntryRef anchor = sample_anchor(store, rng);
    std::vector<Relation> remaining(kAllRelations.begin(), kAllRelations.end());
    while (!remaining.empty()) {
      const std::size_t pick = rng.uniform(remaining.size());
      const Relation relation = remaining[pick];
      if (auto partner = try_partner(store, anchor, relation, config, rng)) {
        return {anchor, *partner, relation};
      }
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  throw ExhaustedRetries("no anchor admitted any relation after " +
                         std::to_string(config.max_retries) + " draws");
}

Relation verify_relation(const TaxonomyStore& store, const EntryRef& anchor,
                         const EntryRef& partner) {
  const std::size_t n = store.concepts().size();
  if (anchor.concept_index >= n || partner.concept_index >= n ||
      anchor.language >= store.languages().size() ||
      partner.language >= store.languages().size()) {
    throw UnknownId("entry handle out of range");
  }
  if (is_linked(store, anchor.concept_index, partner.concept_index)) return Relation::kLinked;
  if (is_grouped(store, anchor.concept_index, partner.concept_index)) return Relation::kGrouped;
  return Relation::kRandom;
}

Relation verify_relation(const TaxonomyStore& store, const DescriptionEntry& anchor,
                         const DescriptionEntry& partner) {
  auto resolve = [&](const DescriptionEntry& e) {
    const auto c = store.find(e.concept_id);
    const auto l = store.find_language(e.language);
    if (!c || !l) throw UnknownId("entry '" + e.concept_id + "'/" + e.language);
    const EntryRef ref{*c, *l};
    const auto entries = store.entries_of(*c);
    if (std::find(entries.begin(), entries.end(), ref) == entries.end()) {
      throw UnknownId("'" + e.concept_id + "' has no " + e.language + " description");
    }
    return ref;
  };
  return verify_relation(store, resolve(anchor), resolve(partner));
}

PairStream::PairStream(const TaxonomyStore& store, SamplerConfig config)
    : store_(&store), config_(config), rng_(derive_stream(config.seed, "pairs", 0)) {
  config_.validate();
}

PairSample PairStream::next() {
  if (position_ > 0 && position_ % kChunkSize == 0) {
    rng_ = derive_stream(config_.seed, "pairs", position_ / kChunkSize);
  }
  PairSample s = sample_pair(*store_, config_, rng_);
  ++position_;
  return s;
}

void PairStream::seek(std::uint64_t index) {
  const std::uint64_t chunk = index / kChunkSize;
  rng_ = derive_stream(config_.seed, "pairs", chunk);
  position_ = chunk * kChunkSize;
  while (position_ < index) {
    sample_pair(*store_, config_, rng_);
    ++position_;
  }
}

std::vector<PairSample> sample_pairs(const TaxonomyStore& store, const SamplerConfig& config,
                                     std::size_t n, unsigned workers) {
  config.validate();
  std::vector<PairSample> out(n);
  const std::size_t chunks = (n + PairStream::kChunkSize - 1) / PairStream::kChunkSize;
  std::atomic<std::size_t> next_chunk{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t c = next_chunk++; c < chunks; c = next_chunk++) {
        Rng rng = derive_stream(config.seed, "pairs", c);
        const std::size_t end = std::min(n, (c + 1) * PairStream::kChunkSize);
        for (std::size_t i = c * PairStream::kChunkSize; i < end; ++i) {
          out[i] = sample_pair(store, config, rng);
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::string pair_to_json_line(const TaxonomyStore& store, const PairSample& pair) {
  // Keys in the documented order.
  nlohmann::ordered_json obj;
  obj["anchor_id"] = store.at(pair.anchor.concept_index).concept_id;
  obj["anchor_lang"] = store.language(pair.anchor.language);
  obj["partner_id"] = store.at(pair.partner.concept_index).concept_id;
  obj["partner_lang"] = store.language(pair.partner.language);
  obj["relation"] = std::string(to_string(pair.relation));
  return obj.dump();
}

}  // namespace escolm
