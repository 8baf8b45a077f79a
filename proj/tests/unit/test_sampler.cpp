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

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <set>

#include "escolm/errors.hpp"
#include "escolm/sampler.hpp"
#include "escolm/synthetic.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace escolm {
namespace {

const std::string kFixture = std::string(ESCOLM_TEST_DATA_DIR) + "/small_taxonomy.jsonl";

ConceptRecord occupation(const std::string& id, const std::string& group,
                         std::vector<std::string> skills = {}) {
  ConceptRecord r;
  r.concept_id = id;
  r.kind = ConceptKind::kOccupation;
  r.major_group = group;
  r.preferred_label = {{"en", id}};
  r.description = {{"en", "about " + id}};
  r.essential_skills = std::move(skills);
  return r;
}

ConceptRecord skill(const std::string& id) {
  ConceptRecord r;
  r.concept_id = id;
  r.kind = ConceptKind::kSkill;
  r.preferred_label = {{"en", id}};
  r.description = {{"en", "skill " + id}};
  return r;
}

MajorGroup group(const std::string& id) { return {id, {{"en", id}}, {}}; }

std::string id_of(const TaxonomyStore& s, const EntryRef& e) {
  return s.at(e.concept_index).concept_id;
}

class SmallFixture : public ::testing::Test {
 protected:
  TaxonomyStore store = load_taxonomy(kFixture);
  EntryRef entry(const std::string& id, const std::string& lang) const {
    return {*store.find(id), *store.find_language(lang)};
  }
};

TEST(SampleAnchor, SingleEntryStoreAlwaysReturnsIt) {
  const auto store = TaxonomyStore::build({occupation("O", "G")}, {group("G")});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const EntryRef e = sample_anchor(store, rng);
    EXPECT_EQ(id_of(store, e), "O");
  }
}

TEST(SampleAnchor, UniformOverFourEntries) {
  const auto store = TaxonomyStore::build(
      {occupation("O1", "G", {"S1"}), occupation("O2", "G"), skill("S1"), skill("S2")},
      {group("G")});
  ASSERT_EQ(store.entries().size(), 4u);
  Rng rng(2);
  std::map<std::string, int> hits;
  for (int i = 0; i < 40000; ++i) ++hits[id_of(store, sample_anchor(store, rng))];
  for (const auto& [id, n] : hits) EXPECT_NEAR(n / 40000.0, 0.25, 0.01) << id;
}

TEST(SampleAnchor, EmptyCorpusThrows) {
  auto o = occupation("O", "G");
  o.description = {{"en", "   "}};
  const auto store = TaxonomyStore::build({o}, {group("G")});
  Rng rng(1);
  EXPECT_THROW(sample_anchor(store, rng), EmptyCorpus);
}

TEST(SampleAnchor, SameSeedSameDraws) {
  const auto store = load_taxonomy(kFixture);
  Rng a(9), b(9);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(sample_anchor(store, a), sample_anchor(store, b));
}

TEST_F(SmallFixture, LinkedPartnersComeFromThePageMinusAnchor) {
  Rng rng(3);
  SamplerConfig config;
  std::set<std::string> ids, langs;
  for (int i = 0; i < 3000; ++i) {
    const auto p = sample_partner(store, entry("O1", "en"), Relation::kLinked, config, rng);
    ids.insert(id_of(store, p));
    langs.insert(store.language(p.language));
  }
  EXPECT_EQ(ids, (std::set<std::string>{"A1", "S1", "S2"}));
  EXPECT_EQ(langs, (std::set<std::string>{"da", "de", "en"}));
}

TEST_F(SmallFixture, GroupedStrictPartnersMatchExhaustiveEnumeration) {
  // Enumerate every eligible entry from the raw records.
  std::set<std::pair<std::string, std::string>> eligible;
  for (const auto& e : store.entries()) {
    const std::string id = id_of(store, e);
    if (oracle::relation(store.concepts(), store.groups(), "O1", id) == Relation::kGrouped) {
      eligible.emplace(id, store.language(e.language));
    }
  }
  Rng rng(4);
  SamplerConfig config;
  std::set<std::pair<std::string, std::string>> seen;
  for (int i = 0; i < 4000; ++i) {
    const auto p = sample_partner(store, entry("O1", "en"), Relation::kGrouped, config, rng);
    seen.emplace(id_of(store, p), store.language(p.language));
  }
  EXPECT_EQ(seen, eligible);
  std::set<std::string> ids;
  for (const auto& [id, lang] : seen) ids.insert(id);
  EXPECT_EQ(ids, (std::set<std::string>{"O2", "S3"}));
}

TEST_F(SmallFixture, RandomStrictPartnersAreUnrelated) {
  Rng rng(5);
  SamplerConfig config;
  for (int i = 0; i < 2000; ++i) {
    const auto a = sample_anchor(store, rng);
    try {
      const auto p = sample_partner(store, a, Relation::kRandom, config, rng);
      EXPECT_EQ(verify_relation(store, a, p), Relation::kRandom);
    } catch (const DegenerateRelation&) {
    }
  }
}

TEST(SamplePartner, SingletonPageLinkedIsDegenerate) {
  const auto store =
      TaxonomyStore::build({occupation("O1", "G"), occupation("O2", "G")}, {group("G")});
  Rng rng(6);
  SamplerConfig config;
  const EntryRef anchor{*store.find("O1"), 0};
  EXPECT_THROW(sample_partner(store, anchor, Relation::kLinked, config, rng), DegenerateRelation);
  EXPECT_EQ(id_of(store, sample_partner(store, anchor, Relation::kGrouped, config, rng)), "O2");
}

TEST(SamplePair, SingletonPagesNeverYieldLinked) {
  const auto store = TaxonomyStore::build({occupation("O1", "G1"), occupation("O2", "G1"),
                                           occupation("O3", "G2"), occupation("O4", "G2")},
                                          {group("G1"), group("G2")});
  SamplerConfig config;
  Rng rng(7);
  std::array<int, 3> counts{};
  for (int i = 0; i < 3000; ++i) ++counts[to_int(sample_pair(store, config, rng).relation)];
  EXPECT_EQ(counts[to_int(Relation::kLinked)], 0);
  EXPECT_NEAR(counts[to_int(Relation::kRandom)] / 3000.0, 0.5, 0.05);
}

TEST(SamplePair, ExhaustedRetriesWhenNothingIsSampleable) {
  const auto store = TaxonomyStore::build({occupation("O1", "G1")}, {group("G1")});
  SamplerConfig config;
  config.max_retries = 3;
  Rng rng(8);
  EXPECT_THROW(sample_pair(store, config, rng), ExhaustedRetries);
}

TEST_F(SmallFixture, VerifyRelationExamples) {
  EXPECT_EQ(verify_relation(store, entry("O1", "en"), entry("S1", "de")), Relation::kLinked);
  EXPECT_EQ(verify_relation(store, entry("O1", "en"), entry("O2", "en")), Relation::kGrouped);
  EXPECT_EQ(verify_relation(store, entry("O2", "en"), entry("S4", "en")), Relation::kRandom);
  // S1 is listed by O1 (G1) and O3 (G2), so it is grouped with O2 and linked to O3.
  EXPECT_EQ(verify_relation(store, entry("S1", "en"), entry("O2", "en")), Relation::kGrouped);
  EXPECT_EQ(verify_relation(store, entry("S1", "en"), entry("A2", "en")), Relation::kLinked);
  EXPECT_EQ(verify_relation(store, DescriptionEntry{"A1", "de"}, DescriptionEntry{"S2", "en"}),
            Relation::kLinked);
  EXPECT_THROW(verify_relation(store, DescriptionEntry{"O2", "da"}, DescriptionEntry{"O1", "en"}),
               UnknownId);
  EXPECT_THROW(verify_relation(store, DescriptionEntry{"Q", "en"}, DescriptionEntry{"O1", "en"}),
               UnknownId);
}

TEST_F(SmallFixture, VerifyRelationMatchesRawOracleOnEveryPair) {
  for (const auto& a : store.entries()) {
    for (const auto& b : store.entries()) {
      EXPECT_EQ(verify_relation(store, a, b),
                oracle::relation(store.concepts(), store.groups(), id_of(store, a),
                                 id_of(store, b)));
    }
  }
}

TEST(SamplePair, StrictLabelsAreSoundOnRichFixture) {
  const auto syn = make_synthetic_taxonomy(oracle::rich_spec());
  const auto store = syn.build();
  SamplerConfig config;
  config.seed = 3;
  for (const auto& p : sample_pairs(store, config, 5000)) {
    ASSERT_NE(p.anchor, p.partner);
    ASSERT_EQ(oracle::relation(syn.concepts, syn.groups, id_of(store, p.anchor),
                               id_of(store, p.partner)),
              p.relation);
  }
}

TEST(SamplePair, NonStrictModeKeepsAccidentalRandomLabels) {
  const auto store = load_taxonomy(kFixture);
  SamplerConfig config;
  config.seed = 4;
  config.strict_disjoint_random = false;
  int mislabeled = 0;
  for (const auto& p : sample_pairs(store, config, 3000)) {
    if (p.relation == Relation::kRandom && verify_relation(store, p) != Relation::kRandom) {
      ++mislabeled;
    }
  }
  EXPECT_GT(mislabeled, 0);
}

TEST(SamplePair, RelationsAreUniformOnRichFixture) {
  const auto store = make_synthetic_taxonomy(oracle::rich_spec()).build();
  SamplerConfig config;
  config.seed = 21;
  const int n = 30000;
  std::array<int, 3> counts{};
  for (const auto& p : sample_pairs(store, config, n)) ++counts[to_int(p.relation)];
  const double bound = 3 * std::sqrt((1.0 / 3) * (2.0 / 3) / n);
  for (int c : counts) EXPECT_NEAR(c / double(n), 1.0 / 3, bound);
}

TEST(SamplePair, CrossLingualShareMatchesUniformLanguageMarginals) {
  // Every concept of the synthetic fixture is described in all three
  // languages, so partner language is uniform and independent of the anchor.
  const auto store = make_synthetic_taxonomy(oracle::rich_spec()).build();
  SamplerConfig config;
  config.seed = 5;
  const int n = 10000;
  int differ = 0;
  for (const auto& p : sample_pairs(store, config, n)) differ += p.anchor.language != p.partner.language;
  EXPECT_NEAR(differ / double(n), 2.0 / 3, 0.02);
}

TEST(PairStream, DeterministicAcrossWorkersAndSeeks) {
  const auto store = make_synthetic_taxonomy(oracle::rich_spec()).build();
  SamplerConfig config;
  config.seed = 77;
  const std::size_t n = PairStream::kChunkSize * 2 + 123;
  const auto one = sample_pairs(store, config, n, 1);
  EXPECT_EQ(one, sample_pairs(store, config, n, 4));

  PairStream stream(store, config);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(stream.next(), one[i]);
  stream.seek(PairStream::kChunkSize + 5);
  EXPECT_EQ(stream.next(), one[PairStream::kChunkSize + 5]);
  EXPECT_EQ(stream.position(), PairStream::kChunkSize + 6);

  config.seed = 78;
  EXPECT_NE(one, sample_pairs(store, config, n, 1));
}

TEST_F(SmallFixture, JsonLineHasFixedKeys) {
  PairSample p{entry("O1", "en"), entry("S1", "da"), Relation::kLinked};
  EXPECT_EQ(pair_to_json_line(store, p),
            R"({"anchor_id":"O1","anchor_lang":"en","partner_id":"S1","partner_lang":"da","relation":"linked"})");
}

TEST(Relation, EncodingIsFixed) {
  EXPECT_EQ(to_int(Relation::kRandom), 0);
  EXPECT_EQ(to_int(Relation::kLinked), 1);
  EXPECT_EQ(to_int(Relation::kGrouped), 2);
  EXPECT_EQ(relation_from_string("grouped"), Relation::kGrouped);
  EXPECT_FALSE(relation_from_int(3).has_value());
}

TEST(SamplerConfig, RejectsNonPositiveRetries) {
  SamplerConfig config;
  config.max_retries = 0;
  EXPECT_THROW(config.validate(), ConfigError);
}

}  // namespace
}  // namespace escolm
