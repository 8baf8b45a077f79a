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

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "escolm/corpus_stats.hpp"
#include "escolm/errors.hpp"
#include "escolm/taxonomy.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace escolm {
namespace {

const std::string kFixture = std::string(ESCOLM_TEST_DATA_DIR) + "/small_taxonomy.jsonl";

std::vector<std::string> fixture_lines() {
  std::ifstream in(kFixture);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

TaxonomyStore parse_lines(const std::vector<std::string>& lines, const LoadOptions& options = {},
                          std::vector<std::string>* warnings = nullptr) {
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  std::istringstream in(text);
  return parse_taxonomy(in, options, warnings);
}

LoadOptions lenient() {
  LoadOptions o;
  o.strict = false;
  return o;
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

// Line index of a concept in the fixture.
std::size_t line_of(const std::vector<std::string>& lines, const std::string& id) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find("\"concept_id\": \"" + id + "\"") != std::string::npos) return i;
  }
  throw std::runtime_error("no such fixture concept");
}

class SmallFixture : public ::testing::Test {
 protected:
  TaxonomyStore store = load_taxonomy(kFixture);
};

TEST_F(SmallFixture, LoadsNineConceptsTwoGroupsThreeLanguages) {
  EXPECT_EQ(store.concepts().size(), 9u);
  EXPECT_EQ(store.groups().size(), 2u);
  EXPECT_EQ(store.count(ConceptKind::kOccupation), 3u);
  EXPECT_EQ(store.count(ConceptKind::kSkill), 4u);
  EXPECT_EQ(store.count(ConceptKind::kAlias), 2u);
  EXPECT_EQ(store.languages(), (std::vector<std::string>{"da", "de", "en"}));
}

TEST_F(SmallFixture, ConceptsIterateInIdOrder) {
  std::vector<std::string> ids;
  for (const auto& c : store.concepts()) ids.push_back(c.concept_id);
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
}

TEST_F(SmallFixture, OccupationPages) {
  EXPECT_EQ(as_set(store.occupation_page("O1")), (std::set<std::string>{"O1", "A1", "S1", "S2"}));
  EXPECT_EQ(as_set(store.occupation_page("O2")), (std::set<std::string>{"O2", "S3"}));
  EXPECT_THROW(store.occupation_page("S1"), KindError);
  EXPECT_THROW(store.occupation_page("nope"), UnknownId);
}

TEST_F(SmallFixture, PagesMatchRawRescan) {
  // Independent re-scan of the raw JSONL.
  std::vector<ConceptRecord> raw;
  for (const auto& line : fixture_lines()) {
    const auto j = nlohmann::json::parse(line);
    if (j.at("kind") == "group") continue;
    ConceptRecord r;
    r.concept_id = j.at("concept_id");
    const std::string kind = j.at("kind");
    r.kind = kind == "occupation" ? ConceptKind::kOccupation
             : kind == "skill"    ? ConceptKind::kSkill
                                  : ConceptKind::kAlias;
    if (!j.at("alias_of").is_null()) r.alias_of = j.at("alias_of").get<std::string>();
    r.essential_skills = j.at("essential_skills").get<std::vector<std::string>>();
    r.optional_skills = j.at("optional_skills").get<std::vector<std::string>>();
    raw.push_back(r);
  }
  for (const auto& r : raw) {
    if (r.kind != ConceptKind::kOccupation) continue;
    EXPECT_EQ(as_set(store.occupation_page(r.concept_id)), oracle::page(raw, r.concept_id));
  }
}

TEST_F(SmallFixture, GroupMembersAreUnionOfPages) {
  EXPECT_EQ(as_set(store.group_members("G1")),
            (std::set<std::string>{"O1", "A1", "S1", "S2", "O2", "S3"}));
  for (const auto& g : store.groups()) {
    EXPECT_EQ(as_set(store.group_members(g.group_id)),
              oracle::group(store.concepts(), g.group_id));
  }
  EXPECT_THROW(store.group_members("G9"), UnknownId);
}

TEST_F(SmallFixture, GroupMembersContainEveryPageOfTheGroup) {
  for (const auto& c : store.concepts()) {
    if (c.kind != ConceptKind::kOccupation) continue;
    const auto members = as_set(store.group_members(*c.major_group));
    for (const auto& id : store.occupation_page(c.concept_id)) EXPECT_TRUE(members.contains(id));
  }
}

TEST_F(SmallFixture, AliasesShareTheOccupationDescription) {
  EXPECT_EQ(store.concept_record("A1").description, store.concept_record("O1").description);
  EXPECT_EQ(store.concept_record("A2").description, store.concept_record("O3").description);
}

TEST_F(SmallFixture, DescriptionEntriesSkipBlankDescriptions) {
  const auto all = store.description_entries();
  EXPECT_EQ(std::count(all.begin(), all.end(), DescriptionEntry{"O2", "da"}), 0);
  EXPECT_EQ(std::count(all.begin(), all.end(), DescriptionEntry{"O2", "de"}), 1);
  for (const auto& e : all) {
    EXPECT_FALSE(is_blank(store.concept_record(e.concept_id).description.at(e.language)));
  }
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
}

TEST_F(SmallFixture, DescriptionEntryCountEqualsPerLanguageSum) {
  const auto stats = corpus_stats(store);
  std::size_t sum = 0;
  for (const auto& l : stats.languages) sum += l.instance_count;
  EXPECT_EQ(store.description_entries().size(), sum);
  EXPECT_EQ(sum, 23u);
  const auto en = store.description_entries(std::set<std::string>{"en"});
  EXPECT_EQ(en.size(), 9u);
  for (const auto& e : en) EXPECT_EQ(e.language, "en");
}

TEST_F(SmallFixture, LabelFallsBackToEmpty) {
  const auto a2 = *store.find("A2");
  const auto da = *store.find_language("da");
  EXPECT_EQ(store.label(EntryRef{a2, da}), "");
  EXPECT_FALSE(store.description(EntryRef{a2, da}).empty());
}

TEST_F(SmallFixture, SerializeRoundTripsExactly) {
  std::ostringstream first;
  serialize_taxonomy(store, first);
  std::istringstream in(first.str());
  const TaxonomyStore reloaded = parse_taxonomy(in);
  EXPECT_EQ(reloaded, store);
  std::ostringstream second;
  serialize_taxonomy(reloaded, second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(TaxonomyErrors, DanglingSkillReference) {
  EXPECT_THROW(load_taxonomy(std::string(ESCOLM_TEST_DATA_DIR) + "/dangling_taxonomy.jsonl"),
               DanglingReference);
}

TEST(TaxonomyErrors, DanglingAliasAndGroup) {
  auto lines = fixture_lines();
  auto i = line_of(lines, "A1");
  lines[i].replace(lines[i].find("\"alias_of\": \"O1\""), 16, "\"alias_of\": \"O9\"");
  EXPECT_THROW(parse_lines(lines), DanglingReference);

  lines = fixture_lines();
  i = line_of(lines, "O2");
  lines[i].replace(lines[i].find("\"major_group\": \"G1\""), 19, "\"major_group\": \"G7\"");
  EXPECT_THROW(parse_lines(lines), DanglingReference);
}

TEST(TaxonomyErrors, WrongKindReference) {
  auto lines = fixture_lines();
  const auto i = line_of(lines, "O2");
  lines[i].replace(lines[i].find("[\"S3\"]"), 6, "[\"O1\"]");
  EXPECT_THROW(parse_lines(lines), DanglingReference);
}

TEST(TaxonomyErrors, DuplicateId) {
  auto lines = fixture_lines();
  lines.push_back(lines[line_of(lines, "S4")]);
  EXPECT_THROW(parse_lines(lines), DuplicateId);
}

TEST(TaxonomyErrors, MissingFieldReportsLineNumber) {
  auto lines = fixture_lines();
  const auto i = line_of(lines, "S2");
  const auto at = lines[i].find("\"preferred_label\"");
  lines[i].replace(at, std::string("\"preferred_label\"").size(), "\"pref_label\"");
  try {
    parse_lines(lines, lenient());
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), i + 1);
    EXPECT_NE(std::string(e.what()).find("preferred_label"), std::string::npos);
  }
}

TEST(TaxonomyErrors, UnknownFieldStrictVersusLenient) {
  auto lines = fixture_lines();
  const auto i = line_of(lines, "S3");
  lines[i].insert(1, "\"broader\": [], ");
  EXPECT_THROW(parse_lines(lines), SchemaError);
  std::vector<std::string> warnings;
  const auto store = parse_lines(lines, lenient(), &warnings);
  EXPECT_EQ(store.concepts().size(), 9u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("line " + std::to_string(i + 1)), std::string::npos);
}

TEST(TaxonomyErrors, KindConstraints) {
  auto lines = fixture_lines();
  auto i = line_of(lines, "O3");
  lines[i].replace(lines[i].find("\"major_group\": \"G2\""), 19, "\"major_group\": null");
  EXPECT_THROW(parse_lines(lines), SchemaError);

  lines = fixture_lines();
  i = line_of(lines, "S4");
  lines[i].replace(lines[i].find("\"alias_of\": null"), 16, "\"alias_of\": \"O1\"");
  EXPECT_THROW(parse_lines(lines), SchemaError);
}

TEST(TaxonomyErrors, LanguageCodes) {
  auto lines = fixture_lines();
  const auto i = line_of(lines, "S3");
  lines[i].replace(lines[i].find("{\"en\": \"perform"), 7, "{\"EN\": ");
  EXPECT_THROW(parse_lines(lines), SchemaError);

  LoadOptions only_en_de;
  only_en_de.declared_languages = std::set<std::string>{"en", "de"};
  EXPECT_THROW(parse_lines(fixture_lines(), only_en_de), SchemaError);
}

TEST(TaxonomyErrors, MalformedJsonLine) {
  auto lines = fixture_lines();
  lines.insert(lines.begin() + 3, "{not json");
  try {
    parse_lines(lines);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

ConceptRecord occupation(const std::string& id, const std::string& group) {
  ConceptRecord r;
  r.concept_id = id;
  r.kind = ConceptKind::kOccupation;
  r.major_group = group;
  r.preferred_label = {{"en", id}};
  r.description = {{"en", "a b c"}};
  return r;
}

MajorGroup make_group(const std::string& id) { return {id, {{"en", id}}, {}}; }

TEST(TaxonomyStore, SingletonPageAndGroup) {
  const auto store = TaxonomyStore::build({occupation("O", "G")}, {make_group("G")});
  EXPECT_EQ(store.occupation_page("O"), std::vector<std::string>{"O"});
  EXPECT_EQ(store.group_members("G"), std::vector<std::string>{"O"});
}

TEST(CorpusStats, HandCountedLengthsAndEmptyLanguage) {
  auto a = occupation("O1", "G");
  a.description = {{"en", "one two three"}};
  auto b = occupation("O2", "G");
  b.description = {{"en", "one two three four five"}, {"da", " "}};
  const auto store = TaxonomyStore::build({a, b}, {make_group("G")});
  const auto stats = corpus_stats(store);
  ASSERT_EQ(stats.languages.size(), 2u);
  const auto& da = stats.languages[0];
  const auto& en = stats.languages[1];
  EXPECT_EQ(da.language, "da");
  EXPECT_EQ(da.instance_count, 0u);
  EXPECT_FALSE(da.mean_token_length.has_value());
  EXPECT_EQ(en.instance_count, 2u);
  EXPECT_DOUBLE_EQ(*en.mean_token_length, 4.0);
  EXPECT_EQ(*en.max_token_length, 5u);

  const auto j = nlohmann::json::parse(stats_to_json(stats));
  EXPECT_FALSE(j.at("languages").contains("da"));
  EXPECT_EQ(j.at("languages").at("en").at("instance_count"), 2);
}

TEST(CorpusStats, JsonAndTableAgree) {
  const auto stats = corpus_stats(load_taxonomy(kFixture));
  const auto j = nlohmann::json::parse(stats_to_json(stats));
  std::ostringstream table;
  write_stats_table(stats, table);
  std::istringstream rows(table.str());
  std::string header;
  std::getline(rows, header);
  std::size_t seen = 0;
  for (std::string lang; rows >> lang;) {
    std::size_t count, max_len;
    double mean;
    rows >> count >> mean >> max_len;
    if (lang == "total") {
      EXPECT_EQ(count, j.at("total_instances").get<std::size_t>());
      continue;
    }
    const auto& l = j.at("languages").at(lang);
    EXPECT_EQ(count, l.at("instance_count").get<std::size_t>());
    EXPECT_NEAR(mean, l.at("mean_token_length").get<double>(), 5e-5);
    EXPECT_EQ(max_len, l.at("max_token_length").get<std::size_t>());
    ++seen;
  }
  EXPECT_EQ(seen, j.at("languages").size());
}

}  // namespace
}  // namespace escolm
