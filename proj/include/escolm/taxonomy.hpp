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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace escolm {

enum class ConceptKind : std::uint8_t { kOccupation, kSkill, kAlias };

std::string_view to_string(ConceptKind kind);

// Language tag -> text. Keys are two-letter lowercase ASCII codes.
using TextMap = std::map<std::string, std::string>;

bool is_valid_language_code(std::string_view code);

// Whitespace-only text counts as empty everywhere in the pipeline.
bool is_blank(std::string_view text);

struct MajorGroup {
  std::string group_id;
  TextMap title;
  TextMap description;

  bool operator==(const MajorGroup&) const = default;
};

struct ConceptRecord {
  std::string concept_id;
  ConceptKind kind = ConceptKind::kSkill;
  std::string esco_code;
  TextMap preferred_label;
  TextMap description;
  std::optional<std::string> alias_of;     // aliases only
  std::optional<std::string> major_group;  // occupations only
  std::vector<std::string> essential_skills;
  std::vector<std::string> optional_skills;

  bool operator==(const ConceptRecord&) const = default;
};

// Dense handles into a TaxonomyStore. Concepts are numbered in concept_id
// order and languages in code order, so handle order is the canonical
// iteration order.
using ConceptIndex = std::uint32_t;
using LanguageIndex = std::uint16_t;
using GroupIndex = std::uint32_t;

struct EntryRef {
  ConceptIndex concept_index;
  LanguageIndex language;

  auto operator<=>(const EntryRef&) const = default;
};

struct DescriptionEntry {
  std::string concept_id;
  std::string language;

  auto operator<=>(const DescriptionEntry&) const = default;
};

struct LoadOptions {
  // Reject unknown fields instead of warning about them.
  bool strict = true;
  // When set, every language tag must belong to this set.
  std::optional<std::set<std::string>> declared_languages;
};

// Immutable, referentially closed view of a taxonomy dump. All indexes are
// built once at construction; every accessor is const and thread-safe.
class TaxonomyStore {
 public:
  // Validates and indexes. `concept_lines`, when non-empty, gives the source
  // line of each record for diagnostics.
  static TaxonomyStore build(std::vector<ConceptRecord> concepts,
                             std::vector<MajorGroup> groups,
                             std::span<const std::size_t> concept_lines = {},
                             const LoadOptions& options = {});

  const std::vector<ConceptRecord>& concepts() const { return concepts_; }
  const std::vector<MajorGroup>& groups() const { return groups_; }
  const std::vector<std::string>& languages() const { return languages_; }

  std::size_t count(ConceptKind kind) const;

  std::optional<ConceptIndex> find(std::string_view concept_id) const;
  std::optional<GroupIndex> find_group(std::string_view group_id) const;
  std::optional<LanguageIndex> find_language(std::string_view code) const;

  // Throws UnknownId.
  const ConceptRecord& concept_record(std::string_view concept_id) const;
  const ConceptRecord& at(ConceptIndex index) const { return concepts_[index]; }
  const std::string& language(LanguageIndex index) const { return languages_[index]; }

  // Occupation itself, its aliases, essential and optional skills. Sorted ids.
  // Throws UnknownId, KindError.
  std::vector<std::string> occupation_page(std::string_view occupation_id) const;
  // Union of the pages of every occupation in the group. Throws UnknownId.
  std::vector<std::string> group_members(std::string_view group_id) const;
  // (concept, language) pairs with a non-blank description, sorted.
  std::vector<DescriptionEntry> description_entries(
      const std::optional<std::set<std::string>>& language_filter = std::nullopt) const;

  // Index-level accessors used by the sampler.
  std::span<const EntryRef> entries() const { return entries_; }
  std::span<const EntryRef> entries_of(ConceptIndex c) const;
  std::span<const ConceptIndex> page(ConceptIndex occupation) const;
  // Occupations whose page contains `c` (sorted).
  std::span<const ConceptIndex> page_owners(ConceptIndex c) const;
  // Groups whose member set contains `c` (sorted).
  std::span<const GroupIndex> groups_of(ConceptIndex c) const;
  std::span<const ConceptIndex> group_member_indices(GroupIndex g) const;
  std::span<const ConceptIndex> group_occupations(GroupIndex g) const;

  const std::string& description(const EntryRef& e) const;
  // Label in the entry's language, or empty when that translation is missing.
  const std::string& label(const EntryRef& e) const;

  bool operator==(const TaxonomyStore& other) const {
    return concepts_ == other.concepts_ && groups_ == other.groups_ &&
           languages_ == other.languages_;
  }

 private:
  TaxonomyStore() = default;
  void build_indexes();

  std::vector<ConceptRecord> concepts_;
  std::vector<MajorGroup> groups_;
  std::vector<std::string> languages_;

  std::vector<EntryRef> entries_;
  std::vector<std::uint32_t> entry_offsets_;  // per concept, size n+1
  std::vector<std::vector<ConceptIndex>> pages_;
  std::vector<std::vector<ConceptIndex>> owners_;
  std::vector<std::vector<GroupIndex>> concept_groups_;
  std::vector<std::vector<ConceptIndex>> group_members_;
  std::vector<std::vector<ConceptIndex>> group_occupations_;
};

// JSONL ingestion. Throws SchemaError, DanglingReference, DuplicateId.
// Unknown-field warnings (non-strict mode) are appended to `warnings`.
TaxonomyStore parse_taxonomy(std::istream& in, const LoadOptions& options = {},
                             std::vector<std::string>* warnings = nullptr);
TaxonomyStore load_taxonomy(const std::filesystem::path& path,
                            const LoadOptions& options = {},
                            std::vector<std::string>* warnings = nullptr);

// Canonical JSONL: groups by id, then concepts by id, keys sorted. Loading
// the output reproduces an equal store and re-serializing is byte-identical.
void serialize_taxonomy(const TaxonomyStore& store, std::ostream& out);

}  // namespace escolm
