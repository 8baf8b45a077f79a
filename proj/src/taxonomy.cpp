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

#include "escolm/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "escolm/errors.hpp"
#include "json.hpp"

namespace escolm {

using nlohmann::json;

std::string_view to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::kOccupation:
      return "occupation";
    case ConceptKind::kSkill:
      return "skill";
    case ConceptKind::kAlias:
      return "alias";
  }
  return "?";
}

bool is_valid_language_code(std::string_view code) {
  return code.size() == 2 && code[0] >= 'a' && code[0] <= 'z' && code[1] >= 'a' &&
         code[1] <= 'z';
}

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  });
}

namespace {

std::string where(std::span<const std::size_t> lines, std::size_t i) {
  if (i < lines.size()) return " (line " + std::to_string(lines[i]) + ")";
  return {};
}

std::size_t line_of(std::span<const std::size_t> lines, std::size_t i) {
  return i < lines.size() ? lines[i] : 0;
}

void check_text_map(const TextMap& map, const LoadOptions& options, std::size_t line,
                    const std::string& owner, const char* field) {
  for (const auto& [lang, text] : map) {
    if (!is_valid_language_code(lang)) {
      throw SchemaError(line, owner + ": field '" + field + "' has invalid language tag '" +
                                  lang + "'");
    }
    if (options.declared_languages && !options.declared_languages->contains(lang)) {
      throw SchemaError(line, owner + ": language '" + lang + "' is not declared");
    }
  }
}

}  // namespace

TaxonomyStore TaxonomyStore::build(std::vector<ConceptRecord> concepts,
                                   std::vector<MajorGroup> groups,
                                   std::span<const std::size_t> concept_lines,
                                   const LoadOptions& options) {
  // Keep line numbers attached to their records through the sort.
  std::vector<std::size_t> order(concepts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return concepts[a].concept_id < concepts[b].concept_id;
  });
  std::vector<std::size_t> lines;
  TaxonomyStore store;
  store.concepts_.reserve(concepts.size());
  for (std::size_t i : order) {
    store.concepts_.push_back(std::move(concepts[i]));
    lines.push_back(line_of(concept_lines, i));
  }
  const auto& cs = store.concepts_;
  for (std::size_t i = 1; i < cs.size(); ++i) {
    if (cs[i].concept_id == cs[i - 1].concept_id) {
      throw DuplicateId("concept '" + cs[i].concept_id + "'" + where(lines, i - 1) +
                        where(lines, i));
    }
  }

  std::sort(groups.begin(), groups.end(),
            [](const MajorGroup& a, const MajorGroup& b) { return a.group_id < b.group_id; });
  for (std::size_t i = 1; i < groups.size(); ++i) {
    if (groups[i].group_id == groups[i - 1].group_id) {
      throw DuplicateId("group '" + groups[i].group_id + "'");
    }
  }
  std::set<std::string> languages;
  for (const auto& g : groups) {
    if (g.group_id.empty()) throw SchemaError(0, "group with empty group_id");
    if (std::all_of(g.title.begin(), g.title.end(),
                    [](const auto& kv) { return is_blank(kv.second); })) {
      throw SchemaError(0, "group '" + g.group_id + "' has no nonempty title");
    }
    check_text_map(g.title, options, 0, "group '" + g.group_id + "'", "title");
    check_text_map(g.description, options, 0, "group '" + g.group_id + "'", "description");
    for (const auto& [lang, text] : g.title) languages.insert(lang);
    for (const auto& [lang, text] : g.description) languages.insert(lang);
  }
  store.groups_ = std::move(groups);

  for (std::size_t i = 0; i < cs.size(); ++i) {
    const ConceptRecord& c = cs[i];
    const std::size_t line = lines[i];
    const std::string owner = "concept '" + c.concept_id + "'";
    if (c.concept_id.empty()) throw SchemaError(line, "empty concept_id");
    check_text_map(c.preferred_label, options, line, owner, "preferred_label");
    check_text_map(c.description, options, line, owner, "description");
    for (const auto& [lang, text] : c.preferred_label) languages.insert(lang);
    for (const auto& [lang, text] : c.description) languages.insert(lang);

    const bool occupation = c.kind == ConceptKind::kOccupation;
    if (occupation && !c.major_group) {
      throw SchemaError(line, owner + ": occupation without major_group");
    }
    if (!occupation && c.major_group) {
      throw SchemaError(line, owner + ": only occupations carry a major_group");
    }
    if (!occupation && (!c.essential_skills.empty() || !c.optional_skills.empty())) {
      throw SchemaError(line, owner + ": only occupations list skills");
    }
    if (c.kind == ConceptKind::kAlias && !c.alias_of) {
      throw SchemaError(line, owner + ": alias without alias_of");
    }
    if (c.kind != ConceptKind::kAlias && c.alias_of) {
      throw SchemaError(line, owner + ": only aliases carry alias_of");
    }
  }
  store.languages_.assign(languages.begin(), languages.end());

  // Referential closure.
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const ConceptRecord& c = cs[i];
    if (c.major_group && !store.find_group(*c.major_group)) {
      throw DanglingReference("concept '" + c.concept_id + "' references unknown group '" +
                              *c.major_group + "'" + where(lines, i));
    }
    for (const auto* list : {&c.essential_skills, &c.optional_skills}) {
      for (const auto& sid : *list) {
        const auto target = store.find(sid);
        if (!target) {
          throw DanglingReference("concept '" + c.concept_id + "' references unknown skill '" +
                                  sid + "'" + where(lines, i));
        }
        if (cs[*target].kind != ConceptKind::kSkill) {
          throw DanglingReference("concept '" + c.concept_id + "' lists '" + sid +
                                  "' as a skill but it is a " +
                                  std::string(to_string(cs[*target].kind)) + where(lines, i));
        }
      }
    }
    if (c.alias_of) {
      const auto target = store.find(*c.alias_of);
      if (!target) {
        throw DanglingReference("alias '" + c.concept_id + "' references unknown occupation '" +
                                *c.alias_of + "'" + where(lines, i));
      }
      if (cs[*target].kind != ConceptKind::kOccupation) {
        throw DanglingReference("alias '" + c.concept_id + "' targets '" + *c.alias_of +
                                "' which is not an occupation" + where(lines, i));
      }
    }
  }

  // Aliases share their occupation's definition.
  for (auto& c : store.concepts_) {
    if (c.kind == ConceptKind::kAlias) {
      c.description = store.concepts_[*store.find(*c.alias_of)].description;
    }
  }

  store.build_indexes();
  return store;
}

void TaxonomyStore::build_indexes() {
  const std::size_t n = concepts_.size();
  entry_offsets_.assign(n + 1, 0);
  entries_.clear();
  for (std::size_t c = 0; c < n; ++c) {
    entry_offsets_[c] = static_cast<std::uint32_t>(entries_.size());
    for (const auto& [lang, text] : concepts_[c].description) {
      if (is_blank(text)) continue;
      entries_.push_back({static_cast<ConceptIndex>(c), *find_language(lang)});
    }
  }
  entry_offsets_[n] = static_cast<std::uint32_t>(entries_.size());

  pages_.assign(n, {});
  for (std::size_t c = 0; c < n; ++c) {
    const auto& rec = concepts_[c];
    if (rec.kind == ConceptKind::kOccupation) {
      pages_[c].push_back(static_cast<ConceptIndex>(c));
      for (const auto* list : {&rec.essential_skills, &rec.optional_skills}) {
        for (const auto& sid : *list) pages_[c].push_back(*find(sid));
      }
    } else if (rec.kind == ConceptKind::kAlias) {
      pages_[*find(*rec.alias_of)].push_back(static_cast<ConceptIndex>(c));
    }
  }
  for (auto& p : pages_) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }

  owners_.assign(n, {});
  for (std::size_t o = 0; o < n; ++o) {
    for (ConceptIndex m : pages_[o]) owners_[m].push_back(static_cast<ConceptIndex>(o));
  }

  group_occupations_.assign(groups_.size(), {});
  for (std::size_t c = 0; c < n; ++c) {
    if (concepts_[c].kind == ConceptKind::kOccupation) {
      group_occupations_[*find_group(*concepts_[c].major_group)].push_back(
          static_cast<ConceptIndex>(c));
    }
  }

  concept_groups_.assign(n, {});
  group_members_.assign(groups_.size(), {});
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (ConceptIndex o : group_occupations_[g]) {
      for (ConceptIndex m : pages_[o]) group_members_[g].push_back(m);
    }
    auto& members = group_members_[g];
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (ConceptIndex m : members) concept_groups_[m].push_back(static_cast<GroupIndex>(g));
  }
}

std::size_t TaxonomyStore::count(ConceptKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      concepts_.begin(), concepts_.end(), [kind](const auto& c) { return c.kind == kind; }));
}

std::optional<ConceptIndex> TaxonomyStore::find(std::string_view concept_id) const {
  auto it = std::lower_bound(
      concepts_.begin(), concepts_.end(), concept_id,
      [](const ConceptRecord& c, std::string_view id) { return c.concept_id < id; });
  if (it == concepts_.end() || it->concept_id != concept_id) return std::nullopt;
  return static_cast<ConceptIndex>(it - concepts_.begin());
}

std::optional<GroupIndex> TaxonomyStore::find_group(std::string_view group_id) const {
  auto it = std::lower_bound(
      groups_.begin(), groups_.end(), group_id,
      [](const MajorGroup& g, std::string_view id) { return g.group_id < id; });
  if (it == groups_.end() || it->group_id != group_id) return std::nullopt;
  return static_cast<GroupIndex>(it - groups_.begin());
}

std::optional<LanguageIndex> TaxonomyStore::find_language(std::string_view code) const {
  auto it = std::lower_bound(languages_.begin(), languages_.end(), code);
  if (it == languages_.end() || *it != code) return std::nullopt;
  return static_cast<LanguageIndex>(it - languages_.begin());
}

const ConceptRecord& TaxonomyStore::concept_record(std::string_view concept_id) const {
  const auto idx = find(concept_id);
  if (!idx) throw UnknownId("concept '" + std::string(concept_id) + "'");
  return concepts_[*idx];
}

std::vector<std::string> TaxonomyStore::occupation_page(std::string_view occupation_id) const {
  const auto idx = find(occupation_id);
  if (!idx) throw UnknownId("concept '" + std::string(occupation_id) + "'");
  if (concepts_[*idx].kind != ConceptKind::kOccupation) {
    throw KindError("'" + std::string(occupation_id) + "' is a " +
                    std::string(to_string(concepts_[*idx].kind)) + ", not an occupation");
  }
  std::vector<std::string> out;
  for (ConceptIndex m : pages_[*idx]) out.push_back(concepts_[m].concept_id);
  return out;
}

std::vector<std::string> TaxonomyStore::group_members(std::string_view group_id) const {
  const auto g = find_group(group_id);
  if (!g) throw UnknownId("group '" + std::string(group_id) + "'");
  std::vector<std::string> out;
  for (ConceptIndex m : group_members_[*g]) out.push_back(concepts_[m].concept_id);
  return out;
}

std::vector<DescriptionEntry> TaxonomyStore::description_entries(
    const std::optional<std::set<std::string>>& language_filter) const {
  std::vector<DescriptionEntry> out;
  for (const EntryRef& e : entries_) {
    const std::string& lang = languages_[e.language];
    if (language_filter && !language_filter->contains(lang)) continue;
    out.push_back({concepts_[e.concept_index].concept_id, lang});
  }
  return out;
}

std::span<const EntryRef> TaxonomyStore::entries_of(ConceptIndex c) const {
  return std::span<const EntryRef>(entries_).subspan(
      entry_offsets_[c], entry_offsets_[c + 1] - entry_offsets_[c]);
}

std::span<const ConceptIndex> TaxonomyStore::page(ConceptIndex occupation) const {
  return pages_[occupation];
}

std::span<const ConceptIndex> TaxonomyStore::page_owners(ConceptIndex c) const {
  return owners_[c];
}

std::span<const GroupIndex> TaxonomyStore::groups_of(ConceptIndex c) const {
  return concept_groups_[c];
}

std::span<const ConceptIndex> TaxonomyStore::group_member_indices(GroupIndex g) const {
  return group_members_[g];
}

std::span<const ConceptIndex> TaxonomyStore::group_occupations(GroupIndex g) const {
  return group_occupations_[g];
}

const std::string& TaxonomyStore::description(const EntryRef& e) const {
  return concepts_[e.concept_index].description.at(languages_[e.language]);
}

const std::string& TaxonomyStore::label(const EntryRef& e) const {
  static const std::string kEmpty;
  const auto& labels = concepts_[e.concept_index].preferred_label;
  auto it = labels.find(languages_[e.language]);
  return it == labels.end() ? kEmpty : it->second;
}

// ---------------------------------------------------------------------------
// JSONL reading and writing.

namespace {

const json* field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json* v = field(obj, key);
  if (!v) throw SchemaError(line, std::string("missing field '") + key + "'");
  if (!v->is_string()) throw SchemaError(line, std::string("field '") + key + "' must be a string");
  return v->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
  const json* v = field(obj, key);
  if (!v || v->is_null()) return std::nullopt;
  if (!v->is_string()) {
    throw SchemaError(line, std::string("field '") + key + "' must be a string or null");
  }
  return v->get<std::string>();
}

TextMap text_map(const json& obj, const char* key, std::size_t line, bool required) {
  TextMap out;
  const json* v = field(obj, key);
  if (!v) {
    if (required) throw SchemaError(line, std::string("missing field '") + key + "'");
    return out;
  }
  if (!v->is_object()) {
    throw SchemaError(line, std::string("field '") + key + "' must be an object {lang: text}");
  }
  for (const auto& [lang, text] : v->items()) {
    if (!text.is_string()) {
      throw SchemaError(line, std::string("field '") + key + "." + lang + "' must be a string");
    }
    out.emplace(lang, text.get<std::string>());
  }
  return out;
}

std::vector<std::string> string_list(const json& obj, const char* key, std::size_t line) {
  std::vector<std::string> out;
  const json* v = field(obj, key);
  if (!v || v->is_null()) return out;
  if (!v->is_array()) throw SchemaError(line, std::string("field '") + key + "' must be a list");
  for (const auto& item : *v) {
    if (!item.is_string()) {
      throw SchemaError(line, std::string("field '") + key + "' must list strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

void check_fields(const json& obj, std::initializer_list<std::string_view> known,
                  std::size_t line, const LoadOptions& options,
                  std::vector<std::string>* warnings) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) != known.end()) continue;
    if (options.strict) throw SchemaError(line, "unknown field '" + key + "'");
    if (warnings) {
      warnings->push_back("line " + std::to_string(line) + ": unknown field '" + key +
                          "' ignored");
    }
  }
}

}  // namespace

TaxonomyStore parse_taxonomy(std::istream& in, const LoadOptions& options,
                             std::vector<std::string>* warnings) {
  std::vector<ConceptRecord> concepts;
  std::vector<std::size_t> lines;
  std::vector<MajorGroup> groups;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (is_blank(text)) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw SchemaError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw SchemaError(line, "record must be a JSON object");
    const std::string kind = require_string(obj, "kind", line);
    if (kind == "group") {
      check_fields(obj, {"kind", "group_id", "title", "description"}, line, options, warnings);
      MajorGroup g;
      g.group_id = require_string(obj, "group_id", line);
      g.title = text_map(obj, "title", line, true);
      g.description = text_map(obj, "description", line, false);
      if (std::all_of(g.title.begin(), g.title.end(),
                      [](const auto& kv) { return is_blank(kv.second); })) {
        throw SchemaError(line, "group '" + g.group_id + "' has no nonempty title");
      }
      check_text_map(g.title, options, line, "group '" + g.group_id + "'", "title");
      check_text_map(g.description, options, line, "group '" + g.group_id + "'", "description");
      groups.push_back(std::move(g));
      continue;
    }
    ConceptRecord c;
    if (kind == "occupation") {
      c.kind = ConceptKind::kOccupation;
    } else if (kind == "skill") {
      c.kind = ConceptKind::kSkill;
    } else if (kind == "alias") {
      c.kind = ConceptKind::kAlias;
    } else {
      throw SchemaError(line, "unknown kind '" + kind + "'");
    }
    check_fields(obj,
                 {"concept_id", "kind", "esco_code", "alias_of", "major_group", "preferred_label",
                  "description", "essential_skills", "optional_skills"},
                 line, options, warnings);
    c.concept_id = require_string(obj, "concept_id", line);
    if (field(obj, "esco_code")) c.esco_code = require_string(obj, "esco_code", line);
    c.alias_of = optional_string(obj, "alias_of", line);
    c.major_group = optional_string(obj, "major_group", line);
    c.preferred_label = text_map(obj, "preferred_label", line, true);
    c.description = text_map(obj, "description", line, c.kind != ConceptKind::kAlias);
    c.essential_skills = string_list(obj, "essential_skills", line);
    c.optional_skills = string_list(obj, "optional_skills", line);
    concepts.push_back(std::move(c));
    lines.push_back(line);
  }
  return TaxonomyStore::build(std::move(concepts), std::move(groups), lines, options);
}

TaxonomyStore load_taxonomy(const std::filesystem::path& path, const LoadOptions& options,
                            std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open taxonomy '" + path.string() + "'");
  return parse_taxonomy(in, options, warnings);
}

void serialize_taxonomy(const TaxonomyStore& store, std::ostream& out) {
  for (const auto& g : store.groups()) {
    json obj = {{"kind", "group"},
                {"group_id", g.group_id},
                {"title", g.title},
                {"description", g.description}};
    out << obj.dump() << '\n';
  }
  for (const auto& c : store.concepts()) {
    json obj = {{"concept_id", c.concept_id},
                {"kind", std::string(to_string(c.kind))},
                {"esco_code", c.esco_code},
                {"alias_of", c.alias_of ? json(*c.alias_of) : json(nullptr)},
                {"major_group", c.major_group ? json(*c.major_group) : json(nullptr)},
                {"preferred_label", c.preferred_label},
                {"description", c.description},
                {"essential_skills", c.essential_skills},
                {"optional_skills", c.optional_skills}};
    out << obj.dump() << '\n';
  }
}

}  // namespace escolm
