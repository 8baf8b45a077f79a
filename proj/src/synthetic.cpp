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

#include "escolm/synthetic.hpp"

#include <set>

#include <fmt/format.h>

#include "escolm/errors.hpp"
#include "escolm/rng.hpp"

namespace escolm {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

// Draws words whose shifted forms never collide across languages.
class WordSource {
 public:
  WordSource(Rng& rng, std::size_t languages) : rng_(rng), languages_(languages) {}

  std::string next() {
    for (;;) {
      std::string word;
      const std::size_t syllables = 2 + rng_.uniform(2);
      for (std::size_t s = 0; s < syllables; ++s) {
        word += kConsonants[rng_.uniform(kConsonants.size())];
        word += kVowels[rng_.uniform(kVowels.size())];
      }
      bool clash = false;
      for (std::size_t l = 0; l < languages_ && !clash; ++l) {
        clash = taken_.contains(shift_letters(word, static_cast<int>(l)));
      }
      if (clash) continue;
      for (std::size_t l = 0; l < languages_; ++l) {
        taken_.insert(shift_letters(word, static_cast<int>(l)));
      }
      return word;
    }
  }

  std::vector<std::string> next(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(next());
    return out;
  }

 private:
  Rng& rng_;
  std::size_t languages_;
  std::set<std::string> taken_;
};

struct Pool {
  std::vector<std::string> filler;
  Rng& rng;

  const std::string& any(const std::vector<std::string>& words) {
    return words[rng.uniform(words.size())];
  }
  const std::string& filler_word() { return any(filler); }
};

// Words in a fixed sentence frame with filler between the key words.
std::string sentence(Pool& pool, const std::vector<std::string>& keys) {
  std::string out;
  for (const auto& key : keys) {
    if (!out.empty()) out += ' ';
    out += pool.filler_word() + ' ' + key;
  }
  return out + " " + pool.filler_word() + ".";
}

TextMap translate(const std::string& text, const std::vector<std::string>& languages) {
  TextMap out;
  for (std::size_t l = 0; l < languages.size(); ++l) {
    out[languages[l]] = shift_letters(text, static_cast<int>(l));
  }
  return out;
}

}  // namespace

std::string shift_letters(std::string_view text, int shift) {
  std::string out(text);
  const int s = ((shift % 26) + 26) % 26;
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>('a' + (c - 'a' + s) % 26);
  }
  return out;
}

TaxonomyStore SyntheticTaxonomy::build() const { return TaxonomyStore::build(concepts, groups); }

SyntheticTaxonomy make_synthetic_taxonomy(const SyntheticSpec& spec) {
  if (spec.groups == 0 || spec.occupations_per_group == 0) {
    throw ConfigError("synthetic taxonomy needs at least one group and occupation");
  }
  if (spec.languages.empty() || spec.languages.size() > 26) {
    throw ConfigError("synthetic taxonomy needs between 1 and 26 languages");
  }
  if (spec.shared_skills > 0 && spec.groups * spec.occupations_per_group < 2) {
    throw ConfigError("shared skills need at least two occupations");
  }
  Rng rng = derive_stream(spec.seed, "synthetic");
  WordSource words(rng, spec.languages.size());
  Pool pool{words.next(std::max<std::size_t>(spec.filler_words, 1)), rng};
  const auto& langs = spec.languages;

  SyntheticTaxonomy out;
  struct OccupationInfo {
    std::string id;
    std::vector<std::string> theme;
    std::vector<std::string> domain;
  };
  std::vector<OccupationInfo> occupations;
  std::vector<std::vector<std::string>> domains;

  for (std::size_t g = 0; g < spec.groups; ++g) {
    const auto domain = words.next(2);
    domains.push_back(domain);
    MajorGroup group;
    group.group_id = fmt::format("grp-{}", g + 1);
    group.title = translate(domain[0] + " " + domain[1], langs);
    group.description = translate(sentence(pool, domain), langs);
    out.groups.push_back(std::move(group));
  }

  std::size_t skill_counter = 0;
  auto add_skill = [&](const std::vector<std::string>& context) {
    const auto own = words.next(2);
    ConceptRecord skill;
    skill.concept_id = fmt::format("skill-{:04}", ++skill_counter);
    skill.kind = ConceptKind::kSkill;
    skill.esco_code = fmt::format("s{}", skill_counter);
    skill.preferred_label = translate(own[0] + " " + own[1], langs);
    std::vector<std::string> keys = {own[0], own[1]};
    keys.insert(keys.end(), context.begin(), context.end());
    skill.description = translate(sentence(pool, keys), langs);
    out.concepts.push_back(std::move(skill));
    return out.concepts.back().concept_id;
  };

  for (std::size_t g = 0; g < spec.groups; ++g) {
    for (std::size_t o = 0; o < spec.occupations_per_group; ++o) {
      OccupationInfo info{fmt::format("occ-{}-{:02}", g + 1, o + 1), words.next(2), domains[g]};
      std::vector<std::string> page_keys = {info.theme[0], info.domain[0]};
      if (spec.code_markers) {
        page_keys.push_back(fmt::format("{}{:02}", g + 1, o + 1));
        page_keys.push_back(fmt::format("{}", g + 1));
      }
      ConceptRecord occ;
      occ.concept_id = info.id;
      occ.kind = ConceptKind::kOccupation;
      occ.esco_code = fmt::format("{}.{}", g + 1, o + 1);
      occ.major_group = out.groups[g].group_id;
      occ.preferred_label = translate(info.theme[0] + " " + info.theme[1], langs);
      std::vector<std::string> occ_keys = page_keys;
      occ_keys.push_back(info.theme[1]);
      occ_keys.push_back(info.domain[1]);
      occ.description = translate(sentence(pool, occ_keys), langs);
      for (std::size_t s = 0; s < spec.skills_per_occupation; ++s) {
        const auto id = add_skill(page_keys);
        (s % 2 == 0 ? occ.essential_skills : occ.optional_skills).push_back(id);
      }
      for (std::size_t a = 0; a < spec.aliases_per_occupation; ++a) {
        const auto extra = words.next();
        ConceptRecord alias;
        alias.concept_id = fmt::format("{}-alias-{}", info.id, a + 1);
        alias.kind = ConceptKind::kAlias;
        alias.alias_of = info.id;
        alias.preferred_label = translate(extra + " " + info.theme[0], langs);
        out.concepts.push_back(std::move(alias));
      }
      out.concepts.push_back(std::move(occ));
      occupations.push_back(std::move(info));
    }
  }

  // Shared skills link an occupation with one from the next group over.
  const std::size_t per_group = spec.occupations_per_group;
  for (std::size_t s = 0; s < spec.shared_skills; ++s) {
    const std::size_t first = rng.uniform(occupations.size());
    std::size_t second = (first + per_group) % occupations.size();
    if (second == first) second = (first + 1) % occupations.size();
    const auto id = add_skill({occupations[first].theme[0], occupations[second].theme[0]});
    for (std::size_t owner : {first, second}) {
      for (auto& c : out.concepts) {
        if (c.concept_id == occupations[owner].id) c.optional_skills.push_back(id);
      }
    }
  }
  return out;
}

}  // namespace escolm
