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

#include <cstdint>
#include <string>
#include <vector>

#include "escolm/taxonomy.hpp"

namespace escolm {

// Generated taxonomy with a controllable page and group structure.
//
// Every text is written in pseudo-words over a-z. Each language applies its
// own Caesar shift to the letters, so translations are systematic token
// substitutions. Occupation pages share theme words and major groups share
// domain words, which makes the three pair relations learnable from text.
struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t groups = 5;
  std::size_t occupations_per_group = 4;
  std::size_t skills_per_occupation = 5;  // exclusive to that occupation
  std::size_t shared_skills = 0;          // each listed by two occupations
  std::size_t aliases_per_occupation = 0;
  std::vector<std::string> languages = {"xa", "xb", "xc"};
  std::size_t filler_words = 40;
  // Adds the digit-only occupation and group codes to descriptions. Digits
  // are not shifted, so the codes read the same in every language.
  bool code_markers = false;
};

struct SyntheticTaxonomy {
  std::vector<ConceptRecord> concepts;
  std::vector<MajorGroup> groups;

  TaxonomyStore build() const;
};

// Throws ConfigError on an unusable spec.
SyntheticTaxonomy make_synthetic_taxonomy(const SyntheticSpec& spec);

// Caesar shift of the ASCII lowercase letters of `text`.
std::string shift_letters(std::string_view text, int shift);

}  // namespace escolm
