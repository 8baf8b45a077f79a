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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "escolm/taxonomy.hpp"
#include "escolm/tokenizer.hpp"

namespace escolm {

struct LanguageStats {
  std::string language;
  std::size_t instance_count = 0;
  // Empty for a language without descriptions.
  std::optional<double> mean_token_length;
  std::optional<std::size_t> max_token_length;
};

struct CorpusStats {
  std::vector<LanguageStats> languages;  // every language of the store
  std::size_t total_instances = 0;
  std::optional<double> mean_token_length;
  std::optional<std::size_t> max_token_length;
};

// Description counts and lengths (in tokenizer tokens) per language, over
// the description entries of the store.
CorpusStats corpus_stats(const TaxonomyStore& store,
                         const Tokenizer& tokenizer = default_tokenizer());

// Both formats skip languages with no descriptions.
std::string stats_to_json(const CorpusStats& stats);
void write_stats_table(const CorpusStats& stats, std::ostream& out);

}  // namespace escolm
