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

#include "escolm/corpus_stats.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "json.hpp"

namespace escolm {

CorpusStats corpus_stats(const TaxonomyStore& store, const Tokenizer& tokenizer) {
  const auto& languages = store.languages();
  std::vector<std::size_t> total_tokens(languages.size(), 0);
  CorpusStats stats;
  stats.languages.resize(languages.size());
  for (std::size_t l = 0; l < languages.size(); ++l) stats.languages[l].language = languages[l];

  std::size_t all_tokens = 0;
  for (const EntryRef& e : store.entries()) {
    const std::size_t n = tokenizer.tokenize(store.description(e)).size();
    LanguageStats& lang = stats.languages[e.language];
    ++lang.instance_count;
    total_tokens[e.language] += n;
    lang.max_token_length = std::max(lang.max_token_length.value_or(0), n);
    stats.max_token_length = std::max(stats.max_token_length.value_or(0), n);
    all_tokens += n;
    ++stats.total_instances;
  }
  for (std::size_t l = 0; l < languages.size(); ++l) {
    LanguageStats& lang = stats.languages[l];
    if (lang.instance_count > 0) {
      lang.mean_token_length =
          static_cast<double>(total_tokens[l]) / static_cast<double>(lang.instance_count);
    }
  }
  if (stats.total_instances > 0) {
    stats.mean_token_length =
        static_cast<double>(all_tokens) / static_cast<double>(stats.total_instances);
  }
  return stats;
}

std::string stats_to_json(const CorpusStats& stats) {
  nlohmann::json languages = nlohmann::json::object();
  for (const auto& lang : stats.languages) {
    if (lang.instance_count == 0) continue;
    languages[lang.language] = {{"instance_count", lang.instance_count},
                                {"mean_token_length", *lang.mean_token_length},
                                {"max_token_length", *lang.max_token_length}};
  }
  nlohmann::json j = {{"languages", languages}, {"total_instances", stats.total_instances}};
  if (stats.mean_token_length) {
    j["mean_token_length"] = *stats.mean_token_length;
    j["max_token_length"] = *stats.max_token_length;
  }
  return j.dump(2);
}

void write_stats_table(const CorpusStats& stats, std::ostream& out) {
  out << fmt::format("{:<8} {:>10} {:>10} {:>10}\n", "language", "instances", "mean_len",
                     "max_len");
  for (const auto& lang : stats.languages) {
    if (lang.instance_count == 0) continue;
    out << fmt::format("{:<8} {:>10} {:>10.4f} {:>10}\n", lang.language, lang.instance_count,
                       *lang.mean_token_length, *lang.max_token_length);
  }
  out << fmt::format("{:<8} {:>10} {:>10.4f} {:>10}\n", "total", stats.total_instances,
                     stats.mean_token_length.value_or(0.0), stats.max_token_length.value_or(0));
}

}  // namespace escolm
