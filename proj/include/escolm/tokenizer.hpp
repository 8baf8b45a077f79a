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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "escolm/taxonomy.hpp"

namespace escolm {

using TokenId = std::int32_t;

// Reserved ids. Regular tokens start at kNumSpecialTokens.
inline constexpr TokenId kClsId = 0;
inline constexpr TokenId kSepId = 1;
inline constexpr TokenId kPadId = 2;
inline constexpr TokenId kMaskId = 3;
inline constexpr TokenId kUnkId = 4;
inline constexpr TokenId kNumSpecialTokens = 5;

// Text -> normalized token strings. Implementations must be deterministic
// and locale-independent.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

// ASCII-lowercases, splits on ASCII whitespace and emits every ASCII
// punctuation character as its own token. Bytes >= 0x80 are word bytes, so
// UTF-8 text passes through unchanged.
class WordTokenizer final : public Tokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

class Vocab {
 public:
  // `tokens` are the regular tokens in id order (first gets id 5).
  // Throws ConfigError on duplicates, blanks, or an empty list.
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::optional<TokenId> find(std::string_view token) const;
  TokenId id_or_unk(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  // Regular tokens only, in id order.
  std::span<const std::string> regular_tokens() const {
    return std::span<const std::string>(tokens_).subspan(kNumSpecialTokens);
  }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Special-token spellings, indexed by id.
std::string_view special_token_name(TokenId id);

// The text each description entry contributes: label, a space, description.
std::string entry_text(const TaxonomyStore& store, const EntryRef& entry);

// Token counts over every entry_text of the store.
std::unordered_map<std::string, std::size_t> token_frequencies(
    const TaxonomyStore& store, const Tokenizer& tokenizer = default_tokenizer());

// Tokens with frequency >= min_freq, ordered by frequency desc then bytes.
// Throws EmptyCorpus when nothing qualifies.
Vocab build_vocab(const TaxonomyStore& store, std::size_t min_freq,
                  const Tokenizer& tokenizer = default_tokenizer());
Vocab build_vocab_from_texts(std::span<const std::string> texts, std::size_t min_freq,
                             const Tokenizer& tokenizer = default_tokenizer());

// Text format: one regular token per line; line i holds id i + 5.
void write_vocab(const Vocab& vocab, std::ostream& out);
Vocab read_vocab(std::istream& in);
void save_vocab(const Vocab& vocab, const std::filesystem::path& path);
Vocab load_vocab(const std::filesystem::path& path);

std::vector<TokenId> encode(const Vocab& vocab, std::string_view text,
                            const Tokenizer& tokenizer = default_tokenizer());
// Space-joined token strings.
std::string decode(const Vocab& vocab, std::span<const TokenId> ids);

// CLS a... SEP b... SEP with a checked layout.
class TokenSequence {
 public:
  // Throws DegenerateInput unless ids[0] == CLS, there are exactly two SEPs,
  // the last token is SEP, and 0 < boundary < size with ids[boundary-1] == SEP.
  TokenSequence(std::vector<TokenId> ids, std::size_t segment_boundary);

  const std::vector<TokenId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  std::size_t segment_boundary() const { return boundary_; }

 private:
  std::vector<TokenId> ids_;
  std::size_t boundary_;
};

// Kept segment lengths for segments of la and lb tokens under max_len.
// The max_len - 3 budget is split in half (A takes the odd token), and a
// segment shorter than its half donates the surplus to the other.
std::pair<std::size_t, std::size_t> truncated_lengths(std::size_t la, std::size_t lb,
                                                      std::size_t max_len);

// Throws DegenerateInput when either segment encodes to nothing, and
// ConfigError when max_len < 8.
TokenSequence build_pair_input(const Vocab& vocab, std::string_view label_a,
                               std::string_view desc_a, std::string_view label_b,
                               std::string_view desc_b, std::size_t max_len,
                               const Tokenizer& tokenizer = default_tokenizer());

}  // namespace escolm
