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

#include "escolm/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <ostream>

#include "escolm/errors.hpp"

namespace escolm {

namespace {

constexpr std::array<std::string_view, kNumSpecialTokens> kSpecialNames = {
    "[CLS]", "[SEP]", "[PAD]", "[MASK]", "[UNK]"};

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(unsigned char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

}  // namespace

std::vector<std::string> WordTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (unsigned char c : text) {
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      word.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                          : static_cast<char>(c));
    }
  }
  flush();
  return out;
}

const Tokenizer& default_tokenizer() {
  static const WordTokenizer tokenizer;
  return tokenizer;
}

std::string_view special_token_name(TokenId id) {
  return kSpecialNames.at(static_cast<std::size_t>(id));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.empty()) throw ConfigError("vocabulary has no regular tokens");
  Vocab v;
  v.tokens_.reserve(tokens.size() + kNumSpecialTokens);
  for (auto name : kSpecialNames) v.tokens_.emplace_back(name);
  for (auto& t : tokens) {
    if (t.empty() || std::any_of(t.begin(), t.end(), [](unsigned char c) { return is_space(c); })) {
      throw ConfigError("vocabulary token '" + t + "' is empty or contains whitespace");
    }
    v.tokens_.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.ids_.emplace(v.tokens_[i], static_cast<TokenId>(i)).second) {
      throw ConfigError("duplicate vocabulary token '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocab::id_or_unk(std::string_view token) const {
  auto id = find(token);
  return id && *id >= kNumSpecialTokens ? *id : kUnkId;
}

std::string entry_text(const TaxonomyStore& store, const EntryRef& entry) {
  return store.label(entry) + " " + store.description(entry);
}

std::unordered_map<std::string, std::size_t> token_frequencies(const TaxonomyStore& store,
                                                               const Tokenizer& tokenizer) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const EntryRef& e : store.entries()) {
    for (auto& t : tokenizer.tokenize(entry_text(store, e))) ++counts[std::move(t)];
  }
  return counts;
}

namespace {

Vocab vocab_from_counts(const std::unordered_map<std::string, std::size_t>& counts,
                        std::size_t min_freq) {
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, n] : counts) {
    if (n >= std::max<std::size_t>(min_freq, 1)) kept.emplace_back(token, n);
  }
  if (kept.empty()) throw EmptyCorpus("no token reaches min_freq " + std::to_string(min_freq));
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [token, n] : kept) tokens.push_back(std::move(token));
  return Vocab::from_tokens(std::move(tokens));
}

}  // namespace

Vocab build_vocab(const TaxonomyStore& store, std::size_t min_freq, const Tokenizer& tokenizer) {
  if (store.entries().empty()) throw EmptyCorpus("taxonomy has no nonempty descriptions");
  return vocab_from_counts(token_frequencies(store, tokenizer), min_freq);
}

Vocab build_vocab_from_texts(std::span<const std::string> texts, std::size_t min_freq,
                             const Tokenizer& tokenizer) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    for (auto& t : tokenizer.tokenize(text)) ++counts[std::move(t)];
  }
  return vocab_from_counts(counts, min_freq);
}

void write_vocab(const Vocab& vocab, std::ostream& out) {
  for (const auto& t : vocab.regular_tokens()) out << t << '\n';
}

Vocab read_vocab(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocab::from_tokens(std::move(tokens));
}

void save_vocab(const Vocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary '" + path.string() + "'");
  write_vocab(vocab, out);
}

Vocab load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary '" + path.string() + "'");
  return read_vocab(in);
}

std::vector<TokenId> encode(const Vocab& vocab, std::string_view text,
                            const Tokenizer& tokenizer) {
  std::vector<TokenId> ids;
  for (const auto& t : tokenizer.tokenize(text)) ids.push_back(vocab.id_or_unk(t));
  return ids;
}

std::string decode(const Vocab& vocab, std::span<const TokenId> ids) {
  std::string out;
  for (TokenId id : ids) {
    if (!out.empty()) out.push_back(' ');
    out += vocab.token(id);
  }
  return out;
}

TokenSequence::TokenSequence(std::vector<TokenId> ids, std::size_t segment_boundary)
    : ids_(std::move(ids)), boundary_(segment_boundary) {
  const auto seps = std::count(ids_.begin(), ids_.end(), kSepId);
  if (ids_.empty() || ids_.front() != kClsId || ids_.back() != kSepId || seps != 2 ||
      boundary_ == 0 || boundary_ >= ids_.size() || ids_[boundary_ - 1] != kSepId) {
    throw DegenerateInput("malformed pair sequence");
  }
}

std::pair<std::size_t, std::size_t> truncated_lengths(std::size_t la, std::size_t lb,
                                                      std::size_t max_len) {
  const std::size_t budget = max_len - 3;
  if (la + lb <= budget) return {la, lb};
  const std::size_t quota_b = budget / 2;
  const std::size_t quota_a = budget - quota_b;
  if (la < quota_a) return {la, budget - la};
  if (lb < quota_b) return {budget - lb, lb};
  return {quota_a, quota_b};
}

TokenSequence build_pair_input(const Vocab& vocab, std::string_view label_a,
                               std::string_view desc_a, std::string_view label_b,
                               std::string_view desc_b, std::size_t max_len,
                               const Tokenizer& tokenizer) {
  if (max_len < 8) throw ConfigError("max_len must be >= 8");
  auto seg = [&](std::string_view label, std::string_view desc) {
    std::string text(label);
    text.push_back(' ');
    text.append(desc);
    return encode(vocab, text, tokenizer);
  };
  std::vector<TokenId> a = seg(label_a, desc_a);
  std::vector<TokenId> b = seg(label_b, desc_b);
  if (a.empty() || b.empty()) throw DegenerateInput("pair segment encodes to no tokens");
  const auto [ka, kb] = truncated_lengths(a.size(), b.size(), max_len);
  std::vector<TokenId> ids;
  ids.reserve(ka + kb + 3);
  ids.push_back(kClsId);
  ids.insert(ids.end(), a.begin(), a.begin() + static_cast<std::ptrdiff_t>(ka));
  ids.push_back(kSepId);
  const std::size_t boundary = ids.size();
  ids.insert(ids.end(), b.begin(), b.begin() + static_cast<std::ptrdiff_t>(kb));
  ids.push_back(kSepId);
  return TokenSequence(std::move(ids), boundary);
}

}  // namespace escolm
