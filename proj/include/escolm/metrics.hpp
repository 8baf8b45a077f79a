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

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace escolm {

// Half-open token span [start, end) with its label and space-joined surface.
struct LabeledSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;
  std::string surface;

  std::size_t length() const { return end - start; }
  auto operator<=>(const LabeledSpan&) const = default;
};

using SentenceSpans = std::vector<LabeledSpan>;

// Decodes BIO tags. An I-X that does not continue an X span opens a new
// span, and a label change closes the running span.
// Throws LengthMismatch, MalformedTag.
std::vector<LabeledSpan> decode_bio(std::span<const std::string> tags,
                                    std::span<const std::string> tokens);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

// P/R/F1 from counts. Empty gold with empty predictions scores 1.0; any
// other zero denominator scores 0.
Prf prf_from_counts(std::size_t true_positives, std::size_t predicted, std::size_t gold);

struct SurfaceOptions {
  bool case_sensitive = true;
};

// Exact (start, end, label) matches within each sentence.
// Throws LengthMismatch when the sentence lists differ in length.
Prf entity_span_f1(std::span<const SentenceSpans> gold, std::span<const SentenceSpans> pred);

// Span-F1 over unique (surface, label) types: gold types, predicted types,
// and the types of exactly matched predictions.
Prf surface_span_f1(std::span<const SentenceSpans> gold, std::span<const SentenceSpans> pred,
                    const SurfaceOptions& options = {});

inline constexpr std::size_t kNumBuckets = 5;
inline constexpr std::array<const char*, kNumBuckets> kBucketNames = {"1-2", "3-4", "5-6",
                                                                      "7-8", "9-10"};
inline constexpr const char* kOverflowBucketName = "11+";

// Bucket of a span length: 0..4 for 1..10 tokens, kNumBuckets for longer.
std::size_t bucket_index(std::size_t span_length);

struct BucketF1 {
  // Empty when the bucket holds neither gold spans nor predictions.
  std::array<std::optional<double>, kNumBuckets> f1{};
  std::optional<double> overflow;
};

BucketF1 bucket_f1(std::span<const SentenceSpans> gold, std::span<const SentenceSpans> pred);

// Unique (surface, label) pairs over total spans. Throws EmptyInput.
double unique_entity_ratio(std::span<const LabeledSpan> spans, const SurfaceOptions& options = {});

// Mean reciprocal rank of the first relevant candidate; 0 for a query whose
// ranking holds no relevant candidate. Throws EmptyInput, LengthMismatch.
double mrr(std::span<const std::vector<std::string>> rankings,
           std::span<const std::set<std::string>> relevant);

// Per-class F1 weighted by gold support. Throws EmptyInput, LengthMismatch.
double weighted_macro_f1(std::span<const std::string> gold, std::span<const std::string> pred);

struct EvalReport {
  std::optional<Prf> entity_f1;
  std::optional<Prf> surface_f1;
  std::optional<BucketF1> bucket_f1;
  std::optional<double> unique_entity_ratio;
  std::optional<double> mrr;
  std::optional<double> weighted_macro_f1;
  std::size_t instances = 0;
};

std::string report_to_json(const EvalReport& report);
void write_report_table(const EvalReport& report, std::ostream& out);

// Two-column sequence-labeling data: token and tag separated by whitespace,
// blank line between sentences.
struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
  std::size_t first_line = 0;
};

// `tag_column` < 0 counts from the last column. Throws SchemaError when a
// line has too few columns.
std::vector<TaggedSentence> read_tagged(std::istream& in, int tag_column = -1);

// Entity, surface and bucket F1 plus the gold unique-entity ratio.
// Throws LengthMismatch when sentence or token counts differ, MalformedTag.
EvalReport evaluate_sequences(std::span<const TaggedSentence> gold,
                              std::span<const TaggedSentence> pred,
                              const SurfaceOptions& options = {});

// JSONL with a "label" field per line.
std::vector<std::string> read_class_labels(std::istream& in);
EvalReport evaluate_classification(std::span<const std::string> gold,
                                   std::span<const std::string> pred);

// Gold JSONL lines {"relevant": [...]}, prediction lines {"ranking": [...]};
// an optional "id" on both sides must agree line by line.
struct RankingQuery {
  std::optional<std::string> id;
  std::vector<std::string> items;
};
std::vector<RankingQuery> read_ranking_jsonl(std::istream& in, const char* field);
EvalReport evaluate_ranking(std::span<const RankingQuery> gold, std::span<const RankingQuery> pred);

}  // namespace escolm
