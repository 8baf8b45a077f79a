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

#include "escolm/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>
#include <tuple>
#include <utility>

#include <fmt/format.h>

#include "escolm/errors.hpp"
#include "json.hpp"

namespace escolm {

using nlohmann::json;

namespace {

using SpanKey = std::tuple<std::size_t, std::size_t, std::string>;
using SurfaceType = std::pair<std::string, std::string>;

void check_parallel(std::size_t gold, std::size_t pred, const char* what) {
  if (gold != pred) {
    throw LengthMismatch(fmt::format("{} gold {} vs prediction {}", what, gold, pred));
  }
}

SurfaceType surface_type(const LabeledSpan& span, const SurfaceOptions& options) {
  std::string surface = span.surface;
  if (!options.case_sensitive) {
    std::transform(surface.begin(), surface.end(), surface.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  return {std::move(surface), span.label};
}

// Indices of predicted spans with an exact gold match.
std::vector<bool> matched_predictions(const SentenceSpans& gold, const SentenceSpans& pred) {
  std::set<SpanKey> keys;
  for (const auto& g : gold) keys.emplace(g.start, g.end, g.label);
  std::vector<bool> matched(pred.size(), false);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    matched[i] = keys.erase({pred[i].start, pred[i].end, pred[i].label}) > 0;
  }
  return matched;
}

struct Tag {
  char prefix;  // 'O', 'B' or 'I'
  std::string label;
};

Tag parse_tag(const std::string& tag, std::size_t position) {
  if (tag == "O") return {'O', {}};
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    return {tag[0], tag.substr(2)};
  }
  throw MalformedTag(fmt::format("'{}' at token {}", tag, position));
}

std::string join_tokens(std::span<const std::string> tokens, std::size_t start, std::size_t end) {
  std::string out;
  for (std::size_t i = start; i < end; ++i) {
    if (i > start) out += ' ';
    out += tokens[i];
  }
  return out;
}

json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall},      {"f1", p.f1},
          {"true_positives", p.true_positives}, {"predicted", p.predicted}, {"gold", p.gold}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string format_rate(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("-");
}

std::vector<std::string> split_whitespace(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string field; in >> field;) out.push_back(std::move(field));
  return out;
}

}  // namespace

std::vector<LabeledSpan> decode_bio(std::span<const std::string> tags,
                                    std::span<const std::string> tokens) {
  check_parallel(tags.size(), tokens.size(), "tag/token count");
  std::vector<LabeledSpan> spans;
  bool open = false;
  std::size_t open_start = 0;
  std::string open_label;
  auto close = [&](std::size_t end) {
    if (open) {
      spans.push_back({open_start, end, open_label, join_tokens(tokens, open_start, end)});
      open = false;
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const Tag tag = parse_tag(tags[i], i);
    if (tag.prefix == 'O') {
      close(i);
    } else if (tag.prefix == 'B' || !open || open_label != tag.label) {
      close(i);
      open = true;
      open_start = i;
      open_label = tag.label;
    }
  }
  close(tags.size());
  return spans;
}

Prf prf_from_counts(std::size_t true_positives, std::size_t predicted, std::size_t gold) {
  Prf p;
  p.true_positives = true_positives;
  p.predicted = predicted;
  p.gold = gold;
  if (predicted == 0 && gold == 0) {
    p.precision = p.recall = p.f1 = 1.0;
    return p;
  }
  const auto tp = static_cast<double>(true_positives);
  p.precision = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
  p.recall = gold == 0 ? 0.0 : tp / static_cast<double>(gold);
  p.f1 = predicted + gold == 0 ? 0.0 : 2.0 * tp / static_cast<double>(predicted + gold);
  return p;
}

Prf entity_span_f1(std::span<const SentenceSpans> gold, std::span<const SentenceSpans> pred) {
  check_parallel(gold.size(), pred.size(), "sentence count");
  std::size_t tp = 0, n_pred = 0, n_gold = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto matched = matched_predictions(gold[s], pred[s]);
    tp += static_cast<std::size_t>(std::count(matched.begin(), matched.end(), true));
    n_pred += pred[s].size();
    n_gold += gold[s].size();
  }
  return prf_from_counts(tp, n_pred, n_gold);
}

Prf surface_span_f1(std::span<const SentenceSpans> gold, std::span<const SentenceSpans> pred,
                    const SurfaceOptions& options) {
  check_parallel(gold.size(), pred.size(), "sentence count");
  std::set<SurfaceType> gold_types, pred_types, hit_types;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (const auto& g : gold[s]) gold_types.insert(surface_type(g, options));
    const auto matched = matched_predictions(gold[s], pred[s]);
    for (std::size_t i = 0; i < pred[s].size(); ++i) {
      auto type = surface_type(pred[s][i], options);
      if (matched[i]) hit_types.insert(type);
      pred_types.insert(std::move(type));
    }
  }
  return prf_from_counts(hit_types.size(), pred_types.size(), gold_types.size());
}

std::size_t bucket_index(std::size_t span_length) {
  if (span_length == 0) throw EmptyInput("zero-length span");
  return span_length > 2 * kNumBuckets ? kNumBuckets : (span_length - 1) / 2;
}

BucketF1 bucket_f1(std::span<const SentenceSpans> gold, std::span<const SentenceSpans> pred) {
  check_parallel(gold.size(), pred.size(), "sentence count");
  std::array<std::size_t, kNumBuckets + 1> tp{}, n_pred{}, n_gold{};
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (const auto& g : gold[s]) ++n_gold[bucket_index(g.length())];
    const auto matched = matched_predictions(gold[s], pred[s]);
    for (std::size_t i = 0; i < pred[s].size(); ++i) {
      // A matched prediction has its gold span's length, hence its bucket.
      const std::size_t b = bucket_index(pred[s][i].length());
      ++n_pred[b];
      if (matched[i]) ++tp[b];
    }
  }
  auto score = [&](std::size_t b) -> std::optional<double> {
    if (n_pred[b] == 0 && n_gold[b] == 0) return std::nullopt;
    return prf_from_counts(tp[b], n_pred[b], n_gold[b]).f1;
  };
  BucketF1 out;
  for (std::size_t b = 0; b < kNumBuckets; ++b) out.f1[b] = score(b);
  out.overflow = score(kNumBuckets);
  return out;
}

double unique_entity_ratio(std::span<const LabeledSpan> spans, const SurfaceOptions& options) {
  if (spans.empty()) throw EmptyInput("unique_entity_ratio needs at least one span");
  std::set<SurfaceType> types;
  for (const auto& s : spans) types.insert(surface_type(s, options));
  return static_cast<double>(types.size()) / static_cast<double>(spans.size());
}

double mrr(std::span<const std::vector<std::string>> rankings,
           std::span<const std::set<std::string>> relevant) {
  check_parallel(relevant.size(), rankings.size(), "query count");
  if (rankings.empty()) throw EmptyInput("mrr needs at least one query");
  double sum = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    if (rankings[q].empty()) throw EmptyInput(fmt::format("query {} has no candidates", q));
    for (std::size_t r = 0; r < rankings[q].size(); ++r) {
      if (relevant[q].contains(rankings[q][r])) {
        sum += 1.0 / static_cast<double>(r + 1);
        break;
      }
    }
  }
  return sum / static_cast<double>(rankings.size());
}

double weighted_macro_f1(std::span<const std::string> gold, std::span<const std::string> pred) {
  check_parallel(gold.size(), pred.size(), "label count");
  if (gold.empty()) throw EmptyInput("weighted_macro_f1 needs at least one label");
  struct Counts {
    std::size_t tp = 0, n_pred = 0, n_gold = 0;
  };
  std::map<std::string, Counts> classes;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++classes[gold[i]].n_gold;
    ++classes[pred[i]].n_pred;
    if (gold[i] == pred[i]) ++classes[gold[i]].tp;
  }
  double total = 0.0;
  for (const auto& [label, c] : classes) {
    if (c.n_gold == 0) continue;
    const double f1 = 2.0 * static_cast<double>(c.tp) / static_cast<double>(c.n_pred + c.n_gold);
    total += static_cast<double>(c.n_gold) * f1;
  }
  return total / static_cast<double>(gold.size());
}

std::string report_to_json(const EvalReport& report) {
  json j = json::object();
  j["instances"] = report.instances;
  if (report.entity_f1) j["entity_f1"] = prf_json(*report.entity_f1);
  if (report.surface_f1) j["surface_f1"] = prf_json(*report.surface_f1);
  if (report.bucket_f1) {
    json buckets = json::object();
    for (std::size_t b = 0; b < kNumBuckets; ++b) {
      buckets[kBucketNames[b]] = optional_json(report.bucket_f1->f1[b]);
    }
    j["bucket_f1"] = buckets;
    j["bucket_f1_overflow"] = optional_json(report.bucket_f1->overflow);
  }
  if (report.unique_entity_ratio) j["unique_entity_ratio"] = *report.unique_entity_ratio;
  if (report.mrr) j["mrr"] = *report.mrr;
  if (report.weighted_macro_f1) j["weighted_macro_f1"] = *report.weighted_macro_f1;
  return j.dump(2);
}

void write_report_table(const EvalReport& report, std::ostream& out) {
  auto row = [&](const std::string& name, const std::string& value) {
    out << fmt::format("{:<22} {:>10}\n", name, value);
  };
  row("metric", "value");
  row("instances", std::to_string(report.instances));
  auto prf_rows = [&](const char* name, const std::optional<Prf>& p) {
    if (!p) return;
    row(std::string(name) + ".precision", format_rate(p->precision));
    row(std::string(name) + ".recall", format_rate(p->recall));
    row(std::string(name) + ".f1", format_rate(p->f1));
  };
  prf_rows("entity", report.entity_f1);
  prf_rows("surface", report.surface_f1);
  if (report.bucket_f1) {
    for (std::size_t b = 0; b < kNumBuckets; ++b) {
      row(std::string("bucket[") + kBucketNames[b] + "].f1", format_rate(report.bucket_f1->f1[b]));
    }
    row(std::string("bucket[") + kOverflowBucketName + "].f1",
        format_rate(report.bucket_f1->overflow));
  }
  if (report.unique_entity_ratio) row("unique_entity_ratio", format_rate(report.unique_entity_ratio));
  if (report.mrr) row("mrr", format_rate(report.mrr));
  if (report.weighted_macro_f1) row("weighted_macro_f1", format_rate(report.weighted_macro_f1));
}

std::vector<TaggedSentence> read_tagged(std::istream& in, int tag_column) {
  std::vector<TaggedSentence> out;
  TaggedSentence current;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) out.push_back(std::move(current));
    current = TaggedSentence{};
  };
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_whitespace(line);
    if (fields.empty()) {
      flush();
      continue;
    }
    if (fields[0] == "-DOCSTART-") continue;
    const int n = static_cast<int>(fields.size());
    const int column = tag_column < 0 ? n + tag_column : tag_column;
    if (n < 2 || column <= 0 || column >= n) {
      throw SchemaError(line_no, fmt::format("expected a token and a tag, got {} column(s)", n));
    }
    if (current.tokens.empty()) current.first_line = line_no;
    current.tokens.push_back(fields[0]);
    current.tags.push_back(fields[static_cast<std::size_t>(column)]);
  }
  flush();
  return out;
}

EvalReport evaluate_sequences(std::span<const TaggedSentence> gold,
                              std::span<const TaggedSentence> pred,
                              const SurfaceOptions& options) {
  check_parallel(gold.size(), pred.size(), "sentence count");
  std::vector<SentenceSpans> gold_spans, pred_spans;
  std::vector<LabeledSpan> all_gold;
  std::size_t tokens = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].tokens.size() != pred[s].tokens.size()) {
      throw LengthMismatch(fmt::format("sentence at gold line {} has {} tokens, prediction {}",
                                       gold[s].first_line, gold[s].tokens.size(),
                                       pred[s].tokens.size()));
    }
    auto decode = [&](const TaggedSentence& sentence, const char* side) {
      try {
        // Surfaces come from the gold tokens on both sides.
        return decode_bio(sentence.tags, gold[s].tokens);
      } catch (const MalformedTag& e) {
        std::string_view detail = e.what();
        detail.remove_prefix(std::min(detail.size(), std::string_view("MalformedTag: ").size()));
        throw MalformedTag(fmt::format("{} sentence starting at line {}: {}", side,
                                       sentence.first_line, detail));
      }
    };
    gold_spans.push_back(decode(gold[s], "gold"));
    pred_spans.push_back(decode(pred[s], "prediction"));
    all_gold.insert(all_gold.end(), gold_spans.back().begin(), gold_spans.back().end());
    tokens += gold[s].tokens.size();
  }
  EvalReport report;
  report.instances = gold.size();
  report.entity_f1 = entity_span_f1(gold_spans, pred_spans);
  report.surface_f1 = surface_span_f1(gold_spans, pred_spans, options);
  report.bucket_f1 = bucket_f1(gold_spans, pred_spans);
  if (!all_gold.empty()) report.unique_entity_ratio = unique_entity_ratio(all_gold, options);
  return report;
}

std::vector<std::string> read_class_labels(std::istream& in) {
  std::vector<std::string> labels;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      labels.push_back(json::parse(line).at("label").get<std::string>());
    } catch (const json::exception& e) {
      throw SchemaError(line_no, e.what());
    }
  }
  return labels;
}

EvalReport evaluate_classification(std::span<const std::string> gold,
                                   std::span<const std::string> pred) {
  EvalReport report;
  report.instances = gold.size();
  report.weighted_macro_f1 = weighted_macro_f1(gold, pred);
  return report;
}

std::vector<RankingQuery> read_ranking_jsonl(std::istream& in, const char* field) {
  std::vector<RankingQuery> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      RankingQuery q;
      if (j.contains("id") && !j.at("id").is_null()) {
        q.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      }
      q.items = j.at(field).get<std::vector<std::string>>();
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw SchemaError(line_no, e.what());
    }
  }
  return out;
}

EvalReport evaluate_ranking(std::span<const RankingQuery> gold,
                            std::span<const RankingQuery> pred) {
  check_parallel(gold.size(), pred.size(), "query count");
  std::vector<std::vector<std::string>> rankings;
  std::vector<std::set<std::string>> relevant;
  for (std::size_t q = 0; q < gold.size(); ++q) {
    if (gold[q].id && pred[q].id && *gold[q].id != *pred[q].id) {
      throw LengthMismatch(
          fmt::format("query {} id '{}' vs prediction '{}'", q, *gold[q].id, *pred[q].id));
    }
    relevant.emplace_back(gold[q].items.begin(), gold[q].items.end());
    rankings.push_back(pred[q].items);
  }
  EvalReport report;
  report.instances = gold.size();
  report.mrr = mrr(rankings, relevant);
  return report;
}

}  // namespace escolm
