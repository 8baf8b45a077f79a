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


#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "escolm/errors.hpp"
#include "escolm/metrics.hpp"
#include "escolm/rng.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace escolm {
namespace {

const std::string kData = ESCOLM_TEST_DATA_DIR;

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

SentenceSpans spans_of(const std::string& tags, const std::string& tokens) {
  const auto t = split(tags);
  const auto w = split(tokens);
  return decode_bio(t, w);
}

std::pair<std::vector<std::string>, std::vector<std::string>> random_tagged_pair(Rng& rng) {
  return oracle::random_tagged(rng, 20, 3);
}

std::vector<TaggedSentence> read_file(const std::string& name, int column = -1) {
  std::ifstream in(kData + "/" + name);
  return read_tagged(in, column);
}

TEST(DecodeBio, BasicChunks) {
  const auto s = spans_of("B-Skill I-Skill O B-Knowledge B-Knowledge I-Knowledge",
                          "work under the java sql server");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], (LabeledSpan{0, 2, "Skill", "work under"}));
  EXPECT_EQ(s[1], (LabeledSpan{3, 4, "Knowledge", "java"}));
  EXPECT_EQ(s[2], (LabeledSpan{4, 6, "Knowledge", "sql server"}));
}

TEST(DecodeBio, OrphanAndSwitchedInsideTagsStartSpans) {
  const auto s = spans_of("I-Skill I-Skill I-Knowledge O I-Skill", "a b c d e");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], (LabeledSpan{0, 2, "Skill", "a b"}));
  EXPECT_EQ(s[1], (LabeledSpan{2, 3, "Knowledge", "c"}));
  EXPECT_EQ(s[2], (LabeledSpan{4, 5, "Skill", "e"}));
}

TEST(DecodeBio, Errors) {
  EXPECT_THROW(spans_of("B-Skill O", "one"), LengthMismatch);
  EXPECT_THROW(spans_of("X-Skill", "one"), MalformedTag);
  EXPECT_THROW(spans_of("B-", "one"), MalformedTag);
  EXPECT_TRUE(spans_of("O O", "a b").empty());
}

TEST(DecodeBio, MatchesOracleOnRandomSentences) {
  Rng rng(101);
  for (int k = 0; k < 1000; ++k) {
    const auto [tokens, tags] = random_tagged_pair(rng);
    ASSERT_EQ(decode_bio(tags, tokens), oracle::decode_bio(tags, tokens)) << k;
  }
}

TEST(Prf, ZeroAndEmptyConventions) {
  const Prf empty = prf_from_counts(0, 0, 0);
  EXPECT_EQ(empty.f1, 1.0);
  EXPECT_EQ(prf_from_counts(0, 3, 0).f1, 0.0);
  EXPECT_EQ(prf_from_counts(0, 0, 3).f1, 0.0);
  const Prf p = prf_from_counts(2, 4, 5);
  EXPECT_DOUBLE_EQ(p.precision, 0.5);
  EXPECT_DOUBLE_EQ(p.recall, 0.4);
  EXPECT_DOUBLE_EQ(p.f1, 2 * 0.5 * 0.4 / 0.9);
}

TEST(SpanF1, HandExample) {
  const std::vector<SentenceSpans> gold = {
      spans_of("B-Skill I-Skill O B-Skill", "use java and Java"),
      spans_of("O B-Skill", "the java"),
  };
  const std::vector<SentenceSpans> pred = {
      spans_of("B-Skill I-Skill O O", "use java and Java"),
      spans_of("B-Skill I-Skill", "the java"),
  };
  const Prf e = entity_span_f1(gold, pred);
  EXPECT_EQ(e.true_positives, 1u);
  EXPECT_EQ(e.predicted, 2u);
  EXPECT_EQ(e.gold, 3u);
  EXPECT_NEAR(e.f1, 2.0 * 0.5 * (1.0 / 3) / (0.5 + 1.0 / 3), 1e-12);

  // Types: gold {use java, Java, java}, pred {use java, the java}, hit {use java}.
  const Prf s = surface_span_f1(gold, pred);
  EXPECT_EQ(s.true_positives, 1u);
  EXPECT_EQ(s.predicted, 2u);
  EXPECT_EQ(s.gold, 3u);
  // Folding case merges Java and java in gold.
  const Prf folded = surface_span_f1(gold, pred, {false});
  EXPECT_EQ(folded.gold, 2u);
  EXPECT_NEAR(folded.f1, 0.5, 1e-12);
}

TEST(SpanF1, MatchesOracleOnRandomCorpora) {
  Rng rng(202);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + rng.uniform(4);
    std::vector<SentenceSpans> gold, pred;
    for (std::size_t s = 0; s < n; ++s) {
      const auto [tokens, gold_tags] = random_tagged_pair(rng);
      auto pred_tags = gold_tags;
      // Perturb a few tags so predictions partly agree.
      for (auto& t : pred_tags) {
        if (rng.uniform(4) == 0) t = oracle::random_tagged(rng, 1, 3).second[0];
      }
      gold.push_back(decode_bio(gold_tags, tokens));
      pred.push_back(decode_bio(pred_tags, tokens));
    }
    const auto ec = oracle::entity_counts(gold, pred);
    const auto sc = oracle::surface_counts(gold, pred);
    ASSERT_NEAR(entity_span_f1(gold, pred).f1, ec.f1(), 1e-12) << k;
    ASSERT_NEAR(surface_span_f1(gold, pred).f1, sc.f1(), 1e-12) << k;
    const BucketF1 b = bucket_f1(gold, pred);
    const auto bc = oracle::bucket_counts(gold, pred);
    for (std::size_t i = 0; i < kNumBuckets; ++i) {
      const auto it = bc.find(kBucketNames[i]);
      if (it == bc.end()) {
        ASSERT_FALSE(b.f1[i].has_value()) << k;
      } else {
        ASSERT_TRUE(b.f1[i].has_value()) << k;
        ASSERT_NEAR(*b.f1[i], it->second.f1(), 1e-12) << k;
      }
    }
    const auto over = bc.find(kOverflowBucketName);
    ASSERT_EQ(b.overflow.has_value(), over != bc.end()) << k;
    if (b.overflow) {
      ASSERT_NEAR(*b.overflow, over->second.f1(), 1e-12) << k;
    }
  }
}

TEST(SpanF1, SentenceCountMismatch) {
  const std::vector<SentenceSpans> one(1), two(2);
  EXPECT_THROW(entity_span_f1(one, two), LengthMismatch);
  EXPECT_THROW(surface_span_f1(one, two), LengthMismatch);
  EXPECT_THROW(bucket_f1(one, two), LengthMismatch);
}

TEST(Buckets, Boundaries) {
  const std::size_t expect[] = {0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 5};
  for (std::size_t len = 1; len <= 13; ++len) {
    EXPECT_EQ(bucket_index(len), expect[len - 1]) << len;
    const std::string name =
        expect[len - 1] < kNumBuckets ? kBucketNames[expect[len - 1]] : kOverflowBucketName;
    EXPECT_EQ(name, oracle::bucket_of(len));
  }
  EXPECT_THROW(bucket_index(0), EmptyInput);
}

TEST(UniqueEntityRatio, CountsDistinctSurfaces) {
  const auto s = spans_of("B-Skill B-Skill B-Skill B-Knowledge", "java Java java java");
  EXPECT_DOUBLE_EQ(unique_entity_ratio(s), 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(unique_entity_ratio(s, {false}), 2.0 / 4.0);
  EXPECT_THROW(unique_entity_ratio(std::vector<LabeledSpan>{}), EmptyInput);
}

TEST(WeightedMacroF1, HandAndOracle) {
  const std::vector<std::string> gold = {"A", "A", "A", "B", "A"};
  const std::vector<std::string> pred = {"A", "B", "A", "B", "A"};
  // A: p=1 r=3/4 f=6/7 support 4; B: p=1/2 r=1 f=2/3 support 1.
  EXPECT_NEAR(weighted_macro_f1(gold, pred), (4 * 6.0 / 7 + 2.0 / 3) / 5, 1e-12);
  EXPECT_THROW(weighted_macro_f1(gold, std::vector<std::string>{"A"}), LengthMismatch);

  Rng rng(303);
  const std::vector<std::string> labels = {"a", "b", "c", "d"};
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + rng.uniform(30);
    std::vector<std::string> g, p;
    for (std::size_t i = 0; i < n; ++i) {
      g.push_back(labels[rng.uniform(3)]);
      p.push_back(labels[rng.uniform(4)]);
    }
    ASSERT_NEAR(weighted_macro_f1(g, p), oracle::weighted_macro_f1(g, p), 1e-12) << k;
  }
}

TEST(Mrr, HandAndOracle) {
  const std::vector<std::vector<std::string>> rankings = {{"x", "a"}, {"a", "b", "y"}, {"q"}};
  const std::vector<std::set<std::string>> relevant = {{"x"}, {"y", "b"}, {"z"}};
  EXPECT_NEAR(mrr(rankings, relevant), (1.0 + 0.5 + 0.0) / 3, 1e-12);
  EXPECT_THROW(mrr(std::vector<std::vector<std::string>>{}, std::vector<std::set<std::string>>{}),
               EmptyInput);
  EXPECT_THROW(mrr(rankings, std::vector<std::set<std::string>>(2)), LengthMismatch);

  Rng rng(404);
  const std::vector<std::string> items = {"a", "b", "c", "d", "e", "f"};
  for (int k = 0; k < 1000; ++k) {
    const std::size_t q = 1 + rng.uniform(5);
    std::vector<std::vector<std::string>> r(q);
    std::vector<std::set<std::string>> rel(q);
    for (std::size_t i = 0; i < q; ++i) {
      const std::size_t len = 1 + rng.uniform(items.size());
      for (std::size_t j = 0; j < len; ++j) r[i].push_back(items[rng.uniform(items.size())]);
      for (std::size_t j = rng.uniform(3); j > 0; --j) rel[i].insert(items[rng.uniform(6)]);
    }
    ASSERT_NEAR(mrr(r, rel), oracle::mrr(r, rel), 1e-12) << k;
  }
}

TEST(Files, SequenceFixture) {
  const auto gold = read_file("sayfullina_gold.txt");
  const auto pred = read_file("sayfullina_pred.txt");
  ASSERT_EQ(gold.size(), 2u);
  const EvalReport r = evaluate_sequences(gold, pred);
  ASSERT_TRUE(r.entity_f1 && r.bucket_f1 && r.surface_f1);
  EXPECT_NEAR(r.entity_f1->f1, 0.5, 1e-12);
  EXPECT_EQ(*r.bucket_f1->f1[0], 0.0);
  EXPECT_EQ(*r.bucket_f1->f1[1], 1.0);
  EXPECT_FALSE(r.bucket_f1->f1[2].has_value());
  EXPECT_EQ(r.instances, 2u);
  const auto json = nlohmann::json::parse(report_to_json(r));
  EXPECT_NEAR(json.at("entity_f1").at("f1").get<double>(), 0.5, 1e-12);
}

TEST(Files, TagColumnSelection) {
  const auto last = read_file("skillspan_gold.txt");
  const auto second = read_file("skillspan_gold.txt", 1);
  ASSERT_EQ(last.size(), second.size());
  ASSERT_FALSE(second.empty());
  EXPECT_EQ(second[0].tags[2], "B-Skill");
  EXPECT_EQ(last[0].tags[2], "O");
  EXPECT_EQ(last[0].first_line, 1u);
}

TEST(Files, MalformedTagNamesLine) {
  const auto gold = read_file("sayfullina_gold.txt");
  const auto bad = read_file("sayfullina_malformed.txt");
  try {
    evaluate_sequences(gold, bad);
    FAIL() << "expected MalformedTag";
  } catch (const MalformedTag& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("MalformedTag: MalformedTag"), std::string::npos) << msg;
  }
}

TEST(Files, ClassificationFixture) {
  std::ifstream g(kData + "/mcc_gold.jsonl"), p(kData + "/mcc_pred.jsonl");
  const auto gold = read_class_labels(g);
  const auto pred = read_class_labels(p);
  const EvalReport r = evaluate_classification(gold, pred);
  ASSERT_TRUE(r.weighted_macro_f1);
  EXPECT_NEAR(*r.weighted_macro_f1, 23.0 / 30.0, 1e-12);
  EXPECT_NEAR(*r.weighted_macro_f1, oracle::weighted_macro_f1(gold, pred), 1e-12);
}

TEST(Files, RankingFixture) {
  std::ifstream g(kData + "/mlc_gold.jsonl"), p(kData + "/mlc_pred.jsonl");
  const auto gold = read_ranking_jsonl(g, "relevant");
  const auto pred = read_ranking_jsonl(p, "ranking");
  const EvalReport r = evaluate_ranking(gold, pred);
  ASSERT_TRUE(r.mrr);
  EXPECT_NEAR(*r.mrr, 0.625, 1e-12);
  auto swapped = pred;
  std::swap(swapped[0], swapped[1]);
  EXPECT_THROW(evaluate_ranking(gold, swapped), LengthMismatch);
}

TEST(Report, TableMentionsEveryMetric) {
  EvalReport r;
  r.entity_f1 = prf_from_counts(1, 2, 2);
  r.mrr = 0.25;
  r.instances = 3;
  std::ostringstream out;
  write_report_table(r, out);
  EXPECT_NE(out.str().find("0.25"), std::string::npos);
  EXPECT_NE(out.str().find("mrr"), std::string::npos);
}

}  // namespace
}  // namespace escolm
