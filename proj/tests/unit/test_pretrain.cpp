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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "escolm/errors.hpp"
#include "escolm/pretrain.hpp"
#include "escolm/synthetic.hpp"

namespace escolm {
namespace {

namespace fs = std::filesystem;

struct Fixture {
  TaxonomyStore store;
  Vocab vocab;
  ModelConfig model;
  RunConfig run;
};

Fixture make_setup(std::uint64_t taxonomy_seed = 3, std::uint64_t total = 10) {
  SyntheticSpec spec;
  spec.seed = taxonomy_seed;
  spec.groups = 3;
  spec.occupations_per_group = 2;
  spec.skills_per_occupation = 2;
  TaxonomyStore store = make_synthetic_taxonomy(spec).build();
  Vocab vocab = build_vocab(store, 1);
  ModelConfig model;
  model.hidden_dim = 8;
  model.heads = 2;
  model.ffn_dim = 16;
  model.layers = 1;
  model.max_len = 24;
  RunConfig run;
  run.seed = 5;
  run.total_steps = total;
  run.batch_size = 4;
  run.peak_lr = 1e-2;
  run.max_len = 24;
  run.log_every = 3;
  run.dev_fraction = 0.2;
  return {std::move(store), std::move(vocab), model, run};
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "escolm_pretrain_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string csv_of(const Pretrainer& p) {
  std::ostringstream out;
  p.write_metrics_csv(out);
  return out.str();
}

TEST(Pretrainer, SingleStepGivesOneFiniteRecord) {
  Fixture s = make_setup(3, 1);
  Pretrainer p(s.store, s.vocab, {}, s.model, s.run);
  p.run();
  ASSERT_EQ(p.log().size(), 1u);
  const LogRecord& r = p.log().front();
  EXPECT_EQ(r.step, 1u);
  for (double v : {r.train_loss, r.dev_loss, r.dev_mlm_loss, r.dev_erp_loss, r.mlm_acc, r.erp_acc}) {
    EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_NEAR(r.dev_loss, r.dev_mlm_loss + r.dev_erp_loss, 1e-12);
  EXPECT_TRUE(p.finished());
  EXPECT_EQ(p.train_examples_seen(), 4u);
}

TEST(Pretrainer, LogCadenceIncludesFinalStep) {
  Fixture s = make_setup(3, 7);
  Pretrainer p(s.store, s.vocab, {}, s.model, s.run);
  std::vector<std::uint64_t> seen;
  p.run(std::nullopt, [&](const LogRecord& r) { seen.push_back(r.step); });
  EXPECT_EQ(seen, (std::vector<std::uint64_t>{3, 6, 7}));
  ASSERT_EQ(p.log().size(), 3u);
  EXPECT_EQ(p.log()[2].lr, 0.0);
}

TEST(Pretrainer, DevSetSizeFollowsFraction) {
  Fixture s = make_setup(3, 10);
  Pretrainer p(s.store, s.vocab, {}, s.model, s.run);
  // 40 training instances at a 20% dev share.
  EXPECT_EQ(p.dev_set().size(), 10u);
  for (const auto& inst : p.dev_set()) {
    EXPECT_LE(inst.input_ids.size(), s.run.max_len);
    EXPECT_EQ(inst.input_ids.front(), kClsId);
  }
}

TEST(Pretrainer, DeterministicForSeed) {
  Fixture s = make_setup();
  Pretrainer a(s.store, s.vocab, {}, s.model, s.run);
  Pretrainer b(s.store, s.vocab, {}, s.model, s.run);
  a.run();
  b.run();
  EXPECT_EQ(a.params(), b.params());
  EXPECT_EQ(csv_of(a), csv_of(b));
  s.run.seed = 6;
  Pretrainer c(s.store, s.vocab, {}, s.model, s.run);
  c.run();
  EXPECT_FALSE(a.params() == c.params());
}

TEST(Pretrainer, ResumeMatchesContinuousRun) {
  Fixture s = make_setup(3, 10);
  Pretrainer full(s.store, s.vocab, {}, s.model, s.run);
  full.run();

  const fs::path ck = temp_path("resume.bin");
  {
    Pretrainer part(s.store, s.vocab, {}, s.model, s.run);
    part.run(4);
    EXPECT_EQ(part.step(), 4u);
    EXPECT_FALSE(part.finished());
    part.save_checkpoint(ck);
  }
  Pretrainer resumed = Pretrainer::resume(s.store, ck);
  EXPECT_EQ(resumed.step(), 4u);
  resumed.run();
  EXPECT_EQ(resumed.params(), full.params());
  EXPECT_EQ(resumed.optimizer().m, full.optimizer().m);
  EXPECT_EQ(resumed.optimizer().v, full.optimizer().v);
  EXPECT_EQ(csv_of(resumed), csv_of(full));
  std::ostringstream ja, jb;
  resumed.write_metrics_jsonl(ja);
  full.write_metrics_jsonl(jb);
  EXPECT_EQ(ja.str(), jb.str());
}

TEST(Pretrainer, CheckpointRejectsOtherTaxonomy) {
  Fixture s = make_setup(3, 4);
  Pretrainer p(s.store, s.vocab, {}, s.model, s.run);
  p.run(2);
  const fs::path ck = temp_path("fingerprint.bin");
  p.save_checkpoint(ck);
  Fixture other = make_setup(4, 4);
  EXPECT_THROW(Pretrainer::resume(other.store, ck), CheckpointError);
}

TEST(Pretrainer, CheckpointRejectsDamage) {
  Fixture s = make_setup(3, 4);
  Pretrainer p(s.store, s.vocab, {}, s.model, s.run);
  const fs::path ck = temp_path("damaged.bin");
  p.save_checkpoint(ck);
  const auto size = fs::file_size(ck);
  fs::resize_file(ck, size / 2);
  EXPECT_THROW(Pretrainer::resume(s.store, ck), CheckpointError);
  {
    std::ofstream out(ck, std::ios::binary | std::ios::trunc);
    out << "not a checkpoint";
  }
  EXPECT_THROW(Pretrainer::resume(s.store, ck), CheckpointError);
  EXPECT_THROW(Pretrainer::resume(s.store, temp_path("missing.bin")), CheckpointError);
}

TEST(Pretrainer, MetricsCsvLayout) {
  Fixture s = make_setup(3, 6);
  Pretrainer p(s.store, s.vocab, {}, s.model, s.run);
  p.run();
  std::istringstream in(csv_of(p));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,train_loss,dev_loss,mlm_acc,erp_acc");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
  }
  EXPECT_EQ(rows, 2);
}

TEST(Pretrainer, RejectsInconsistentConfig) {
  Fixture s = make_setup();
  ModelConfig bad = s.model;
  bad.max_len = 8;
  EXPECT_THROW(Pretrainer(s.store, s.vocab, {}, bad, s.run), ConfigError);
  bad = s.model;
  bad.vocab_size = s.vocab.size() + 1;
  EXPECT_THROW(Pretrainer(s.store, s.vocab, {}, bad, s.run), ConfigError);
  RunConfig run = s.run;
  run.dev_fraction = 0.0;
  EXPECT_THROW(Pretrainer(s.store, s.vocab, {}, s.model, run), ConfigError);
}

TEST(Pretrainer, FingerprintTracksContent) {
  EXPECT_EQ(taxonomy_fingerprint(make_setup(3).store), taxonomy_fingerprint(make_setup(3).store));
  EXPECT_NE(taxonomy_fingerprint(make_setup(3).store), taxonomy_fingerprint(make_setup(4).store));
}

}  // namespace
}  // namespace escolm
