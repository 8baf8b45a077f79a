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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "escolm/masking.hpp"
#include "escolm/model.hpp"
#include "escolm/optimizer.hpp"
#include "escolm/sampler.hpp"
#include "escolm/taxonomy.hpp"
#include "escolm/tokenizer.hpp"

namespace escolm {

struct RunConfig {
  std::uint64_t seed = 0;
  std::uint64_t total_steps = 2000;
  std::size_t batch_size = 32;
  double peak_lr = 1e-3;
  double warmup_ratio = 0.06;
  AdamWHyper adamw;
  std::size_t max_len = 64;
  std::size_t log_every = 50;
  double dev_fraction = 0.01;
  MaskingPolicy masking;
  LossOptions loss;

  void validate() const;
};

struct LogRecord {
  std::uint64_t step = 0;
  double lr = 0.0;
  double train_loss = 0.0;  // mean batch loss since the previous record
  double dev_loss = 0.0;
  double dev_mlm_loss = 0.0;
  double dev_erp_loss = 0.0;
  double mlm_acc = 0.0;
  double erp_acc = 0.0;
  // NaN when the dev set holds no instance of that relation.
  std::array<double, 3> erp_acc_by_relation{};
};

// Joint MLM + ERP pre-training over pairs sampled from a taxonomy.
//
// Every source of randomness is a labeled stream of the run seed: parameter
// init, dev pairs, train pairs, dev masking, and a per-step masking (and
// dropout) stream. The dev set is a separately drawn 1% of the instances and
// masked once; train pairs identical to a dev pair are skipped. A run
// resumed from a checkpoint therefore replays the uninterrupted run exactly.
class Pretrainer {
 public:
  Pretrainer(const TaxonomyStore& store, Vocab vocab, SamplerConfig sampler,
             ModelConfig model, RunConfig run);

  // Throws CheckpointError when the file is unreadable or was written for a
  // different taxonomy.
  static Pretrainer resume(const TaxonomyStore& store, const std::filesystem::path& checkpoint);

  // Trains until `until_step` (capped at total_steps) or the schedule ends.
  void run(std::optional<std::uint64_t> until_step = std::nullopt,
           const std::function<void(const LogRecord&)>& on_log = {});

  std::uint64_t step() const { return optimizer_.step; }
  bool finished() const { return optimizer_.step >= run_.total_steps; }
  const std::vector<LogRecord>& log() const { return log_; }
  const Parameters& params() const { return params_; }
  const OptimizerState& optimizer() const { return optimizer_; }
  const Vocab& vocab() const { return vocab_; }
  const RunConfig& run_config() const { return run_; }
  const std::vector<MaskedInstance>& dev_set() const { return dev_; }
  std::size_t train_examples_seen() const { return step() * run_.batch_size; }

  // Atomic: writes a temporary file and renames it over `path`.
  void save_checkpoint(const std::filesystem::path& path) const;

  // CSV header `step,train_loss,dev_loss,mlm_acc,erp_acc`.
  void write_metrics_csv(std::ostream& out) const;
  // One JSON object per record with every LogRecord field.
  void write_metrics_jsonl(std::ostream& out) const;

 private:
  struct ResumeTag {};
  Pretrainer(ResumeTag, const TaxonomyStore& store, Vocab vocab, SamplerConfig sampler,
             ModelConfig model, RunConfig run);

  void build_dev_set();
  MaskedInstance make_instance(const PairSample& pair, Rng& mask_rng) const;
  std::vector<MaskedInstance> next_batch();
  LogRecord evaluate_dev(double train_loss, double lr) const;

  const TaxonomyStore* store_;
  Vocab vocab_;
  SamplerConfig sampler_;
  ModelConfig model_;
  RunConfig run_;
  std::uint64_t taxonomy_fingerprint_ = 0;

  Parameters params_;
  OptimizerState optimizer_;
  std::vector<bool> decay_mask_;
  std::vector<MaskedInstance> dev_;
  std::set<std::pair<EntryRef, EntryRef>> dev_pairs_;
  PairStream train_stream_;

  double interval_loss_sum_ = 0.0;
  std::uint64_t interval_steps_ = 0;
  std::vector<LogRecord> log_;
};

// FNV-1a of the canonical serialization.
std::uint64_t taxonomy_fingerprint(const TaxonomyStore& store);

}  // namespace escolm
