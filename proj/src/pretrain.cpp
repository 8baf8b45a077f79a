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

#include "escolm/pretrain.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "escolm/errors.hpp"
#include "escolm/kernels.hpp"
#include "json.hpp"

namespace escolm {

using nlohmann::json;

namespace {

constexpr char kCheckpointMagic[8] = {'E', 'S', 'C', 'O', 'L', 'M', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

ModelConfig resolve_model(ModelConfig model, const Vocab& vocab, const RunConfig& run) {
  if (model.vocab_size == 0) model.vocab_size = vocab.size();
  if (model.vocab_size != vocab.size()) {
    throw ConfigError("model vocab_size " + std::to_string(model.vocab_size) +
                      " does not match the vocabulary (" + std::to_string(vocab.size()) + ")");
  }
  if (model.max_len < run.max_len) {
    throw ConfigError("model max_len must cover the input max_len");
  }
  model.validate();
  return model;
}

SamplerConfig stream_config(SamplerConfig base, std::uint64_t seed, const char* label) {
  base.seed = derive_seed(seed, label);
  return base;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string bits_hex(double v) { return fmt::format("{:016x}", std::bit_cast<std::uint64_t>(v)); }

double hex_bits(const std::string& s) {
  return std::bit_cast<double>(static_cast<std::uint64_t>(std::stoull(s, nullptr, 16)));
}

json model_to_json(const ModelConfig& m) {
  return {{"vocab_size", m.vocab_size}, {"max_len", m.max_len},   {"layers", m.layers},
          {"hidden_dim", m.hidden_dim}, {"heads", m.heads},       {"ffn_dim", m.ffn_dim},
          {"dropout", m.dropout}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.vocab_size = j.at("vocab_size");
  m.max_len = j.at("max_len");
  m.layers = j.at("layers");
  m.hidden_dim = j.at("hidden_dim");
  m.heads = j.at("heads");
  m.ffn_dim = j.at("ffn_dim");
  m.dropout = j.at("dropout");
  return m;
}

json run_to_json(const RunConfig& r) {
  return {{"seed", r.seed},
          {"total_steps", r.total_steps},
          {"batch_size", r.batch_size},
          {"peak_lr", r.peak_lr},
          {"warmup_ratio", r.warmup_ratio},
          {"beta1", r.adamw.beta1},
          {"beta2", r.adamw.beta2},
          {"eps", r.adamw.eps},
          {"weight_decay", r.adamw.weight_decay},
          {"max_len", r.max_len},
          {"log_every", r.log_every},
          {"dev_fraction", r.dev_fraction},
          {"select_rate", r.masking.select_rate},
          {"mask_frac", r.masking.mask_frac},
          {"random_frac", r.masking.random_frac},
          {"keep_frac", r.masking.keep_frac},
          {"mlm_reduction", r.loss.mlm_reduction == MlmReduction::kMean ? "mean" : "sum"}};
}

RunConfig run_from_json(const json& j) {
  RunConfig r;
  r.seed = j.at("seed");
  r.total_steps = j.at("total_steps");
  r.batch_size = j.at("batch_size");
  r.peak_lr = j.at("peak_lr");
  r.warmup_ratio = j.at("warmup_ratio");
  r.adamw.beta1 = j.at("beta1");
  r.adamw.beta2 = j.at("beta2");
  r.adamw.eps = j.at("eps");
  r.adamw.weight_decay = j.at("weight_decay");
  r.max_len = j.at("max_len");
  r.log_every = j.at("log_every");
  r.dev_fraction = j.at("dev_fraction");
  r.masking.select_rate = j.at("select_rate");
  r.masking.mask_frac = j.at("mask_frac");
  r.masking.random_frac = j.at("random_frac");
  r.masking.keep_frac = j.at("keep_frac");
  r.loss.mlm_reduction =
      j.at("mlm_reduction").get<std::string>() == "sum" ? MlmReduction::kSum : MlmReduction::kMean;
  return r;
}

json record_to_json(const LogRecord& r) {
  json by_relation = json::object();
  for (Relation rel : kAllRelations) {
    const double v = r.erp_acc_by_relation[static_cast<std::size_t>(to_int(rel))];
    by_relation[std::string(to_string(rel))] = std::isnan(v) ? json(nullptr) : json(v);
  }
  return {{"step", r.step},
          {"lr", r.lr},
          {"train_loss", r.train_loss},
          {"dev_loss", r.dev_loss},
          {"dev_mlm_loss", r.dev_mlm_loss},
          {"dev_erp_loss", r.dev_erp_loss},
          {"mlm_acc", r.mlm_acc},
          {"erp_acc", r.erp_acc},
          {"erp_acc_by_relation", by_relation}};
}

LogRecord record_from_json(const json& j) {
  LogRecord r;
  r.step = j.at("step");
  r.lr = j.at("lr");
  r.train_loss = j.at("train_loss");
  r.dev_loss = j.at("dev_loss");
  r.dev_mlm_loss = j.at("dev_mlm_loss");
  r.dev_erp_loss = j.at("dev_erp_loss");
  r.mlm_acc = j.at("mlm_acc");
  r.erp_acc = j.at("erp_acc");
  for (Relation rel : kAllRelations) {
    const json& v = j.at("erp_acc_by_relation").at(std::string(to_string(rel)));
    r.erp_acc_by_relation[static_cast<std::size_t>(to_int(rel))] =
        v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  }
  return r;
}

void write_doubles(std::ostream& out, std::span<const double> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::span<double> values) {
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw CheckpointError("truncated tensor data");
}

}  // namespace

void RunConfig::validate() const {
  if (total_steps == 0) throw ConfigError("total_steps must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (log_every == 0) throw ConfigError("log_every must be positive");
  if (!(peak_lr > 0.0)) throw ConfigError("peak_lr must be positive");
  if (!(warmup_ratio >= 0.0 && warmup_ratio <= 1.0)) {
    throw ConfigError("warmup_ratio must lie in [0, 1]");
  }
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    throw ConfigError("dev_fraction must lie in (0, 1)");
  }
  if (max_len < 8) throw ConfigError("max_len must be >= 8");
  masking.validate();
}

std::uint64_t taxonomy_fingerprint(const TaxonomyStore& store) {
  std::ostringstream out;
  serialize_taxonomy(store, out);
  return fnv1a64(out.str());
}

Pretrainer::Pretrainer(ResumeTag, const TaxonomyStore& store, Vocab vocab, SamplerConfig sampler,
                       ModelConfig model, RunConfig run)
    : store_(&store),
      vocab_(std::move(vocab)),
      sampler_(sampler),
      model_(resolve_model(model, vocab_, run)),
      run_(run),
      taxonomy_fingerprint_(taxonomy_fingerprint(store)),
      params_(model_),
      train_stream_(store, stream_config(sampler, run.seed, "train-pairs")) {
  run_.validate();
  sampler_.validate();
  optimizer_ = OptimizerState::create(params_.values().size(),
                                      {run_.peak_lr, run_.warmup_ratio, run_.total_steps},
                                      run_.adamw);
  decay_mask_ = params_.decay_mask();
  build_dev_set();
}

Pretrainer::Pretrainer(const TaxonomyStore& store, Vocab vocab, SamplerConfig sampler,
                       ModelConfig model, RunConfig run)
    : Pretrainer(ResumeTag{}, store, std::move(vocab), sampler, model, run) {
  Rng init = derive_stream(run_.seed, "init");
  params_ = init_params(model_, init);
}

void Pretrainer::build_dev_set() {
  const double train_instances =
      static_cast<double>(run_.total_steps) * static_cast<double>(run_.batch_size);
  const auto dev_size = static_cast<std::size_t>(
      std::max(1.0, std::ceil(train_instances * run_.dev_fraction / (1.0 - run_.dev_fraction))));
  PairStream stream(*store_, stream_config(sampler_, run_.seed, "dev-pairs"));
  Rng mask_rng = derive_stream(run_.seed, "dev-mask");
  dev_.clear();
  dev_pairs_.clear();
  for (std::size_t i = 0; i < dev_size; ++i) {
    const PairSample pair = stream.next();
    dev_pairs_.emplace(pair.anchor, pair.partner);
    dev_.push_back(make_instance(pair, mask_rng));
  }
}

MaskedInstance Pretrainer::make_instance(const PairSample& pair, Rng& mask_rng) const {
  const TokenSequence seq =
      build_pair_input(vocab_, store_->label(pair.anchor), store_->description(pair.anchor),
                       store_->label(pair.partner), store_->description(pair.partner),
                       run_.max_len);
  return mask_sequence(seq, vocab_, run_.masking, pair.relation, mask_rng);
}

std::vector<MaskedInstance> Pretrainer::next_batch() {
  Rng mask_rng = derive_stream(run_.seed, "mask", optimizer_.step);
  std::vector<MaskedInstance> batch;
  batch.reserve(run_.batch_size);
  while (batch.size() < run_.batch_size) {
    const PairSample pair = train_stream_.next();
    if (dev_pairs_.contains({pair.anchor, pair.partner})) continue;
    batch.push_back(make_instance(pair, mask_rng));
  }
  return batch;
}

LogRecord Pretrainer::evaluate_dev(double train_loss, double lr) const {
  const BatchStats stats = evaluate(params_, dev_, run_.loss);
  LogRecord r;
  r.step = optimizer_.step;
  r.lr = lr;
  r.train_loss = train_loss;
  r.dev_loss = stats.loss.total;
  r.dev_mlm_loss = stats.loss.mlm;
  r.dev_erp_loss = stats.loss.erp;
  r.mlm_acc = ratio(stats.mlm_correct, stats.mlm_labeled);
  r.erp_acc = ratio(stats.erp_correct, stats.erp_total);
  for (std::size_t i = 0; i < 3; ++i) {
    r.erp_acc_by_relation[i] = stats.erp_total_by_relation[i] == 0
                                   ? std::numeric_limits<double>::quiet_NaN()
                                   : ratio(stats.erp_correct_by_relation[i],
                                           stats.erp_total_by_relation[i]);
  }
  return r;
}

void Pretrainer::run(std::optional<std::uint64_t> until_step,
                     const std::function<void(const LogRecord&)>& on_log) {
  const std::uint64_t target = std::min(until_step.value_or(run_.total_steps), run_.total_steps);
  while (optimizer_.step < target) {
    const std::vector<MaskedInstance> batch = next_batch();
    Rng dropout_rng = derive_stream(run_.seed, "dropout", optimizer_.step);
    Gradients grads = backward(params_, batch, run_.loss, &dropout_rng);
    const double lr = adamw_update(params_.values(), grads.values, decay_mask_, optimizer_);
    interval_loss_sum_ += grads.stats.loss.total;
    ++interval_steps_;
    if (optimizer_.step % run_.log_every == 0 || optimizer_.step == run_.total_steps) {
      log_.push_back(
          evaluate_dev(interval_loss_sum_ / static_cast<double>(interval_steps_), lr));
      interval_loss_sum_ = 0.0;
      interval_steps_ = 0;
      if (on_log) on_log(log_.back());
    }
  }
}

void Pretrainer::write_metrics_csv(std::ostream& out) const {
  out << "step,train_loss,dev_loss,mlm_acc,erp_acc\n";
  for (const auto& r : log_) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.step, r.train_loss, r.dev_loss,
                       r.mlm_acc, r.erp_acc);
  }
}

void Pretrainer::write_metrics_jsonl(std::ostream& out) const {
  for (const auto& r : log_) out << record_to_json(r).dump() << '\n';
}

void Pretrainer::save_checkpoint(const std::filesystem::path& path) const {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint tensors are stored little-endian");
  json header = {{"format", "escolm-checkpoint"},
                 {"model", model_to_json(model_)},
                 {"run", run_to_json(run_)},
                 {"sampler",
                  {{"strict_disjoint_random", sampler_.strict_disjoint_random},
                   {"max_retries", sampler_.max_retries}}},
                 {"vocab", std::vector<std::string>(vocab_.regular_tokens().begin(),
                                                    vocab_.regular_tokens().end())},
                 {"taxonomy_fingerprint", fmt::format("{:016x}", taxonomy_fingerprint_)},
                 {"kernel_isa", std::string(kernels::to_string(kernels::active().isa))},
                 {"step", optimizer_.step},
                 {"train_stream_position", train_stream_.position()},
                 {"interval_loss_sum", bits_hex(interval_loss_sum_)},
                 {"interval_steps", interval_steps_},
                 {"parameter_count", params_.values().size()},
                 {"log", json::array()}};
  for (const auto& r : log_) header["log"].push_back(record_to_json(r));
  const std::string text = header.dump();

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + tmp.string() + "'");
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    const std::uint32_t version = kCheckpointVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t header_size = text.size();
    out.write(reinterpret_cast<const char*>(&header_size), sizeof(header_size));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_doubles(out, params_.values());
    write_doubles(out, optimizer_.m);
    write_doubles(out, optimizer_.v);
    out.flush();
    if (!out) throw IoError("failed writing checkpoint '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Pretrainer Pretrainer::resume(const TaxonomyStore& store, const std::filesystem::path& checkpoint) {
  std::ifstream in(checkpoint, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + checkpoint.string() + "'");
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw CheckpointError("'" + checkpoint.string() + "' is not a checkpoint");
  }
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  std::uint64_t header_size = 0;
  in.read(reinterpret_cast<char*>(&header_size), sizeof(header_size));
  std::string text(header_size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw CheckpointError("truncated header");

  try {
    const json header = json::parse(text);
    if (header.at("taxonomy_fingerprint").get<std::string>() !=
        fmt::format("{:016x}", taxonomy_fingerprint(store))) {
      throw CheckpointError("checkpoint was written for a different taxonomy");
    }
    SamplerConfig sampler;
    sampler.strict_disjoint_random = header.at("sampler").at("strict_disjoint_random");
    sampler.max_retries = header.at("sampler").at("max_retries");
    Pretrainer p(ResumeTag{}, store,
                 Vocab::from_tokens(header.at("vocab").get<std::vector<std::string>>()), sampler,
                 model_from_json(header.at("model")), run_from_json(header.at("run")));
    if (header.at("parameter_count").get<std::size_t>() != p.params_.values().size()) {
      throw CheckpointError("parameter count does not match the model config");
    }
    read_doubles(in, p.params_.values());
    read_doubles(in, p.optimizer_.m);
    read_doubles(in, p.optimizer_.v);
    p.optimizer_.step = header.at("step");
    p.train_stream_.seek(header.at("train_stream_position").get<std::uint64_t>());
    p.interval_loss_sum_ = hex_bits(header.at("interval_loss_sum"));
    p.interval_steps_ = header.at("interval_steps");
    for (const auto& r : header.at("log")) p.log_.push_back(record_from_json(r));
    return p;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed header: ") + e.what());
  }
}

}  // namespace escolm
