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

// Command-line front end: ingest, stats, sample, pretrain, evaluate, synth.
//
// Every setting is a key of a flat INI file. A command resolves its keys
// from --config, then from flags, then from defaults, and echoes the result
// to <out>/config.ini. Exit codes: 0 success, 1 runtime failure, 2 input or
// validation error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "escolm/config.hpp"
#include "escolm/corpus_stats.hpp"
#include "escolm/errors.hpp"
#include "escolm/masking.hpp"
#include "escolm/metrics.hpp"
#include "escolm/pretrain.hpp"
#include "escolm/sampler.hpp"
#include "escolm/synthetic.hpp"
#include "escolm/taxonomy.hpp"
#include "escolm/tokenizer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace escolm;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

struct Key {
  std::string name;
  std::string default_value;  // empty: no default
  std::string help;
  bool boolean = false;
};

std::string flag_name(const std::string& key) {
  std::string out = key;
  for (char& c : out) {
    if (c == '_') c = '-';
  }
  return "--" + out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// One subcommand and its settings.
class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& description,
          std::vector<Key> keys)
      : app_(parent.add_subcommand(name, description)), keys_(std::move(keys)) {
    app_->add_option("--config", config_path_, "INI file with key = value settings");
    for (const Key& key : keys_) {
      if (key.boolean) {
        auto flag = std::make_unique<bool>(false);
        std::string help = key.help;
        help += key.default_value == "true" ? " (default on)" : " (default off)";
        options_[key.name] = app_->add_flag(flag_name(key.name) + ",!" +
                                                flag_name("no_" + key.name),
                                            *flag, help);
        bools_[key.name] = std::move(flag);
      } else {
        std::string help = key.help;
        if (!key.default_value.empty()) help += " (default " + key.default_value + ")";
        options_[key.name] = app_->add_option(flag_name(key.name), strings_[key.name], help);
      }
    }
  }

  CLI::App* app() const { return app_; }

  // File values, then flags, then defaults. Unknown file keys are errors.
  IniConfig resolve() const {
    IniConfig config;
    if (!config_path_.empty()) {
      config = IniConfig::load(config_path_);
      for (const auto& [key, value] : config.values()) {
        if (!options_.contains(key)) {
          throw ConfigError("unknown key '" + key + "' in " + config_path_);
        }
      }
    }
    for (const Key& key : keys_) {
      if (options_.at(key.name)->count() > 0) {
        config.set(key.name,
                   key.boolean ? (*bools_.at(key.name) ? "true" : "false")
                               : strings_.at(key.name));
      } else if (!config.contains(key.name) && !key.default_value.empty()) {
        config.set(key.name, key.default_value);
      }
    }
    return config;
  }

 private:
  CLI::App* app_;
  std::vector<Key> keys_;
  std::string config_path_;
  std::map<std::string, CLI::Option*> options_;
  std::map<std::string, std::string> strings_;
  std::map<std::string, std::unique_ptr<bool>> bools_;
};

// Typed access with "required" diagnostics.
class Settings {
 public:
  explicit Settings(IniConfig config) : config_(std::move(config)) {}

  const IniConfig& config() const { return config_; }
  bool has(const std::string& key) const { return config_.contains(key); }

  std::string str(const std::string& key) const {
    auto v = config_.get_string(key);
    if (!v) throw ConfigError("missing required setting '" + key + "'");
    return *v;
  }
  std::uint64_t uint(const std::string& key) const {
    auto v = config_.get_uint(key);
    if (!v) throw ConfigError("missing required setting '" + key + "'");
    return *v;
  }
  std::int64_t integer(const std::string& key) const {
    auto v = config_.get_int(key);
    if (!v) throw ConfigError("missing required setting '" + key + "'");
    return *v;
  }
  double real(const std::string& key) const {
    auto v = config_.get_double(key);
    if (!v) throw ConfigError("missing required setting '" + key + "'");
    return *v;
  }
  bool flag(const std::string& key) const { return config_.get_bool(key).value_or(false); }

 private:
  IniConfig config_;
};

fs::path existing_file(const Settings& s, const std::string& key) {
  fs::path path = s.str(key);
  if (!fs::is_regular_file(path)) {
    throw IoError(key + " '" + path.string() + "' does not exist or is not a file");
  }
  return path;
}

std::optional<fs::path> prepare_out(const Settings& s) {
  if (!s.has("out")) return std::nullopt;
  fs::path out = s.str("out");
  fs::create_directories(out);
  std::ofstream echo(out / "config.ini");
  s.config().write(echo);
  if (!echo) throw IoError("cannot write " + (out / "config.ini").string());
  return out;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

LoadOptions load_options(const Settings& s) {
  LoadOptions options;
  options.strict = !s.flag("lenient");
  if (s.has("languages")) {
    const auto langs = split_list(s.str("languages"));
    if (!langs.empty()) options.declared_languages.emplace(langs.begin(), langs.end());
  }
  return options;
}

TaxonomyStore load_store(const Settings& s, std::vector<std::string>* warnings = nullptr) {
  const fs::path path = existing_file(s, "taxonomy");
  std::vector<std::string> local;
  TaxonomyStore store = load_taxonomy(path, load_options(s), warnings ? warnings : &local);
  for (const auto& w : warnings ? *warnings : local) std::cerr << "warning: " << w << '\n';
  return store;
}

std::vector<Key> taxonomy_keys() {
  return {{"taxonomy", "", "taxonomy JSONL dump"},
          {"lenient", "", "warn about unknown fields instead of rejecting them", true},
          {"languages", "", "comma-separated declared language codes"}};
}

std::vector<Key> operator+(std::vector<Key> a, const std::vector<Key>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<Key> masking_keys() {
  return {{"select_rate", "0.15", "MLM selection probability"},
          {"mask_frac", "0.8", "share of selected tokens replaced by [MASK]"},
          {"random_frac", "0.1", "share replaced by a random token"},
          {"keep_frac", "0.1", "share left unchanged"}};
}

MaskingPolicy masking_policy(const Settings& s) {
  MaskingPolicy p{s.real("select_rate"), s.real("mask_frac"), s.real("random_frac"),
                  s.real("keep_frac")};
  p.validate();
  return p;
}

SamplerConfig sampler_config(const Settings& s) {
  SamplerConfig c;
  c.seed = s.uint("seed");
  c.strict_disjoint_random = s.flag("strict");
  c.max_retries = static_cast<int>(s.integer("max_retries"));
  c.validate();
  return c;
}

Vocab resolve_vocab(const Settings& s, const TaxonomyStore& store) {
  if (s.has("vocab")) return load_vocab(existing_file(s, "vocab"));
  return build_vocab(store, s.uint("min_freq"));
}

// ---------------------------------------------------------------- commands

int run_ingest(const Settings& s) {
  const auto out = prepare_out(s);
  std::vector<std::string> warnings;
  nlohmann::json report;
  try {
    const TaxonomyStore store = load_store(s, &warnings);
    report = {{"valid", true},
              {"occupations", store.count(ConceptKind::kOccupation)},
              {"skills", store.count(ConceptKind::kSkill)},
              {"aliases", store.count(ConceptKind::kAlias)},
              {"groups", store.groups().size()},
              {"languages", store.languages()},
              {"description_entries", store.entries().size()},
              {"warnings", warnings}};
    if (out) {
      auto file = open_out(*out / "taxonomy.jsonl", std::ios::out | std::ios::binary);
      serialize_taxonomy(store, file);
    }
  } catch (const Error& e) {
    if (out) {
      auto file = open_out(*out / "validation.json");
      file << nlohmann::json{{"valid", false}, {"error", e.what()}}.dump(2) << '\n';
    }
    throw;
  }
  if (out) open_out(*out / "validation.json") << report.dump(2) << '\n';
  std::cout << report.dump(2) << '\n';
  return 0;
}

int run_stats(const Settings& s) {
  const auto out = prepare_out(s);
  const TaxonomyStore store = load_store(s);
  const CorpusStats stats = corpus_stats(store);
  const std::string format = s.str("format");
  if (format != "table" && format != "json") throw ConfigError("format must be table or json");
  if (out) {
    open_out(*out / "stats.json") << stats_to_json(stats) << '\n';
    auto table = open_out(*out / "stats.txt");
    write_stats_table(stats, table);
  }
  if (format == "json") {
    std::cout << stats_to_json(stats) << '\n';
  } else {
    write_stats_table(stats, std::cout);
  }
  return 0;
}

int run_sample(const Settings& s) {
  const auto out = prepare_out(s);
  const TaxonomyStore store = load_store(s);
  const SamplerConfig config = sampler_config(s);
  const std::string mode = s.str("mode");
  if (mode != "pairs" && mode != "instances") throw ConfigError("mode must be pairs or instances");
  const auto n = static_cast<std::size_t>(s.uint("n"));
  const auto workers = static_cast<unsigned>(s.uint("workers"));
  if (workers == 0) throw ConfigError("workers must be positive");

  std::ofstream file;
  if (out) file = open_out(*out / (mode + ".jsonl"), std::ios::out | std::ios::binary);
  std::ostream& sink = out ? static_cast<std::ostream&>(file) : std::cout;
  const auto pairs = sample_pairs(store, config, n, workers);
  if (mode == "pairs") {
    for (const auto& p : pairs) sink << pair_to_json_line(store, p) << '\n';
    return 0;
  }
  const Vocab vocab = resolve_vocab(s, store);
  const MaskingPolicy policy = masking_policy(s);
  const auto max_len = static_cast<std::size_t>(s.uint("max_len"));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const TokenSequence seq =
        build_pair_input(vocab, store.label(p.anchor), store.description(p.anchor),
                         store.label(p.partner), store.description(p.partner), max_len);
    Rng rng = derive_stream(config.seed, "sample-mask", i);
    sink << instance_to_json_line(mask_sequence(seq, vocab, policy, p.relation, rng)) << '\n';
  }
  return 0;
}

int run_pretrain(const Settings& s) {
  const auto out = prepare_out(s);
  if (!out) throw ConfigError("pretrain needs --out");
  const TaxonomyStore store = load_store(s);
  const fs::path checkpoint = *out / "checkpoint.bin";

  std::optional<Pretrainer> trainer;
  if (s.has("resume")) {
    trainer.emplace(Pretrainer::resume(store, existing_file(s, "resume")));
  } else {
    RunConfig run;
    run.seed = s.uint("seed");
    run.total_steps = s.uint("steps");
    run.batch_size = s.uint("batch_size");
    run.peak_lr = s.real("peak_lr");
    run.warmup_ratio = s.real("warmup_ratio");
    run.adamw = {s.real("beta1"), s.real("beta2"), s.real("adam_eps"), s.real("weight_decay")};
    run.max_len = s.uint("max_len");
    run.log_every = s.uint("log_every");
    run.dev_fraction = s.real("dev_fraction");
    run.masking = masking_policy(s);
    const std::string reduction = s.str("mlm_reduction");
    if (reduction != "mean" && reduction != "sum") {
      throw ConfigError("mlm_reduction must be mean or sum");
    }
    run.loss.mlm_reduction = reduction == "sum" ? MlmReduction::kSum : MlmReduction::kMean;

    ModelConfig model;
    model.max_len = run.max_len;
    model.layers = s.uint("layers");
    model.hidden_dim = s.uint("hidden_dim");
    model.heads = s.uint("heads");
    model.ffn_dim = s.uint("ffn_dim");
    model.dropout = s.real("dropout");
    run.validate();

    trainer.emplace(store, resolve_vocab(s, store), sampler_config(s), model, run);
  }
  {
    auto vocab_file = open_out(*out / "vocab.txt", std::ios::out | std::ios::binary);
    write_vocab(trainer->vocab(), vocab_file);
  }

  std::optional<std::uint64_t> stop_after;
  if (s.has("stop_after")) stop_after = s.uint("stop_after");
  const std::uint64_t every = s.uint("checkpoint_every");
  const std::uint64_t target =
      std::min(stop_after.value_or(trainer->run_config().total_steps),
               trainer->run_config().total_steps);
  auto print = [](const LogRecord& r) {
    std::cout << fmt::format(
        "step {:>6}  lr {:.3e}  train {:.4f}  dev {:.4f}  mlm_acc {:.4f}  erp_acc {:.4f}\n",
        r.step, r.lr, r.train_loss, r.dev_loss, r.mlm_acc, r.erp_acc);
    std::cout.flush();
  };
  while (trainer->step() < target) {
    const std::uint64_t next =
        every == 0 ? target : std::min(target, (trainer->step() / every + 1) * every);
    trainer->run(next, print);
    if (every != 0) trainer->save_checkpoint(checkpoint);
  }
  trainer->save_checkpoint(checkpoint);

  auto csv = open_out(*out / "metrics.csv", std::ios::out | std::ios::binary);
  trainer->write_metrics_csv(csv);
  auto jsonl = open_out(*out / "metrics.jsonl", std::ios::out | std::ios::binary);
  trainer->write_metrics_jsonl(jsonl);
  return 0;
}

int run_evaluate(const Settings& s) {
  const auto out = prepare_out(s);
  const std::string task = s.str("task");
  const fs::path gold_path = existing_file(s, "gold");
  const fs::path pred_path = existing_file(s, "pred");
  std::ifstream gold_in(gold_path), pred_in(pred_path);

  EvalReport report;
  if (task == "seq") {
    const int column = static_cast<int>(s.integer("tag_column"));
    SurfaceOptions options;
    options.case_sensitive = s.flag("case_sensitive");
    const auto gold = read_tagged(gold_in, column);
    const auto pred = read_tagged(pred_in, column);
    report = evaluate_sequences(gold, pred, options);
  } else if (task == "mcc") {
    report = evaluate_classification(read_class_labels(gold_in), read_class_labels(pred_in));
  } else if (task == "mlc") {
    report = evaluate_ranking(read_ranking_jsonl(gold_in, "relevant"),
                              read_ranking_jsonl(pred_in, "ranking"));
  } else {
    throw ConfigError("task must be seq, mcc or mlc");
  }
  const std::string format = s.str("format");
  if (format != "table" && format != "json") throw ConfigError("format must be table or json");
  if (out) {
    open_out(*out / "report.json") << report_to_json(report) << '\n';
    auto table = open_out(*out / "report.txt");
    write_report_table(report, table);
  }
  if (format == "json") {
    std::cout << report_to_json(report) << '\n';
  } else {
    write_report_table(report, std::cout);
  }
  return 0;
}

int run_synth(const Settings& s) {
  const auto out = prepare_out(s);
  if (!out) throw ConfigError("synth needs --out");
  SyntheticSpec spec;
  spec.seed = s.uint("seed");
  spec.groups = s.uint("groups");
  spec.occupations_per_group = s.uint("occupations_per_group");
  spec.skills_per_occupation = s.uint("skills_per_occupation");
  spec.shared_skills = s.uint("shared_skills");
  spec.aliases_per_occupation = s.uint("aliases_per_occupation");
  spec.languages = split_list(s.str("languages"));
  spec.filler_words = s.uint("filler_words");
  spec.code_markers = s.flag("code_markers");
  const TaxonomyStore store = make_synthetic_taxonomy(spec).build();
  auto file = open_out(*out / "taxonomy.jsonl", std::ios::out | std::ios::binary);
  serialize_taxonomy(store, file);
  return 0;
}

}  // namespace

// Hides the implicit {false} marker CLI11 prints after negated flags.
class FlagFormatter : public CLI::Formatter {
 public:
  std::string make_option_name(const CLI::Option* opt, bool is_positional) const override {
    std::string name = CLI::Formatter::make_option_name(opt, is_positional);
    for (auto open = name.find('{'); open != std::string::npos; open = name.find('{')) {
      name.erase(open, name.find('}', open) - open + 1);
    }
    return name;
  }
};

int main(int argc, char** argv) {
  CLI::App app{"escolm: taxonomy-driven MLM + relation-prediction pre-training toolkit"};
  app.formatter(std::make_shared<FlagFormatter>());
  app.require_subcommand(1);

  const std::vector<Key> sampler = {
      {"seed", "", "random seed (required)"},
      {"strict", "true", "keep Random partners disjoint from Linked/Grouped", true},
      {"max_retries", "64", "anchor redraws before giving up"}};

  Command ingest(app, "ingest", "validate a taxonomy dump and write its normalized form",
                 taxonomy_keys() + std::vector<Key>{{"out", "", "output directory"}});
  Command stats(app, "stats", "per-language description statistics",
                taxonomy_keys() + std::vector<Key>{{"out", "", "output directory"},
                                                   {"format", "table", "table or json"}});
  Command sample(app, "sample", "emit sampled pairs (or masked instances) as JSONL",
                 taxonomy_keys() + sampler + masking_keys() +
                     std::vector<Key>{{"n", "", "number of samples (required)"},
                                      {"mode", "pairs", "pairs or instances"},
                                      {"workers", "1", "sampling threads"},
                                      {"vocab", "", "vocabulary file (instances mode)"},
                                      {"min_freq", "1", "vocabulary frequency cutoff"},
                                      {"max_len", "64", "input length"},
                                      {"out", "", "output directory (default stdout)"}});
  Command pretrain(
      app, "pretrain", "joint MLM + ERP pre-training",
      taxonomy_keys() + sampler + masking_keys() +
          std::vector<Key>{{"out", "", "output directory (required)"},
                           {"vocab", "", "vocabulary file (default: built from the taxonomy)"},
                           {"min_freq", "1", "vocabulary frequency cutoff"},
                           {"steps", "2000", "total optimizer steps"},
                           {"batch_size", "32", "instances per step"},
                           {"peak_lr", "0.001", "peak learning rate"},
                           {"warmup_ratio", "0.06", "warmup share of the steps"},
                           {"beta1", "0.9", "AdamW beta1"},
                           {"beta2", "0.98", "AdamW beta2"},
                           {"adam_eps", "1e-06", "AdamW epsilon"},
                           {"weight_decay", "0.01", "decoupled weight decay"},
                           {"max_len", "64", "input length"},
                           {"log_every", "50", "steps between metric records"},
                           {"dev_fraction", "0.01", "dev share of all instances"},
                           {"layers", "2", "encoder layers"},
                           {"hidden_dim", "32", "hidden size"},
                           {"heads", "2", "attention heads"},
                           {"ffn_dim", "64", "feed-forward size"},
                           {"dropout", "0", "dropout rate"},
                           {"mlm_reduction", "mean", "mean or sum"},
                           {"resume", "", "checkpoint to resume from"},
                           {"stop_after", "", "stop once this step is reached"},
                           {"checkpoint_every", "0", "steps between checkpoints (0: at end)"}});
  Command evaluate(app, "evaluate", "score predictions against gold data",
                   {{"task", "", "seq, mcc or mlc (required)"},
                    {"gold", "", "gold file"},
                    {"pred", "", "prediction file"},
                    {"tag_column", "-1", "tag column for seq data (negative counts from the end)"},
                    {"case_sensitive", "true", "case-sensitive surface deduplication", true},
                    {"format", "table", "table or json"},
                    {"out", "", "output directory"}});
  Command synth(app, "synth", "write a synthetic taxonomy",
                {{"out", "", "output directory (required)"},
                 {"seed", "0", "random seed"},
                 {"groups", "5", "major groups"},
                 {"occupations_per_group", "4", "occupations per group"},
                 {"skills_per_occupation", "5", "exclusive skills per occupation"},
                 {"shared_skills", "0", "skills listed by two occupations"},
                 {"aliases_per_occupation", "0", "aliases per occupation"},
                 {"languages", "xa,xb,xc", "comma-separated language codes"},
                 {"filler_words", "40", "filler vocabulary size"},
                 {"code_markers", "false", "add digit-only page and group codes", true}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  const std::vector<std::pair<Command*, int (*)(const Settings&)>> commands = {
      {&ingest, run_ingest},     {&stats, run_stats},       {&sample, run_sample},
      {&pretrain, run_pretrain}, {&evaluate, run_evaluate}, {&synth, run_synth}};
  try {
    for (const auto& [command, handler] : commands) {
      if (command->app()->parsed()) return handler(Settings(command->resolve()));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_input_error() ? kExitInput : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
