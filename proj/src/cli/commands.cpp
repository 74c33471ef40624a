// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bioner/corpus/examples.hpp"
#include "bioner/corpus/preprocess.hpp"
#include "bioner/model/checkpoint.hpp"
#include "bioner/ner/conll.hpp"
#include "bioner/ner/finetune.hpp"
#include "bioner/ner/metrics.hpp"
#include "bioner/pretrain/trainer.hpp"
#include "bioner/tokenizer/vocab.hpp"

namespace bioner::cli {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Replaces `path` in one rename, so readers never see a partial file.
void write_text(const fs::path& path, std::string_view text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw RunError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Exclusive ownership of an output directory for the lifetime of the run.
class DirectoryLock {
 public:
  explicit DirectoryLock(fs::path path) : path_(std::move(path)) {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      throw RunError("output directory is in use (" + path_.string() + " exists; remove it if no run is active)");
    }
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

/// Fails if any file the run will write is one of its inputs.
void guard_inputs(const RunConfig& config, std::string_view command, const fs::path& out,
                  std::initializer_list<const char*> outputs) {
  for (const auto& spec : schema_for(command)) {
    if (spec.type != ValueType::kPath) continue;
    const auto input = config.get_optional_path(spec.name);
    if (!input || !fs::exists(*input)) continue;
    for (const char* name : outputs) {
      const fs::path target = out / name;
      if (fs::exists(target) && fs::equivalent(*input, target)) {
        throw RunError("input '" + spec.name + "' is the output file " + target.string() + "; choose another --out");
      }
    }
  }
}

tokenizer::Vocab load_vocab(const RunConfig& config) {
  const fs::path dir = config.get_path("vocab_dir");
  return tokenizer::Vocab::load(dir / "vocab.txt", dir / "merges.txt");
}

std::string kv(std::initializer_list<std::pair<const char*, std::size_t>> entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += std::string(k) + "=" + std::to_string(v) + "\n";
  return out;
}

/// Appends formatted log records to `path` and flushes each line.
class LogFile {
 public:
  LogFile(const fs::path& path, bool append) : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw RunError("cannot write " + path.string());
  }
  void operator()(const optim::LogRecord& r) { out_ << optim::format_log_line(r) << std::flush; }

 private:
  std::ofstream out_;
};

/// Keeps only log lines whose step is at most `step`.
void truncate_log(const fs::path& path, std::size_t step) {
  if (!fs::exists(path)) return;
  std::istringstream in(read_text(path));
  std::string kept, line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (std::stoull(line.substr(0, line.find('\t'))) <= step) kept += line + "\n";
  }
  write_text(path, kept);
}

void prep_corpus(const RunConfig& config, const fs::path& out, std::ostream& console) {
  const fs::path input = config.get_path("input");
  std::vector<corpus::RawDocument> docs;
  if (fs::is_directory(input)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(input)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back({f.filename().string(), read_text(f)});
  } else {
    docs.push_back({input.filename().string(), read_text(input)});
  }
  const std::string text = corpus::preprocess_raw(docs);
  write_text(out / "corpus.txt", text);
  const auto stats = corpus::corpus_stats(text);
  const std::string summary =
      kv({{"documents", stats.documents}, {"sentences", stats.sentences}, {"words", stats.words}});
  write_text(out / "corpus_stats.txt", summary);
  console << summary;
}

void build_vocab(const RunConfig& config, const fs::path& out, std::ostream& console) {
  const std::string text = read_text(config.get_path("corpus"));
  const auto vocab = tokenizer::train_vocab(text, config.get_int("vocab_size"));
  vocab.save(out / "vocab.txt", out / "merges.txt");
  console << "vocab_size=" << vocab.size() << "\nmerges=" << vocab.merges().size() << "\n";
}

model::ModelConfig model_config(const RunConfig& config) {
  model::ModelConfig m;
  m.vocab_size = config.get_int("vocab_size");
  m.embedding_size = config.get_int("embedding_size");
  m.hidden_size = config.get_int("hidden_size");
  m.num_layers = config.get_int("num_layers");
  m.num_heads = config.get_int("num_heads");
  m.intermediate_size = config.get_int("intermediate_size");
  m.max_positions = config.get_int("max_position");
  m.share_parameters = config.get_bool("share_layers");
  m.dropout_rate = config.get_real("dropout");
  m.layer_norm_eps = config.get_real("layer_norm_eps");
  m.validate();
  return m;
}

template <typename T>
void pretrain_with(const RunConfig& config, const fs::path& out, std::ostream& console) {
  const model::ModelConfig mc = model_config(config);
  const auto vocab = load_vocab(config);
  if (static_cast<std::size_t>(vocab.size()) != mc.vocab_size) {
    throw RunError("vocab_size=" + std::to_string(mc.vocab_size) + " but the vocabulary has " +
                   std::to_string(vocab.size()) + " pieces");
  }
  corpus::ExampleOptions ex;
  ex.max_seq_length = config.get_int("max_seq_length");
  ex.max_predictions = config.get_int("max_predictions");
  ex.mask_rate = config.get_real("mask_rate");
  ex.dup_factor = config.get_int("dup_factor");
  if (ex.max_seq_length > mc.max_positions) throw RunError("max_seq_length exceeds max_position");

  pretrain::PretrainOptions opts;
  opts.optimizer = config.get_string("optimizer") == "lamb" ? pretrain::OptimizerKind::kLamb
                                                            : pretrain::OptimizerKind::kAdamW;
  opts.batch_size = config.get_int("batch_size");
  opts.eval_batch_size = config.get_int("eval_batch_size");
  opts.learning_rate = config.get_real("learning_rate");
  opts.train_steps = config.get_int("train_steps");
  opts.warmup_steps = config.get_int("warmup_steps");
  opts.weight_decay = config.get_real("weight_decay");
  opts.save_every = config.get_int("save_every");
  opts.eval_every = config.get_int("eval_every");
  opts.seed = config.get_int("seed");
  opts.validate();

  const double held_fraction = config.get_real("held_out_fraction");
  if (held_fraction < 0.0 || held_fraction >= 1.0) throw RunError("held_out_fraction must be in [0, 1)");
  const auto docs = corpus::tokenize_documents(corpus::parse_corpus(read_text(config.get_path("corpus"))), vocab);
  const auto held = static_cast<std::size_t>(std::ceil(held_fraction * static_cast<double>(docs.size())));
  const std::span<const corpus::TokenizedDocument> all(docs);
  const auto train_docs = all.first(docs.size() - held);
  const auto held_docs = all.last(held);

  std::vector<corpus::PretrainExample> examples;
  const auto cache = config.get_optional_path("example_cache");
  if (cache && fs::exists(*cache)) {
    examples = corpus::read_example_cache(*cache);
  } else {
    Rng rng = Rng::derive(opts.seed, "examples");
    examples = corpus::build_pretraining_examples(train_docs, vocab, rng, ex);
    if (cache) corpus::write_example_cache(*cache, examples);
  }
  std::vector<corpus::PretrainExample> held_out;
  if (!held_docs.empty()) {
    Rng rng = Rng::derive(opts.seed, "held-out-examples");
    held_out = corpus::build_pretraining_examples(held_docs, vocab, rng, ex);
  }
  if (examples.empty()) throw RunError("corpus yields no sentence pairs (documents need two or more sentences)");

  opts.data_fingerprint = pretrain::fingerprint(examples);
  const fs::path ckpt_path = out / "checkpoint.bin";
  const fs::path log_path = out / "train.log";
  auto state = pretrain::TrainState<T>::fresh(mc, opts);
  const bool resuming = config.get_bool("resume") && fs::exists(ckpt_path);
  if (resuming) {
    state = pretrain::TrainState<T>::resume(model::load_checkpoint<T>(ckpt_path, mc), opts);
    truncate_log(log_path, state.step);
    console << "resuming at step " << state.step << "\n";
  }
  LogFile log(log_path, resuming);
  pretrain::TrainHooks<T> hooks;
  hooks.log = [&log](const optim::LogRecord& r) { log(r); };
  hooks.checkpoint = [&](const pretrain::TrainState<T>& s) { model::save_checkpoint(ckpt_path, s.to_checkpoint(opts)); };
  const std::size_t stop_at = config.get_int("stop_at_step");
  if (stop_at > 0) {
    hooks.stop = [&](std::size_t step) {
      if (step != stop_at) return false;
      if (step % opts.save_every != 0) model::save_checkpoint(ckpt_path, state.to_checkpoint(opts));
      return true;
    };
  }
  pretrain::train(state, examples, held_out, opts, hooks);
  console << "examples=" << examples.size() << "\nheld_out_examples=" << held_out.size() << "\nsteps=" << state.step
          << "\n";
}

template <typename T>
void finetune_with(const RunConfig& config, const fs::path& out, std::ostream& console) {
  auto pretrained = model::load_checkpoint<T>(config.get_path("checkpoint"));
  pretrained.config.dropout_rate = config.get_real("dropout");
  pretrained.config.validate();
  const auto vocab = load_vocab(config);
  const auto train = ner::read_conll(config.get_path("train")).examples;
  const auto dev = ner::read_conll(config.get_path("dev")).examples;
  std::vector<ner::NerExample> test;
  if (const auto p = config.get_optional_path("test")) test = ner::read_conll(*p).examples;

  ner::FinetuneOptions opts;
  opts.batch_size = config.get_int("batch_size");
  opts.eval_batch_size = config.get_int("eval_batch_size");
  opts.learning_rate = config.get_real("learning_rate");
  opts.train_steps = config.get_int("train_steps");
  opts.warmup_steps = config.get_int("warmup_steps");
  opts.eval_every = config.get_int("save_every");
  opts.max_seq_length = config.get_int("max_seq_length");
  opts.lower_case = config.get_bool("lower_case");
  opts.weight_decay = config.get_real("weight_decay");
  opts.seed = config.get_int("seed");

  LogFile log(out / "train.log", false);
  const fs::path best_path = out / "best.ckpt";
  auto on_best = [&](const ner::NerModel<T>& m, std::size_t step) {
    auto ckpt = m.to_checkpoint();
    ckpt.metadata["finetune.best_step"] = std::to_string(step);
    model::save_checkpoint(best_path, ckpt);
  };
  const auto result = ner::finetune<T>(
      pretrained, vocab, train, dev, test, opts, [&log](const optim::LogRecord& r) { log(r); }, on_best);
  write_text(out / "dev_metrics.txt", "step=" + std::to_string(result.best_step) + "\n" +
                                          ner::format_report_kv(result.best_dev));
  console << "best_step=" << result.best_step << "\n";
  if (result.test) {
    write_text(out / "test_metrics.txt", ner::format_report_kv(*result.test));
    write_text(out / "test_report.txt", ner::format_report(*result.test));
    console << ner::format_report(*result.test);
  }
}

void evaluate(const RunConfig& config, const fs::path& out, std::ostream& console) {
  const auto gold = ner::read_conll(config.get_path("gold")).examples;
  const auto pred = ner::read_conll(config.get_path("pred")).examples;
  const auto report = ner::evaluate_entities(gold, pred);
  const std::string text = ner::format_report_kv(report);
  write_text(out / "metrics.txt", text);
  write_text(out / "report.txt", ner::format_report(report));
  console << text;
}

void predict(const RunConfig& config, const fs::path& out, std::ostream& console) {
  const auto m = ner::NerModel<float>::from_checkpoint(model::load_checkpoint<float>(config.get_path("checkpoint")));
  const auto vocab = load_vocab(config);
  const auto sentences = ner::read_conll_words(config.get_path("input"));
  const auto tagged = ner::predict(m, vocab, sentences, config.get_int("eval_batch_size"));
  write_text(out / "predictions.conll", ner::format_conll(tagged));
  console << "sentences=" << tagged.size() << "\n";
}

void stats(const RunConfig& config, const fs::path& out, std::ostream& console) {
  const fs::path input = config.get_path("input");
  std::string text;
  if (config.get_string("format") == "conll") {
    const auto s = ner::dataset_stats(input);
    text = kv({{"sentences", s.sentences}, {"tokens", s.tokens}, {"annotations", s.annotations}});
  } else {
    const auto s = corpus::corpus_stats(read_text(input));
    text = kv({{"documents", s.documents}, {"sentences", s.sentences}, {"words", s.words}});
  }
  write_text(out / "stats.txt", text);
  console << text;
}

void dispatch(std::string_view command, const RunConfig& config, const fs::path& out, std::ostream& console) {
  auto wide = [&config] { return config.raw("precision") == "64"; };
  if (command == "prep-corpus") {
    guard_inputs(config, command, out, {"corpus.txt", "corpus_stats.txt"});
    prep_corpus(config, out, console);
  } else if (command == "build-vocab") {
    guard_inputs(config, command, out, {"vocab.txt", "merges.txt"});
    build_vocab(config, out, console);
  } else if (command == "pretrain") {
    guard_inputs(config, command, out, {"checkpoint.bin", "train.log"});
    wide() ? pretrain_with<double>(config, out, console) : pretrain_with<float>(config, out, console);
  } else if (command == "finetune") {
    guard_inputs(config, command, out,
                 {"best.ckpt", "train.log", "dev_metrics.txt", "test_metrics.txt", "test_report.txt"});
    wide() ? finetune_with<double>(config, out, console) : finetune_with<float>(config, out, console);
  } else if (command == "evaluate") {
    guard_inputs(config, command, out, {"metrics.txt", "report.txt"});
    evaluate(config, out, console);
  } else if (command == "predict") {
    guard_inputs(config, command, out, {"predictions.conll"});
    predict(config, out, console);
  } else if (command == "stats") {
    guard_inputs(config, command, out, {"stats.txt"});
    stats(config, out, console);
  } else {
    throw ConfigError("unknown command '" + std::string(command) + "'");
  }
}

}  // namespace

void run(std::string_view command, const RunConfig& config, const fs::path& out_dir, std::ostream& console) {
  schema_for(command);
  if (config.get_int("threads") == 0) throw ConfigError("threads must be at least 1");
  fs::create_directories(out_dir);
  DirectoryLock lock(out_dir / kLockFile);
  const fs::path marker = out_dir / kIncompleteMarker;
  write_text(marker, std::string(command) + " running\n");
  try {
    write_text(out_dir / kEffectiveConfig, config.effective());
    dispatch(command, config, out_dir, console);
  } catch (const std::exception& e) {
    std::ofstream(marker, std::ios::trunc) << command << " failed: " << e.what() << "\n";
    throw;
  }
  fs::remove(marker);
}

}  // namespace bioner::cli
