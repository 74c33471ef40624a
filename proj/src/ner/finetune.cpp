// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/ner/finetune.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "bioner/model/albert.hpp"
#include "bioner/ner/align.hpp"
#include "bioner/numerics/rng.hpp"
#include "bioner/optim/optimizer.hpp"
#include "bioner/optim/schedule.hpp"

namespace bioner::ner {

namespace {

constexpr const char* kLabelsKey = "ner.labels";
constexpr const char* kLowerCaseKey = "ner.lower_case";
constexpr const char* kMaxSeqKey = "ner.max_seq_length";

std::set<std::string> entity_types(std::span<const NerExample> examples) {
  std::set<std::string> types;
  for (const auto& ex : examples) {
    for (const auto& l : ex.labels) {
      const auto parsed = parse_label(l);
      if (!parsed) throw ConllError("label '" + l + "' is not a BIO label");
      if (parsed->tag != Tag::kOutside) types.insert(parsed->type);
    }
  }
  return types;
}

/// Batch over `rows` with padding columns trimmed, plus matching labels.
std::pair<model::Batch, std::vector<std::int32_t>> make_batch(std::span<const AlignedExample* const> rows) {
  std::vector<tokenizer::InputSequence> inputs;
  inputs.reserve(rows.size());
  for (const auto* r : rows) inputs.push_back(r->input);
  model::Batch batch = model::Batch::from_sequences(inputs, true);
  std::vector<std::int32_t> labels;
  labels.reserve(batch.tokens());
  for (const auto* r : rows) labels.insert(labels.end(), r->labels.begin(), r->labels.begin() + batch.seq_len);
  return {std::move(batch), std::move(labels)};
}

void check_vocab(const model::ModelConfig& config, const tokenizer::Vocab& vocab) {
  if (static_cast<std::size_t>(vocab.size()) != config.vocab_size) {
    throw model::ConfigMismatch("vocabulary has " + std::to_string(vocab.size()) + " pieces, checkpoint expects " +
                                std::to_string(config.vocab_size));
  }
}

}  // namespace

void FinetuneOptions::validate() const {
  if (batch_size == 0 || eval_batch_size == 0) throw ConllError("batch sizes must be positive");
  if (eval_every == 0) throw ConllError("eval_every must be positive");
  if (!(weight_decay >= 0.0)) throw ConllError("weight_decay must be non-negative");
  optim::Schedule{learning_rate, warmup_steps, train_steps}.validate();
}

template <typename T>
model::Checkpoint<T> NerModel<T>::to_checkpoint() const {
  model::Checkpoint<T> ckpt;
  ckpt.config = config;
  ckpt.heads = model::HeadSet::encoder_only();
  ckpt.heads.ner_labels = labels.size();
  ckpt.params = params;
  ckpt.metadata[kLabelsKey] = labels.serialize();
  ckpt.metadata[kLowerCaseKey] = lower_case ? "true" : "false";
  ckpt.metadata[kMaxSeqKey] = std::to_string(max_seq_length);
  return ckpt;
}

template <typename T>
NerModel<T> NerModel<T>::from_checkpoint(model::Checkpoint<T> ckpt) {
  if (ckpt.heads.ner_labels == 0) throw ConllError("checkpoint has no token-classification head");
  for (const char* key : {kLabelsKey, kLowerCaseKey, kMaxSeqKey}) {
    if (!ckpt.metadata.count(key)) throw ConllError(std::string("checkpoint metadata lacks ") + key);
  }
  NerModel m;
  m.config = ckpt.config;
  m.labels = LabelSet::deserialize(ckpt.metadata.at(kLabelsKey));
  if (m.labels.size() != ckpt.heads.ner_labels) throw ConllError("checkpoint label list disagrees with its head size");
  const std::string& lc = ckpt.metadata.at(kLowerCaseKey);
  if (lc != "true" && lc != "false") throw ConllError("bad " + std::string(kLowerCaseKey) + " value '" + lc + "'");
  m.lower_case = lc == "true";
  try {
    m.max_seq_length = std::stoul(ckpt.metadata.at(kMaxSeqKey));
  } catch (const std::exception&) {
    throw ConllError("bad " + std::string(kMaxSeqKey) + " value");
  }
  m.params = std::move(ckpt.params);
  return m;
}

LabelSet combined_label_set(std::span<const NerExample> train, std::span<const NerExample> dev,
                            std::span<const NerExample> test) {
  const auto train_types = entity_types(train);
  for (const auto split : {dev, test}) {
    for (const auto& type : entity_types(split)) {
      if (!train_types.count(type)) {
        throw ConllError("entity type '" + type + "' occurs in dev/test but never in train");
      }
    }
  }
  std::set<std::string> all{"O"};
  for (const auto split : {train, dev, test}) {
    for (const auto& ex : split) all.insert(ex.labels.begin(), ex.labels.end());
  }
  return LabelSet(std::vector<std::string>(all.begin(), all.end()));
}

template <typename T>
std::vector<NerExample> predict(const NerModel<T>& m, const tokenizer::Vocab& vocab,
                                std::span<const NerExample> sentences, std::size_t batch_size) {
  check_vocab(m.config, vocab);
  if (batch_size == 0) throw ConllError("batch size must be positive");
  std::vector<NerExample> out(sentences.size());
  std::vector<AlignedExample> aligned;
  std::vector<std::size_t> index;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    out[s].words = sentences[s].words;
    out[s].labels.assign(sentences[s].words.size(), "O");
    if (sentences[s].words.empty()) continue;
    NerExample unlabelled{sentences[s].words, {}};
    aligned.push_back(align_subwords(unlabelled, vocab, m.labels, m.max_seq_length, m.lower_case));
    index.push_back(s);
  }
  const std::size_t L = m.labels.size();
  for (std::size_t begin = 0; begin < aligned.size(); begin += batch_size) {
    const std::size_t end = std::min(aligned.size(), begin + batch_size);
    std::vector<const AlignedExample*> rows;
    for (std::size_t i = begin; i < end; ++i) rows.push_back(&aligned[i]);
    const auto [batch, unused] = make_batch(rows);
    const Tensor<T> logits = model::token_logits(m.params, m.config, batch);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto& labels = out[index[begin + r]].labels;
      const auto& positions = rows[r]->word_positions;
      for (std::size_t w = 0; w < positions.size(); ++w) {
        const T* scores = logits.data() + (r * batch.seq_len + positions[w]) * L;
        labels[w] = m.labels.label(static_cast<std::size_t>(std::max_element(scores, scores + L) - scores));
      }
    }
  }
  return out;
}

template <typename T>
FinetuneResult<T> finetune(const model::Checkpoint<T>& pretrained, const tokenizer::Vocab& vocab,
                           std::span<const NerExample> train, std::span<const NerExample> dev,
                           std::span<const NerExample> test, const FinetuneOptions& options,
                           const optim::LogSink& log, const BestModelHook<T>& on_best) {
  options.validate();
  check_vocab(pretrained.config, vocab);
  if (train.empty() || dev.empty()) throw ConllError("fine-tuning needs non-empty train and dev sets");
  if (options.max_seq_length > pretrained.config.max_positions) {
    throw ConllError("max_seq_length " + std::to_string(options.max_seq_length) + " exceeds the model's " +
                     std::to_string(pretrained.config.max_positions) + " positions");
  }

  NerModel<T> current;
  current.config = pretrained.config;
  current.labels = combined_label_set(train, dev, test);
  current.lower_case = options.lower_case;
  current.max_seq_length = options.max_seq_length;
  model::HeadSet heads = model::HeadSet::encoder_only();
  heads.ner_labels = current.labels.size();
  for (const auto& [name, shape] : model::parameter_inventory(current.config, heads)) {
    if (pretrained.params.contains(name)) current.params.insert(name, pretrained.params.at(name));
  }
  Rng head_rng = Rng::derive(options.seed, "ner-head");
  model::init_missing_parameters(current.params, current.config, heads, head_rng);
  model::check_parameters(current.params, current.config, heads);

  std::vector<AlignedExample> aligned;
  aligned.reserve(train.size());
  for (const auto& ex : train) {
    aligned.push_back(align_subwords(ex, vocab, current.labels, options.max_seq_length, options.lower_case));
  }

  const optim::Schedule schedule{options.learning_rate, options.warmup_steps, options.train_steps};
  optim::OptimizerState<T> state;
  state.hyper.weight_decay = options.weight_decay;
  EpochStream order(aligned.size(), options.seed, "finetune-order");
  auto emit = [&](std::size_t step, const char* metric, double value) {
    if (log) log(optim::LogRecord{step, metric, value});
  };

  FinetuneResult<T> result;
  bool have_best = false;
  auto grads = current.params.zeros_like();
  std::vector<const AlignedExample*> rows(options.batch_size);
  for (std::size_t step = 1; step <= options.train_steps; ++step) {
    for (auto& r : rows) r = &aligned[order.next()];
    const auto [batch, labels] = make_batch(rows);
    grads.set_zero();
    Rng dropout = Rng::derive(options.seed, "finetune-dropout", step);
    const T loss =
        model::token_classification_loss_and_gradients(current.params, current.config, batch, labels, grads, &dropout);
    const double lr = optim::lr_at(schedule, step);
    optim::adamw_step(state, current.params, grads, lr);
    emit(step, "loss", static_cast<double>(loss));
    emit(step, "lr", lr);

    if (step % options.eval_every == 0 || step == options.train_steps) {
      const auto predicted = predict(current, vocab, dev, options.eval_batch_size);
      const EvaluationReport report = evaluate_entities(dev, predicted);
      emit(step, "dev_precision", report.overall.precision);
      emit(step, "dev_recall", report.overall.recall);
      emit(step, "dev_f1", report.overall.f1);
      if (!have_best || report.overall.f1 > result.best_dev.overall.f1) {
        have_best = true;
        result.best = current;
        result.best_step = step;
        result.best_dev = report;
        if (on_best) on_best(result.best, step);
      }
    }
  }

  if (!test.empty()) {
    const auto predicted = predict(result.best, vocab, test, options.eval_batch_size);
    result.test = evaluate_entities(test, predicted);
    emit(result.best_step, "test_precision", result.test->overall.precision);
    emit(result.best_step, "test_recall", result.test->overall.recall);
    emit(result.best_step, "test_f1", result.test->overall.f1);
  }
  return result;
}

#define BIONER_INSTANTIATE(T)                                                                                        \
  template struct NerModel<T>;                                                                                        \
  template FinetuneResult<T> finetune<T>(const model::Checkpoint<T>&, const tokenizer::Vocab&,                       \
                                         std::span<const NerExample>, std::span<const NerExample>,                   \
                                         std::span<const NerExample>, const FinetuneOptions&, const optim::LogSink&,    \
                                         const BestModelHook<T>&);                                                   \
  template std::vector<NerExample> predict<T>(const NerModel<T>&, const tokenizer::Vocab&,                           \
                                              std::span<const NerExample>, std::size_t);

BIONER_INSTANTIATE(float)
BIONER_INSTANTIATE(double)
#undef BIONER_INSTANTIATE

}  // namespace bioner::ner
