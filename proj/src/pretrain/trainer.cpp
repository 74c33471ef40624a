// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/pretrain/trainer.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "bioner/model/albert.hpp"
#include "bioner/numerics/rng.hpp"
#include "bioner/optim/schedule.hpp"

namespace bioner::pretrain {

namespace {

constexpr const char* kStepKey = "train.step";
constexpr const char* kSeedKey = "train.seed";
constexpr const char* kBatchKey = "train.batch_size";
constexpr const char* kDataKey = "train.data_fingerprint";

std::uint64_t parse_u64(const std::map<std::string, std::string>& meta, const char* key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw TrainError(std::string("checkpoint metadata lacks ") + key);
  try {
    std::size_t used = 0;
    const auto v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw TrainError(std::string("bad checkpoint metadata ") + key + "='" + it->second + "'");
  }
}

void check_identity(const std::map<std::string, std::string>& meta, const char* key, std::uint64_t expected) {
  if (parse_u64(meta, key) != expected) {
    throw TrainError(std::string("cannot resume: checkpoint ") + key + "=" + meta.at(key) + ", this run has " +
                     std::to_string(expected));
  }
}

}  // namespace

std::uint64_t fingerprint(std::span<const corpus::PretrainExample> examples) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::int64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<std::uint64_t>(v >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_all = [&mix](const auto& values) {
    mix(static_cast<std::int64_t>(values.size()));
    for (const auto v : values) mix(static_cast<std::int64_t>(v));
  };
  for (const auto& ex : examples) {
    mix_all(ex.input.token_ids);
    mix_all(ex.input.type_ids);
    mix_all(ex.input.attention_mask);
    mix_all(ex.mlm_positions);
    mix_all(ex.mlm_labels);
    mix(static_cast<std::int64_t>(ex.sop_label));
  }
  return h;
}

void PretrainOptions::validate() const {
  if (batch_size == 0 || eval_batch_size == 0) throw TrainError("batch sizes must be positive");
  if (save_every == 0 || eval_every == 0) throw TrainError("save_every and eval_every must be positive");
  if (!(weight_decay >= 0.0)) throw TrainError("weight_decay must be non-negative");
  optim::Schedule{learning_rate, warmup_steps, train_steps}.validate();
}

template <typename T>
TrainState<T> TrainState<T>::fresh(const model::ModelConfig& config, const PretrainOptions& options) {
  config.validate();
  TrainState s;
  s.config = config;
  Rng rng = Rng::derive(options.seed, "init");
  s.params = model::init_parameters<T>(config, model::HeadSet::pretraining(), rng);
  s.optimizer.hyper.weight_decay = options.weight_decay;
  return s;
}

template <typename T>
model::Checkpoint<T> TrainState<T>::to_checkpoint(const PretrainOptions& options) const {
  model::Checkpoint<T> ckpt;
  ckpt.config = config;
  ckpt.heads = model::HeadSet::pretraining();
  ckpt.params = params;
  ckpt.optimizer = optimizer.to_tensors();
  ckpt.metadata[kStepKey] = std::to_string(step);
  ckpt.metadata[kSeedKey] = std::to_string(options.seed);
  ckpt.metadata[kBatchKey] = std::to_string(options.batch_size);
  ckpt.metadata[kDataKey] = std::to_string(options.data_fingerprint);
  return ckpt;
}

template <typename T>
TrainState<T> TrainState<T>::resume(model::Checkpoint<T> ckpt, const PretrainOptions& options) {
  if (ckpt.heads != model::HeadSet::pretraining()) throw TrainError("checkpoint does not hold pretraining heads");
  check_identity(ckpt.metadata, kSeedKey, options.seed);
  check_identity(ckpt.metadata, kBatchKey, options.batch_size);
  check_identity(ckpt.metadata, kDataKey, options.data_fingerprint);
  TrainState s;
  s.config = ckpt.config;
  s.step = parse_u64(ckpt.metadata, kStepKey);
  optim::Hyperparameters hyper;
  hyper.weight_decay = options.weight_decay;
  s.optimizer = optim::OptimizerState<T>::from_tensors(ckpt.optimizer, s.step, hyper);
  s.params = std::move(ckpt.params);
  return s;
}

template <typename T>
HeldOutScores evaluate(const model::ParameterSet<T>& params, const model::ModelConfig& config,
                       std::span<const corpus::PretrainExample> examples, std::size_t batch_size) {
  if (examples.empty()) throw TrainError("held-out set is empty");
  if (batch_size == 0) throw TrainError("batch size must be positive");
  double mlm_sum = 0.0, sop_sum = 0.0;
  std::size_t masked = 0, mlm_hits = 0, sop_hits = 0;
  for (std::size_t begin = 0; begin < examples.size(); begin += batch_size) {
    const auto chunk = examples.subspan(begin, std::min(batch_size, examples.size() - begin));
    const auto [batch, targets] = model::collate(chunk, true);
    const auto loss = model::pretrain_loss(params, config, batch, targets);
    mlm_sum += static_cast<double>(loss.mlm_loss) * static_cast<double>(targets.mlm_rows.size());
    sop_sum += static_cast<double>(loss.sop_loss) * static_cast<double>(chunk.size());
    masked += targets.mlm_rows.size();
    mlm_hits += loss.mlm_correct;
    sop_hits += loss.sop_correct;
  }
  const auto n = static_cast<double>(examples.size());
  return {mlm_sum / static_cast<double>(masked), sop_sum / n,
          static_cast<double>(mlm_hits) / static_cast<double>(masked), static_cast<double>(sop_hits) / n};
}

template <typename T>
void train(TrainState<T>& state, std::span<const corpus::PretrainExample> examples,
           std::span<const corpus::PretrainExample> held_out, const PretrainOptions& options,
           const TrainHooks<T>& hooks) {
  options.validate();
  if (examples.empty()) throw TrainError("no pretraining examples");
  if (state.step > options.train_steps) {
    throw TrainError("state is at step " + std::to_string(state.step) + ", past train_steps " +
                     std::to_string(options.train_steps));
  }
  model::check_parameters(state.params, state.config, model::HeadSet::pretraining());
  const optim::Schedule schedule{options.learning_rate, options.warmup_steps, options.train_steps};
  auto emit = [&](std::size_t step, const char* metric, double value) {
    if (hooks.log) hooks.log(optim::LogRecord{step, metric, value});
  };

  EpochStream order(examples.size(), options.seed, "pretrain-order");
  order.seek(static_cast<std::uint64_t>(state.step) * options.batch_size);
  std::vector<corpus::PretrainExample> rows(options.batch_size);
  auto grads = state.params.zeros_like();
  while (state.step < options.train_steps) {
    const std::size_t step = state.step + 1;
    for (auto& r : rows) r = examples[order.next()];
    const auto [batch, targets] = model::collate(rows, true);
    grads.set_zero();
    Rng dropout = Rng::derive(options.seed, "dropout", step);
    const auto loss = model::pretrain_loss_and_gradients(state.params, state.config, batch, targets, grads, &dropout);
    const double lr = optim::lr_at(schedule, step);
    if (options.optimizer == OptimizerKind::kLamb) {
      optim::lamb_step(state.optimizer, state.params, grads, lr);
    } else {
      optim::adamw_step(state.optimizer, state.params, grads, lr);
    }
    state.step = step;

    emit(step, "mlm_loss", static_cast<double>(loss.mlm_loss));
    emit(step, "sop_loss", static_cast<double>(loss.sop_loss));
    emit(step, "loss", static_cast<double>(loss.total));
    emit(step, "lr", lr);
    const bool last = step == options.train_steps;
    if (!held_out.empty() && (step % options.eval_every == 0 || last)) {
      const HeldOutScores s = evaluate(state.params, state.config, held_out, options.eval_batch_size);
      emit(step, "eval_mlm_loss", s.mlm_loss);
      emit(step, "eval_sop_loss", s.sop_loss);
      emit(step, "eval_mlm_accuracy", s.mlm_accuracy);
      emit(step, "eval_sop_accuracy", s.sop_accuracy);
    }
    if (hooks.checkpoint && (step % options.save_every == 0 || last)) hooks.checkpoint(state);
    if (hooks.stop && hooks.stop(step)) return;
  }
}

#define BIONER_INSTANTIATE(T)                                                                                  \
  template struct TrainState<T>;                                                                                \
  template HeldOutScores evaluate<T>(const model::ParameterSet<T>&, const model::ModelConfig&,                 \
                                     std::span<const corpus::PretrainExample>, std::size_t);                   \
  template void train<T>(TrainState<T>&, std::span<const corpus::PretrainExample>,                             \
                         std::span<const corpus::PretrainExample>, const PretrainOptions&, const TrainHooks<T>&);

BIONER_INSTANTIATE(float)
BIONER_INSTANTIATE(double)
#undef BIONER_INSTANTIATE

}  // namespace bioner::pretrain
