// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/model/albert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bioner/numerics/ops.hpp"

namespace bioner::model {

namespace {

template <typename T>
std::span<const T> cv(const std::vector<T>& v) {
  return std::span<const T>(v);
}

template <typename T>
struct BlockRefs {
  const Tensor<T>* q_w;
  const Tensor<T>* q_b;
  const Tensor<T>* k_w;
  const Tensor<T>* k_b;
  const Tensor<T>* v_w;
  const Tensor<T>* v_b;
  const Tensor<T>* o_w;
  const Tensor<T>* o_b;
  const Tensor<T>* attn_gain;
  const Tensor<T>* attn_bias;
  const Tensor<T>* in_w;
  const Tensor<T>* in_b;
  const Tensor<T>* out_w;
  const Tensor<T>* out_b;
  const Tensor<T>* ffn_gain;
  const Tensor<T>* ffn_bias;
};

template <typename T>
struct BlockGrads {
  Tensor<T>* q_w;
  Tensor<T>* q_b;
  Tensor<T>* k_w;
  Tensor<T>* k_b;
  Tensor<T>* v_w;
  Tensor<T>* v_b;
  Tensor<T>* o_w;
  Tensor<T>* o_b;
  Tensor<T>* attn_gain;
  Tensor<T>* attn_bias;
  Tensor<T>* in_w;
  Tensor<T>* in_b;
  Tensor<T>* out_w;
  Tensor<T>* out_b;
  Tensor<T>* ffn_gain;
  Tensor<T>* ffn_bias;
};

template <typename Set, typename Ref>
void resolve_block(Set& set, const std::string& p, Ref& r) {
  using names::bias;
  using names::gain;
  using names::join;
  using names::weight;
  r.q_w = &set.at(weight(join(p, names::kQuery)));
  r.q_b = &set.at(bias(join(p, names::kQuery)));
  r.k_w = &set.at(weight(join(p, names::kKey)));
  r.k_b = &set.at(bias(join(p, names::kKey)));
  r.v_w = &set.at(weight(join(p, names::kValue)));
  r.v_b = &set.at(bias(join(p, names::kValue)));
  r.o_w = &set.at(weight(join(p, names::kAttentionOutput)));
  r.o_b = &set.at(bias(join(p, names::kAttentionOutput)));
  r.attn_gain = &set.at(gain(join(p, names::kAttentionNorm)));
  r.attn_bias = &set.at(bias(join(p, names::kAttentionNorm)));
  r.in_w = &set.at(weight(join(p, names::kFfnIn)));
  r.in_b = &set.at(bias(join(p, names::kFfnIn)));
  r.out_w = &set.at(weight(join(p, names::kFfnOut)));
  r.out_b = &set.at(bias(join(p, names::kFfnOut)));
  r.ffn_gain = &set.at(gain(join(p, names::kFfnNorm)));
  r.ffn_bias = &set.at(bias(join(p, names::kFfnNorm)));
}

/// Inverted dropout. A null stream is inference mode; an empty mask means
/// "identity".
template <typename T>
void dropout_forward(std::vector<T>& x, std::vector<T>& mask, double rate, Rng* rng) {
  mask.clear();
  if (rate <= 0.0 || rng == nullptr) return;
  mask.resize(x.size());
  const T keep_scale = T(1) / static_cast<T>(1.0 - rate);
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = rng->uniform() < rate ? T(0) : keep_scale;
    x[i] *= mask[i];
  }
}

template <typename T>
void dropout_backward(std::vector<T>& d, const std::vector<T>& mask) {
  if (mask.empty()) return;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= mask[i];
}

template <typename T>
struct LayerTape {
  std::vector<T> input;
  std::vector<T> q, k, v;
  std::vector<T> probs;  // batch x heads x seq x seq
  std::vector<T> ctx;
  std::vector<T> attn_drop;
  ops::LayerNormCache<T> attn_norm;
  std::vector<T> h1;
  std::vector<T> ffn_pre;
  std::vector<T> ffn_act;
  std::vector<T> ffn_drop;
  ops::LayerNormCache<T> ffn_norm;
};

/// One forward pass through embeddings and encoder, keeping what the
/// backward pass needs.
template <typename T>
class EncoderPass {
 public:
  EncoderPass(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch)
      : params_(params), config_(config), batch_(batch) {}

  const std::vector<T>& forward(Rng* dropout_rng) {
    const std::size_t N = batch_.tokens();
    const std::size_t E = config_.embedding_size;
    const std::size_t H = config_.hidden_size;
    const std::size_t T_ = batch_.seq_len;

    // Embedding sum at size E.
    position_ids_.resize(N);
    for (std::size_t n = 0; n < N; ++n) position_ids_[n] = static_cast<std::int32_t>(n % T_);
    std::vector<T> emb(N * E);
    const auto& tok = params_.at(names::kTokenEmbedding);
    const auto& pos = params_.at(names::kPositionEmbedding);
    const auto& typ = params_.at(names::kTypeEmbedding);
    ops::embedding_forward<T>(tok.values(), tok.dim(0), E, batch_.token_ids, emb, false);
    ops::embedding_forward<T>(pos.values(), pos.dim(0), E, position_ids_, emb, true);
    ops::embedding_forward<T>(typ.values(), typ.dim(0), E, batch_.type_ids, emb, true);

    emb_norm_out_.resize(N * E);
    ops::layer_norm_forward<T>(emb, N, E, params_.at(names::gain(names::kEmbeddingNorm)).values(),
                               params_.at(names::bias(names::kEmbeddingNorm)).values(), eps(), emb_norm_out_,
                               emb_norm_);
    hidden_.resize(N * H);
    ops::linear_forward<T>(emb_norm_out_, N, E, params_.at(names::weight(names::kEmbeddingProjection)).values(),
                           params_.at(names::bias(names::kEmbeddingProjection)).values(), H, hidden_);
    dropout_forward(hidden_, emb_drop_, config_.dropout_rate, dropout_rng);

    layers_.resize(config_.num_layers);
    for (std::size_t l = 0; l < config_.num_layers; ++l) layer_forward(l, dropout_rng);
    return hidden_;
  }

  /// d_hidden: gradient w.r.t. the final hidden states (consumed).
  void backward(std::vector<T> d_hidden, ParameterSet<T>& grads) {
    const std::size_t N = batch_.tokens();
    const std::size_t E = config_.embedding_size;
    const std::size_t H = config_.hidden_size;
    for (std::size_t l = config_.num_layers; l-- > 0;) d_hidden = layer_backward(l, std::move(d_hidden), grads);

    dropout_backward(d_hidden, emb_drop_);
    std::vector<T> d_norm_out(N * E);
    ops::linear_backward<T>(emb_norm_out_, N, E, params_.at(names::weight(names::kEmbeddingProjection)).values(), H,
                            d_hidden, d_norm_out, grads.at(names::weight(names::kEmbeddingProjection)).values(),
                            grads.at(names::bias(names::kEmbeddingProjection)).values());
    std::vector<T> d_emb(N * E);
    ops::layer_norm_backward<T>(emb_norm_, N, E, params_.at(names::gain(names::kEmbeddingNorm)).values(), d_norm_out,
                                d_emb, grads.at(names::gain(names::kEmbeddingNorm)).values(),
                                grads.at(names::bias(names::kEmbeddingNorm)).values());
    ops::embedding_backward<T>(batch_.token_ids, E, d_emb, grads.at(names::kTokenEmbedding).values());
    ops::embedding_backward<T>(position_ids_, E, d_emb, grads.at(names::kPositionEmbedding).values());
    ops::embedding_backward<T>(batch_.type_ids, E, d_emb, grads.at(names::kTypeEmbedding).values());
  }

 private:
  T eps() const { return static_cast<T>(config_.layer_norm_eps); }

  void layer_forward(std::size_t l, Rng* dropout_rng) {
    BlockRefs<T> p;
    resolve_block(params_, names::block_prefix(config_, l), p);
    LayerTape<T>& tape = layers_[l];
    const std::size_t N = batch_.tokens();
    const std::size_t H = config_.hidden_size;
    const std::size_t I = config_.intermediate_size;

    tape.input = hidden_;
    tape.q.resize(N * H);
    tape.k.resize(N * H);
    tape.v.resize(N * H);
    ops::linear_forward<T>(cv(tape.input), N, H, p.q_w->values(), p.q_b->values(), H, tape.q);
    ops::linear_forward<T>(cv(tape.input), N, H, p.k_w->values(), p.k_b->values(), H, tape.k);
    ops::linear_forward<T>(cv(tape.input), N, H, p.v_w->values(), p.v_b->values(), H, tape.v);
    attention_forward(tape);

    std::vector<T> attn_out(N * H);
    ops::linear_forward<T>(cv(tape.ctx), N, H, p.o_w->values(), p.o_b->values(), H, attn_out);
    dropout_forward(attn_out, tape.attn_drop, config_.dropout_rate, dropout_rng);
    for (std::size_t i = 0; i < N * H; ++i) attn_out[i] += tape.input[i];
    tape.h1.resize(N * H);
    ops::layer_norm_forward<T>(cv(attn_out), N, H, p.attn_gain->values(), p.attn_bias->values(), eps(), tape.h1,
                               tape.attn_norm);

    tape.ffn_pre.resize(N * I);
    tape.ffn_act.resize(N * I);
    ops::linear_forward<T>(cv(tape.h1), N, H, p.in_w->values(), p.in_b->values(), I, tape.ffn_pre);
    ops::gelu_forward<T>(cv(tape.ffn_pre), tape.ffn_act);
    std::vector<T> ffn_out(N * H);
    ops::linear_forward<T>(cv(tape.ffn_act), N, I, p.out_w->values(), p.out_b->values(), H, ffn_out);
    dropout_forward(ffn_out, tape.ffn_drop, config_.dropout_rate, dropout_rng);
    for (std::size_t i = 0; i < N * H; ++i) ffn_out[i] += tape.h1[i];
    ops::layer_norm_forward<T>(cv(ffn_out), N, H, p.ffn_gain->values(), p.ffn_bias->values(), eps(), hidden_,
                               tape.ffn_norm);
  }

  void attention_forward(LayerTape<T>& tape) {
    const std::size_t B = batch_.batch_size;
    const std::size_t S = batch_.seq_len;
    const std::size_t H = config_.hidden_size;
    const std::size_t A = config_.num_heads;
    const std::size_t d = config_.head_size();
    const T scale = T(1) / std::sqrt(static_cast<T>(d));
    const T neg_inf = -std::numeric_limits<T>::infinity();

    tape.probs.assign(B * A * S * S, T{0});
    tape.ctx.assign(B * S * H, T{0});
    std::vector<T> scores(S * S);
    for (std::size_t b = 0; b < B; ++b) {
      const std::int32_t* mask = batch_.attention_mask.data() + b * S;
      for (std::size_t h = 0; h < A; ++h) {
        for (std::size_t i = 0; i < S; ++i) {
          const T* qi = tape.q.data() + (b * S + i) * H + h * d;
          for (std::size_t j = 0; j < S; ++j) {
            if (!mask[j]) {
              scores[i * S + j] = neg_inf;
              continue;
            }
            const T* kj = tape.k.data() + (b * S + j) * H + h * d;
            T acc{0};
            for (std::size_t c = 0; c < d; ++c) acc += qi[c] * kj[c];
            scores[i * S + j] = acc * scale;
          }
        }
        T* probs = tape.probs.data() + (b * A + h) * S * S;
        ops::softmax_forward<T>(cv(scores), S, S, std::span<T>(probs, S * S));
        for (std::size_t i = 0; i < S; ++i) {
          T* ci = tape.ctx.data() + (b * S + i) * H + h * d;
          for (std::size_t j = 0; j < S; ++j) {
            const T pij = probs[i * S + j];
            if (pij == T{0}) continue;
            const T* vj = tape.v.data() + (b * S + j) * H + h * d;
            for (std::size_t c = 0; c < d; ++c) ci[c] += pij * vj[c];
          }
        }
      }
    }
  }

  void attention_backward(const LayerTape<T>& tape, const std::vector<T>& d_ctx, std::vector<T>& d_q,
                          std::vector<T>& d_k, std::vector<T>& d_v) {
    const std::size_t B = batch_.batch_size;
    const std::size_t S = batch_.seq_len;
    const std::size_t H = config_.hidden_size;
    const std::size_t A = config_.num_heads;
    const std::size_t d = config_.head_size();
    const T scale = T(1) / std::sqrt(static_cast<T>(d));

    d_q.assign(B * S * H, T{0});
    d_k.assign(B * S * H, T{0});
    d_v.assign(B * S * H, T{0});
    std::vector<T> d_probs(S * S);
    std::vector<T> d_scores(S * S);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t h = 0; h < A; ++h) {
        const T* probs = tape.probs.data() + (b * A + h) * S * S;
        for (std::size_t i = 0; i < S; ++i) {
          const T* dci = d_ctx.data() + (b * S + i) * H + h * d;
          for (std::size_t j = 0; j < S; ++j) {
            const T* vj = tape.v.data() + (b * S + j) * H + h * d;
            T* dvj = d_v.data() + (b * S + j) * H + h * d;
            const T pij = probs[i * S + j];
            T acc{0};
            for (std::size_t c = 0; c < d; ++c) {
              acc += dci[c] * vj[c];
              dvj[c] += pij * dci[c];
            }
            d_probs[i * S + j] = acc;
          }
        }
        ops::softmax_backward<T>(std::span<const T>(probs, S * S), cv(d_probs), S, S, d_scores);
        for (std::size_t i = 0; i < S; ++i) {
          const T* qi = tape.q.data() + (b * S + i) * H + h * d;
          T* dqi = d_q.data() + (b * S + i) * H + h * d;
          for (std::size_t j = 0; j < S; ++j) {
            const T ds = d_scores[i * S + j] * scale;
            if (ds == T{0}) continue;
            const T* kj = tape.k.data() + (b * S + j) * H + h * d;
            T* dkj = d_k.data() + (b * S + j) * H + h * d;
            for (std::size_t c = 0; c < d; ++c) {
              dqi[c] += ds * kj[c];
              dkj[c] += ds * qi[c];
            }
          }
        }
      }
    }
  }

  std::vector<T> layer_backward(std::size_t l, std::vector<T> d_out, ParameterSet<T>& grads) {
    BlockRefs<T> p;
    resolve_block(params_, names::block_prefix(config_, l), p);
    BlockGrads<T> g;
    resolve_block(grads, names::block_prefix(config_, l), g);
    const LayerTape<T>& tape = layers_[l];
    const std::size_t N = batch_.tokens();
    const std::size_t H = config_.hidden_size;
    const std::size_t I = config_.intermediate_size;

    // out = norm(h1 + drop(ffn(h1)))
    std::vector<T> d_res2(N * H);
    ops::layer_norm_backward<T>(tape.ffn_norm, N, H, p.ffn_gain->values(), cv(d_out), d_res2, g.ffn_gain->values(),
                                g.ffn_bias->values());
    std::vector<T> d_h1 = d_res2;
    dropout_backward(d_res2, tape.ffn_drop);
    std::vector<T> d_act(N * I);
    ops::linear_backward<T>(cv(tape.ffn_act), N, I, p.out_w->values(), H, cv(d_res2), d_act, g.out_w->values(),
                            g.out_b->values());
    std::vector<T> d_pre(N * I);
    ops::gelu_backward<T>(cv(tape.ffn_pre), cv(d_act), d_pre);
    ops::linear_backward<T>(cv(tape.h1), N, H, p.in_w->values(), I, cv(d_pre), d_h1, g.in_w->values(),
                            g.in_b->values(), true);

    // h1 = norm(x + drop(attn(x)))
    std::vector<T> d_res1(N * H);
    ops::layer_norm_backward<T>(tape.attn_norm, N, H, p.attn_gain->values(), cv(d_h1), d_res1,
                                g.attn_gain->values(), g.attn_bias->values());
    std::vector<T> d_x = d_res1;
    dropout_backward(d_res1, tape.attn_drop);
    std::vector<T> d_ctx(N * H);
    ops::linear_backward<T>(cv(tape.ctx), N, H, p.o_w->values(), H, cv(d_res1), d_ctx, g.o_w->values(),
                            g.o_b->values());
    std::vector<T> d_q, d_k, d_v;
    attention_backward(tape, d_ctx, d_q, d_k, d_v);
    ops::linear_backward<T>(cv(tape.input), N, H, p.q_w->values(), H, cv(d_q), d_x, g.q_w->values(),
                            g.q_b->values(), true);
    ops::linear_backward<T>(cv(tape.input), N, H, p.k_w->values(), H, cv(d_k), d_x, g.k_w->values(),
                            g.k_b->values(), true);
    ops::linear_backward<T>(cv(tape.input), N, H, p.v_w->values(), H, cv(d_v), d_x, g.v_w->values(),
                            g.v_b->values(), true);
    return d_x;
  }

  const ParameterSet<T>& params_;
  const ModelConfig& config_;
  const Batch& batch_;
  std::vector<std::int32_t> position_ids_;
  ops::LayerNormCache<T> emb_norm_;
  std::vector<T> emb_norm_out_;
  std::vector<T> emb_drop_;
  std::vector<T> hidden_;
  std::vector<LayerTape<T>> layers_;
};

void validate_batch(const ModelConfig& config, const Batch& batch) {
  config.validate();
  const std::size_t n = batch.tokens();
  if (n == 0) throw ModelError("empty batch");
  if (batch.token_ids.size() != n || batch.type_ids.size() != n || batch.attention_mask.size() != n) {
    throw ModelError("batch arrays do not match batch_size x seq_len");
  }
  if (batch.seq_len > config.max_positions) {
    throw ModelError("sequence length " + std::to_string(batch.seq_len) + " exceeds max_positions " +
                     std::to_string(config.max_positions));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = batch.token_ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
      throw ModelError("token id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(config.vocab_size));
    }
    const auto type = batch.type_ids[i];
    if (type < 0 || static_cast<std::size_t>(type) >= config.type_vocab_size) {
      throw ModelError("type id " + std::to_string(type) + " out of range");
    }
  }
  for (std::size_t b = 0; b < batch.batch_size; ++b) {
    const auto* mask = batch.attention_mask.data() + b * batch.seq_len;
    if (std::none_of(mask, mask + batch.seq_len, [](std::int32_t m) { return m != 0; })) {
      throw ModelError("batch row " + std::to_string(b) + " has no attended position");
    }
  }
}

/// Masked-LM and sentence-order heads on top of the final hidden states.
template <typename T>
std::size_t argmax_hits(const std::vector<T>& logits, std::size_t classes, std::span<const std::int32_t> labels) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const auto row = logits.begin() + static_cast<std::ptrdiff_t>(r * classes);
    if (std::max_element(row, row + static_cast<std::ptrdiff_t>(classes)) - row == labels[r]) ++hits;
  }
  return hits;
}

template <typename T>
PretrainLoss<T> pretrain_heads(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch,
                               const PretrainTargets& targets, const std::vector<T>& hidden, std::vector<T>* d_hidden,
                               ParameterSet<T>* grads) {
  const std::size_t H = config.hidden_size;
  const std::size_t E = config.embedding_size;
  const std::size_t V = config.vocab_size;
  const std::size_t M = targets.mlm_rows.size();
  const std::size_t B = batch.batch_size;
  if (M == 0) throw ModelError("pretraining batch has no masked positions");
  if (targets.mlm_labels.size() != M) throw ModelError("mlm_rows and mlm_labels differ in length");
  if (targets.sop_labels.size() != B) throw ModelError("need one sentence-order label per batch row");
  const T eps = static_cast<T>(config.layer_norm_eps);

  // Masked LM: gather -> dense(H->E) -> gelu -> norm -> tied output (E->V).
  std::vector<T> gathered(M * H);
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t row = targets.mlm_rows[m];
    if (row >= batch.tokens()) throw ModelError("masked position outside the batch");
    std::copy_n(hidden.begin() + static_cast<std::ptrdiff_t>(row * H), H, gathered.begin() + static_cast<std::ptrdiff_t>(m * H));
  }
  const auto& dense_w = params.at(names::weight(names::kMlmDense));
  const auto& tok = params.at(names::kTokenEmbedding);
  std::vector<T> dense(M * E), act(M * E), normed(M * E), logits(M * V);
  ops::linear_forward<T>(cv(gathered), M, H, dense_w.values(), params.at(names::bias(names::kMlmDense)).values(), E,
                         dense);
  ops::gelu_forward<T>(cv(dense), act);
  ops::LayerNormCache<T> mlm_norm;
  const auto& mlm_gain = params.at(names::gain(names::kMlmNorm));
  ops::layer_norm_forward<T>(cv(act), M, E, mlm_gain.values(), params.at(names::bias(names::kMlmNorm)).values(), eps,
                             normed, mlm_norm);
  const auto& out_bias = params.at(names::kMlmOutputBias);
  for (std::size_t m = 0; m < M; ++m) std::copy(out_bias.values().begin(), out_bias.values().end(), logits.begin() + static_cast<std::ptrdiff_t>(m * V));
  ops::gemm<T>(false, true, M, V, E, cv(normed), tok.values(), logits, true);
  auto mlm = ops::softmax_cross_entropy<T>(cv(logits), M, V, targets.mlm_labels);

  // Sentence order: [CLS] -> tanh pooler -> 2-way classifier.
  std::vector<T> cls(B * H), pooled_pre(B * H), pooled(B * H), sop_logits(B * 2);
  for (std::size_t b = 0; b < B; ++b) {
    std::copy_n(hidden.begin() + static_cast<std::ptrdiff_t>(b * batch.seq_len * H), H, cls.begin() + static_cast<std::ptrdiff_t>(b * H));
  }
  const auto& pool_w = params.at(names::weight(names::kPooler));
  const auto& sop_w = params.at(names::weight(names::kSop));
  ops::linear_forward<T>(cv(cls), B, H, pool_w.values(), params.at(names::bias(names::kPooler)).values(), H,
                         pooled_pre);
  ops::tanh_forward<T>(cv(pooled_pre), pooled);
  ops::linear_forward<T>(cv(pooled), B, H, sop_w.values(), params.at(names::bias(names::kSop)).values(), 2,
                         sop_logits);
  auto sop = ops::softmax_cross_entropy<T>(cv(sop_logits), B, 2, targets.sop_labels);

  PretrainLoss<T> loss{mlm.loss, sop.loss, mlm.loss + sop.loss};
  loss.mlm_correct = argmax_hits<T>(logits, V, targets.mlm_labels);
  loss.sop_correct = argmax_hits<T>(sop_logits, 2, targets.sop_labels);
  if (d_hidden == nullptr) return loss;

  // Backward, sentence order.
  std::vector<T> d_pooled(B * H), d_pooled_pre(B * H), d_cls(B * H);
  ops::linear_backward<T>(cv(pooled), B, H, sop_w.values(), 2, cv(sop.dlogits), d_pooled,
                          grads->at(names::weight(names::kSop)).values(), grads->at(names::bias(names::kSop)).values());
  ops::tanh_backward<T>(cv(pooled), cv(d_pooled), d_pooled_pre);
  ops::linear_backward<T>(cv(cls), B, H, pool_w.values(), H, cv(d_pooled_pre), d_cls,
                          grads->at(names::weight(names::kPooler)).values(),
                          grads->at(names::bias(names::kPooler)).values());
  for (std::size_t b = 0; b < B; ++b) {
    T* dst = d_hidden->data() + b * batch.seq_len * H;
    for (std::size_t c = 0; c < H; ++c) dst[c] += d_cls[b * H + c];
  }

  // Backward, masked LM.
  auto& d_out_bias = grads->at(names::kMlmOutputBias);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t v = 0; v < V; ++v) d_out_bias[v] += mlm.dlogits[m * V + v];
  }
  ops::gemm<T>(true, false, V, E, M, cv(mlm.dlogits), cv(normed), grads->at(names::kTokenEmbedding).values(), true);
  std::vector<T> d_normed(M * E), d_act(M * E), d_dense(M * E), d_gathered(M * H);
  ops::gemm<T>(false, false, M, E, V, cv(mlm.dlogits), tok.values(), d_normed, false);
  ops::layer_norm_backward<T>(mlm_norm, M, E, mlm_gain.values(), cv(d_normed), d_act,
                              grads->at(names::gain(names::kMlmNorm)).values(),
                              grads->at(names::bias(names::kMlmNorm)).values());
  ops::gelu_backward<T>(cv(dense), cv(d_act), d_dense);
  ops::linear_backward<T>(cv(gathered), M, H, dense_w.values(), E, cv(d_dense), d_gathered,
                          grads->at(names::weight(names::kMlmDense)).values(),
                          grads->at(names::bias(names::kMlmDense)).values());
  for (std::size_t m = 0; m < M; ++m) {
    T* dst = d_hidden->data() + targets.mlm_rows[m] * H;
    for (std::size_t c = 0; c < H; ++c) dst[c] += d_gathered[m * H + c];
  }
  return loss;
}

template <typename T>
std::vector<T> ner_logits(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch,
                          const std::vector<T>& hidden, std::size_t& labels) {
  if (!params.contains(names::weight(names::kNer))) throw ModelError("model has no token-classification head");
  const auto& w = params.at(names::weight(names::kNer));
  labels = w.dim(1);
  std::vector<T> logits(batch.tokens() * labels);
  ops::linear_forward<T>(cv(hidden), batch.tokens(), config.hidden_size, w.values(),
                         params.at(names::bias(names::kNer)).values(), labels, logits);
  return logits;
}

}  // namespace

Batch Batch::from_sequences(std::span<const tokenizer::InputSequence> rows, bool trim_padding) {
  Batch b;
  if (rows.empty()) return b;
  b.batch_size = rows.size();
  const std::size_t padded = rows.front().length();
  std::size_t used = trim_padding ? 0 : padded;
  for (const auto& r : rows) {
    if (r.length() != padded || r.type_ids.size() != padded || r.attention_mask.size() != padded) {
      throw ModelError("batch rows must share one padded length");
    }
    for (std::size_t i = used; i < padded; ++i) {
      if (r.attention_mask[i]) used = i + 1;
    }
  }
  b.seq_len = std::max<std::size_t>(used, 1);
  const auto n = static_cast<std::ptrdiff_t>(b.seq_len);
  for (const auto& r : rows) {
    b.token_ids.insert(b.token_ids.end(), r.token_ids.begin(), r.token_ids.begin() + n);
    b.type_ids.insert(b.type_ids.end(), r.type_ids.begin(), r.type_ids.begin() + n);
    b.attention_mask.insert(b.attention_mask.end(), r.attention_mask.begin(), r.attention_mask.begin() + n);
  }
  return b;
}

std::pair<Batch, PretrainTargets> collate(std::span<const corpus::PretrainExample> examples, bool trim_padding) {
  std::vector<tokenizer::InputSequence> rows;
  rows.reserve(examples.size());
  for (const auto& ex : examples) rows.push_back(ex.input);
  Batch batch = Batch::from_sequences(rows, trim_padding);
  PretrainTargets targets;
  for (std::size_t b = 0; b < examples.size(); ++b) {
    const auto& ex = examples[b];
    if (ex.mlm_positions.size() != ex.mlm_labels.size()) throw ModelError("mlm positions/labels differ in length");
    for (std::size_t i = 0; i < ex.mlm_positions.size(); ++i) {
      if (static_cast<std::size_t>(ex.mlm_positions[i]) >= batch.seq_len) throw ModelError("masked position past the sequence");
      targets.mlm_rows.push_back(b * batch.seq_len + static_cast<std::size_t>(ex.mlm_positions[i]));
      targets.mlm_labels.push_back(ex.mlm_labels[i]);
    }
    targets.sop_labels.push_back(static_cast<std::int32_t>(ex.sop_label));
  }
  return {std::move(batch), std::move(targets)};
}

template <typename T>
Tensor<T> encode_forward(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch) {
  validate_batch(config, batch);
  EncoderPass<T> pass(params, config, batch);
  std::vector<T> hidden = pass.forward(nullptr);
  return Tensor<T>({batch.batch_size, batch.seq_len, config.hidden_size}, std::move(hidden));
}

template <typename T>
PretrainLoss<T> pretrain_loss(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch,
                              const PretrainTargets& targets) {
  validate_batch(config, batch);
  EncoderPass<T> pass(params, config, batch);
  const auto& hidden = pass.forward(nullptr);
  return pretrain_heads<T>(params, config, batch, targets, hidden, nullptr, nullptr);
}

template <typename T>
PretrainLoss<T> pretrain_loss_and_gradients(const ParameterSet<T>& params, const ModelConfig& config,
                                            const Batch& batch, const PretrainTargets& targets,
                                            ParameterSet<T>& grads, Rng* dropout_rng) {
  validate_batch(config, batch);
  EncoderPass<T> pass(params, config, batch);
  const auto& hidden = pass.forward(dropout_rng);
  std::vector<T> d_hidden(hidden.size(), T{0});
  auto loss = pretrain_heads<T>(params, config, batch, targets, hidden, &d_hidden, &grads);
  pass.backward(std::move(d_hidden), grads);
  return loss;
}

template <typename T>
Tensor<T> token_logits(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch) {
  validate_batch(config, batch);
  EncoderPass<T> pass(params, config, batch);
  const auto& hidden = pass.forward(nullptr);
  std::size_t labels = 0;
  std::vector<T> logits = ner_logits(params, config, batch, hidden, labels);
  return Tensor<T>({batch.batch_size, batch.seq_len, labels}, std::move(logits));
}

template <typename T>
T token_classification_loss(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch,
                            std::span<const std::int32_t> labels) {
  const Tensor<T> logits = token_logits(params, config, batch);
  if (labels.size() != batch.tokens()) throw ModelError("need one label per batch token");
  return ops::softmax_cross_entropy<T>(logits.values(), logits.rows(), logits.cols(), labels).loss;
}

template <typename T>
T token_classification_loss_and_gradients(const ParameterSet<T>& params, const ModelConfig& config,
                                          const Batch& batch, std::span<const std::int32_t> labels,
                                          ParameterSet<T>& grads, Rng* dropout_rng) {
  validate_batch(config, batch);
  if (labels.size() != batch.tokens()) throw ModelError("need one label per batch token");
  EncoderPass<T> pass(params, config, batch);
  const auto& hidden = pass.forward(dropout_rng);
  std::size_t num_labels = 0;
  std::vector<T> logits = ner_logits(params, config, batch, hidden, num_labels);
  auto ce = ops::softmax_cross_entropy<T>(cv(logits), batch.tokens(), num_labels, labels);
  std::vector<T> d_hidden(hidden.size(), T{0});
  ops::linear_backward<T>(cv(hidden), batch.tokens(), config.hidden_size, params.at(names::weight(names::kNer)).values(),
                          num_labels, cv(ce.dlogits), d_hidden, grads.at(names::weight(names::kNer)).values(),
                          grads.at(names::bias(names::kNer)).values());
  pass.backward(std::move(d_hidden), grads);
  return ce.loss;
}

#define BIONER_INSTANTIATE_MODEL(T)                                                                               \
  template Tensor<T> encode_forward<T>(const ParameterSet<T>&, const ModelConfig&, const Batch&);                \
  template PretrainLoss<T> pretrain_loss<T>(const ParameterSet<T>&, const ModelConfig&, const Batch&,            \
                                            const PretrainTargets&);                                             \
  template PretrainLoss<T> pretrain_loss_and_gradients<T>(const ParameterSet<T>&, const ModelConfig&,            \
                                                          const Batch&, const PretrainTargets&,                  \
                                                          ParameterSet<T>&, Rng*);                               \
  template Tensor<T> token_logits<T>(const ParameterSet<T>&, const ModelConfig&, const Batch&);                  \
  template T token_classification_loss<T>(const ParameterSet<T>&, const ModelConfig&, const Batch&,              \
                                          std::span<const std::int32_t>);                                        \
  template T token_classification_loss_and_gradients<T>(const ParameterSet<T>&, const ModelConfig&,             \
                                                        const Batch&, std::span<const std::int32_t>,             \
                                                        ParameterSet<T>&, Rng*);

BIONER_INSTANTIATE_MODEL(float)
BIONER_INSTANTIATE_MODEL(double)

#undef BIONER_INSTANTIATE_MODEL

}  // namespace bioner::model
