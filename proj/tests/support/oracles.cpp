// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <cmath>

namespace bioner::testing {

long double series_erf(long double x) {
  // Beyond 5 the series loses precision to cancellation; 1 - erf(5) < 2e-12.
  if (x > 5.0L) return 1.0L;
  if (x < -5.0L) return -1.0L;
  // erf(x) = 2/sqrt(pi) * sum_n (-1)^n x^(2n+1) / (n! (2n+1))
  long double term = x;  // (-1)^n x^(2n+1) / n!
  long double sum = 0.0L;
  for (int n = 0; n < 200; ++n) {
    const long double contrib = term / static_cast<long double>(2 * n + 1);
    sum += contrib;
    if (std::fabs(contrib) < 1e-30L) break;
    term *= -x * x / static_cast<long double>(n + 1);
  }
  return sum * 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
}

long double oracle_gelu(long double x) {
  return 0.5L * x * (1.0L + series_erf(x / std::sqrt(2.0L)));
}

std::size_t closed_form_parameter_count(const model::ModelConfig& c, const model::HeadSet& heads) {
  const std::size_t V = c.vocab_size, E = c.embedding_size, H = c.hidden_size, I = c.intermediate_size,
                    P = c.max_positions;
  const std::size_t embeddings = V * E + P * E + 2 * E + 2 * E + (E * H + H);
  const std::size_t attention = 4 * (H * H + H) + 2 * H;
  const std::size_t ffn = (H * I + I) + (I * H + H) + 2 * H;
  const std::size_t blocks = c.share_parameters ? 1 : c.num_layers;
  std::size_t total = embeddings + blocks * (attention + ffn);
  if (heads.pooler) total += H * H + H;
  if (heads.mlm) total += (H * E + E) + 2 * E + V;
  if (heads.sop) total += 2 * H + 2;
  if (heads.ner_labels) total += H * heads.ner_labels + heads.ner_labels;
  return total;
}

namespace {

struct Tagged {
  char tag;  // 'O', 'B', 'I'
  std::string type;
};

Tagged split(const std::string& label) {
  if (label == "O") return {'O', ""};
  return {label[0], label.size() > 2 ? label.substr(2) : ""};
}

bool continues(const std::vector<std::string>& labels, std::size_t k, const std::string& type) {
  const Tagged t = split(labels[k]);
  return t.tag == 'I' && t.type == type;
}

bool starts(const std::vector<std::string>& labels, std::size_t s) {
  const Tagged t = split(labels[s]);
  if (t.tag == 'B') return true;
  if (t.tag != 'I') return false;
  if (s == 0) return true;
  const Tagged prev = split(labels[s - 1]);
  return prev.tag == 'O' || prev.type != t.type;
}

}  // namespace

std::vector<OracleSpan> oracle_spans(const std::vector<std::string>& labels, std::size_t sentence) {
  std::vector<OracleSpan> out;
  const std::size_t n = labels.size();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t e = s + 1; e <= n; ++e) {
      if (!starts(labels, s)) continue;
      const std::string type = split(labels[s]).type;
      bool inside = true;
      for (std::size_t k = s + 1; k < e; ++k) inside = inside && continues(labels, k, type);
      const bool maximal = e == n || !continues(labels, e, type);
      if (inside && maximal) out.push_back({sentence, s, e, type});
    }
  }
  return out;
}

double OracleCounts::precision() const { return predicted ? static_cast<double>(true_positives) / predicted : 0.0; }
double OracleCounts::recall() const { return gold ? static_cast<double>(true_positives) / gold : 0.0; }
double OracleCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

OracleCounts oracle_counts(const std::vector<ner::NerExample>& gold, const std::vector<ner::NerExample>& pred,
                           const std::string* only_type) {
  std::vector<OracleSpan> g, p;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (auto& span : oracle_spans(gold[s].labels, s)) g.push_back(span);
    for (auto& span : oracle_spans(pred[s].labels, s)) p.push_back(span);
  }
  OracleCounts c;
  for (const auto& span : g) c.gold += !only_type || span.type == *only_type;
  for (const auto& span : p) {
    if (only_type && span.type != *only_type) continue;
    ++c.predicted;
    for (const auto& other : g) {
      if (other == span) {
        ++c.true_positives;
        break;
      }
    }
  }
  return c;
}

namespace {

using Matrix = std::vector<double>;

Matrix vals(const model::ParameterSet<double>& p, const std::string& name) {
  const auto v = p.at(name).values();
  return Matrix(v.begin(), v.end());
}

Matrix affine(const Matrix& x, std::size_t rows, std::size_t in, const model::ParameterSet<double>& p,
              const std::string& base, std::size_t out) {
  const Matrix w = vals(p, model::names::weight(base));
  const Matrix b = vals(p, model::names::bias(base));
  Matrix y(rows * out);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += x[r * in + i] * w[i * out + o];
      y[r * out + o] = acc;
    }
  }
  return y;
}

Matrix normalize(const Matrix& x, std::size_t rows, std::size_t cols, const model::ParameterSet<double>& p,
                 const std::string& base, double eps) {
  const Matrix g = vals(p, model::names::gain(base));
  const Matrix b = vals(p, model::names::bias(base));
  Matrix y(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0, var = 0;
    for (std::size_t c = 0; c < cols; ++c) mean += x[r * cols + c];
    mean /= cols;
    for (std::size_t c = 0; c < cols; ++c) var += (x[r * cols + c] - mean) * (x[r * cols + c] - mean);
    var /= cols;
    for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] = (x[r * cols + c] - mean) / std::sqrt(var + eps) * g[c] + b[c];
  }
  return y;
}

}  // namespace

std::vector<double> reference_encode(const model::ParameterSet<double>& params, const model::ModelConfig& c,
                                     const model::Batch& batch) {
  namespace n = model::names;
  const std::size_t B = batch.batch_size, S = batch.seq_len, E = c.embedding_size, H = c.hidden_size,
                    A = c.num_heads, d = H / A, N = B * S;
  const Matrix tok = vals(params, std::string(n::kTokenEmbedding));
  const Matrix pos = vals(params, std::string(n::kPositionEmbedding));
  const Matrix typ = vals(params, std::string(n::kTypeEmbedding));
  Matrix emb(N * E);
  for (std::size_t r = 0; r < N; ++r) {
    for (std::size_t e = 0; e < E; ++e) {
      emb[r * E + e] = tok[batch.token_ids[r] * E + e] + pos[(r % S) * E + e] + typ[batch.type_ids[r] * E + e];
    }
  }
  Matrix h = affine(normalize(emb, N, E, params, std::string(n::kEmbeddingNorm), c.layer_norm_eps), N, E, params,
                    std::string(n::kEmbeddingProjection), H);
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const std::string p = n::block_prefix(c, l);
    const Matrix q = affine(h, N, H, params, n::join(p, n::kQuery), H);
    const Matrix k = affine(h, N, H, params, n::join(p, n::kKey), H);
    const Matrix v = affine(h, N, H, params, n::join(p, n::kValue), H);
    Matrix ctx(N * H, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t i = 0; i < S; ++i) {
          std::vector<std::size_t> keys;
          for (std::size_t j = 0; j < S; ++j) {
            if (batch.attention_mask[b * S + j]) keys.push_back(j);
          }
          std::vector<double> score;
          double top = -1e300;
          for (std::size_t j : keys) {
            double dot = 0;
            for (std::size_t x = 0; x < d; ++x) dot += q[(b * S + i) * H + a * d + x] * k[(b * S + j) * H + a * d + x];
            score.push_back(dot / std::sqrt(static_cast<double>(d)));
            top = std::max(top, score.back());
          }
          double z = 0;
          for (double& s : score) z += (s = std::exp(s - top));
          for (std::size_t t = 0; t < keys.size(); ++t) {
            for (std::size_t x = 0; x < d; ++x) {
              ctx[(b * S + i) * H + a * d + x] += score[t] / z * v[(b * S + keys[t]) * H + a * d + x];
            }
          }
        }
      }
    }
    Matrix attn = affine(ctx, N, H, params, n::join(p, n::kAttentionOutput), H);
    for (std::size_t i = 0; i < N * H; ++i) attn[i] += h[i];
    const Matrix h1 = normalize(attn, N, H, params, n::join(p, n::kAttentionNorm), c.layer_norm_eps);
    Matrix mid = affine(h1, N, H, params, n::join(p, n::kFfnIn), c.intermediate_size);
    for (double& x : mid) x = static_cast<double>(oracle_gelu(x));
    Matrix ffn = affine(mid, N, c.intermediate_size, params, n::join(p, n::kFfnOut), H);
    for (std::size_t i = 0; i < N * H; ++i) ffn[i] += h1[i];
    h = normalize(ffn, N, H, params, n::join(p, n::kFfnNorm), c.layer_norm_eps);
  }
  return h;
}

}  // namespace bioner::testing
