// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "grad_suites.hpp"

#include <functional>

#include "bioner/model/albert.hpp"
#include "bioner/numerics/ops.hpp"
#include "synthetic.hpp"

namespace bioner::testing {

namespace {

using Tensors = std::vector<Tensor<double>>;
using Span = std::span<const double>;

Tensor<double> same_shape(const Tensor<double>& t) { return Tensor<double>(t.shape()); }

/// Wraps an op given as forward(inputs) -> output and
/// backward(inputs, dy) -> grads with a random probe.
NamedCheck probe_check(std::string name, Rng& rng, Tensors inputs, Shape out_shape,
                       std::function<Tensor<double>(const Tensors&)> forward,
                       std::function<Tensors(const Tensors&, const Tensor<double>&)> backward, double tol) {
  auto fn = contract_with_probe(std::move(forward), std::move(backward), random_tensor(std::move(out_shape), rng));
  return {std::move(name), grad_check_report(fn, std::move(inputs), tol)};
}

}  // namespace

std::vector<NamedCheck> primitive_grad_checks(std::uint64_t seed, double tol) {
  Rng rng = Rng::derive(seed, "primitive-grad");
  std::vector<NamedCheck> out;
  const std::size_t rows = 3, in = 4, cols = 5;

  out.push_back(probe_check(
      "linear", rng, {random_tensor({rows, in}, rng), random_tensor({in, cols}, rng), random_tensor({cols}, rng)},
      {rows, cols},
      [=](const Tensors& x) {
        Tensor<double> y({rows, cols});
        ops::linear_forward<double>(x[0].values(), rows, in, x[1].values(), x[2].values(), cols, y.values());
        return y;
      },
      [=](const Tensors& x, const Tensor<double>& dy) {
        Tensors g{same_shape(x[0]), same_shape(x[1]), same_shape(x[2])};
        ops::linear_backward<double>(x[0].values(), rows, in, x[1].values(), cols, dy.values(), g[0].values(),
                                     g[1].values(), g[2].values());
        return g;
      },
      tol));

  out.push_back(probe_check(
      "matmul_transposed", rng, {random_tensor({cols, in}, rng), random_tensor({rows, in}, rng)}, {cols, rows},
      [=](const Tensors& x) {
        Tensor<double> y({cols, rows});
        ops::gemm<double>(false, true, cols, rows, in, x[0].values(), x[1].values(), y.values(), false);
        return y;
      },
      [=](const Tensors& x, const Tensor<double>& dy) {
        Tensors g{same_shape(x[0]), same_shape(x[1])};
        // dA = dY B, dB = dY^T A
        ops::gemm<double>(false, false, cols, in, rows, dy.values(), x[1].values(), g[0].values(), false);
        ops::gemm<double>(true, false, rows, in, cols, dy.values(), x[0].values(), g[1].values(), false);
        return g;
      },
      tol));

  out.push_back(probe_check(
      "add", rng, {random_tensor({rows, cols}, rng), random_tensor({rows, cols}, rng)}, {rows, cols},
      [](const Tensors& x) {
        Tensor<double> y = x[0];
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[1][i];
        return y;
      },
      [](const Tensors&, const Tensor<double>& dy) { return Tensors{dy, dy}; }, tol));

  out.push_back(probe_check(
      "gelu", rng, {random_tensor({rows, in}, rng, 2.0)}, {rows, in}, [](const Tensors& x) { return ops::gelu(x[0]); },
      [](const Tensors& x, const Tensor<double>& dy) {
        Tensors g{same_shape(x[0])};
        ops::gelu_backward<double>(x[0].values(), dy.values(), g[0].values());
        return g;
      },
      tol));

  out.push_back(probe_check(
      "tanh", rng, {random_tensor({rows, in}, rng)}, {rows, in},
      [](const Tensors& x) {
        Tensor<double> y(x[0].shape());
        ops::tanh_forward<double>(x[0].values(), y.values());
        return y;
      },
      [](const Tensors& x, const Tensor<double>& dy) {
        Tensor<double> y(x[0].shape());
        ops::tanh_forward<double>(x[0].values(), y.values());
        Tensors g{same_shape(x[0])};
        ops::tanh_backward<double>(y.values(), dy.values(), g[0].values());
        return g;
      },
      tol));

  const std::size_t ln_rows = 2, ln_cols = 8;
  Tensor<double> gain = random_tensor({ln_cols}, rng, 0.5);
  for (auto& v : gain.values()) v += 1.0;
  out.push_back(probe_check(
      "layer_norm", rng, {random_tensor({ln_rows, ln_cols}, rng), gain, random_tensor({ln_cols}, rng)},
      {ln_rows, ln_cols}, [](const Tensors& x) { return ops::layer_norm(x[0], x[1], x[2], 1e-12); },
      [=](const Tensors& x, const Tensor<double>& dy) {
        Tensor<double> y({ln_rows, ln_cols});
        ops::LayerNormCache<double> cache;
        ops::layer_norm_forward<double>(x[0].values(), ln_rows, ln_cols, x[1].values(), x[2].values(), 1e-12,
                                        y.values(), cache);
        Tensors g{same_shape(x[0]), same_shape(x[1]), same_shape(x[2])};
        ops::layer_norm_backward<double>(cache, ln_rows, ln_cols, x[1].values(), dy.values(), g[0].values(),
                                         g[1].values(), g[2].values());
        return g;
      },
      tol));

  out.push_back(probe_check(
      "softmax", rng, {random_tensor({rows, cols}, rng, 2.0)}, {rows, cols},
      [](const Tensors& x) { return ops::softmax(x[0]); },
      [=](const Tensors& x, const Tensor<double>& dy) {
        const Tensor<double> y = ops::softmax(x[0]);
        Tensors g{same_shape(x[0])};
        ops::softmax_backward<double>(y.values(), dy.values(), rows, cols, g[0].values());
        return g;
      },
      tol));

  const std::size_t table_rows = 6, dim = 3;
  std::vector<std::int32_t> ids;
  for (int i = 0; i < 5; ++i) ids.push_back(static_cast<std::int32_t>(rng.uniform_int(table_rows)));
  out.push_back(probe_check(
      "embedding", rng, {random_tensor({table_rows, dim}, rng)}, {ids.size(), dim},
      [=](const Tensors& x) {
        Tensor<double> y({ids.size(), dim});
        ops::embedding_forward<double>(x[0].values(), table_rows, dim, ids, y.values(), false);
        return y;
      },
      [=](const Tensors& x, const Tensor<double>& dy) {
        Tensors g{same_shape(x[0])};
        ops::embedding_backward<double>(ids, dim, dy.values(), g[0].values());
        return g;
      },
      tol));

  std::vector<std::int32_t> targets;
  for (std::size_t r = 0; r < 4; ++r) targets.push_back(static_cast<std::int32_t>(rng.uniform_int(cols)));
  targets[1] = ops::kIgnoreIndex;
  DifferentiableFn ce{
      [=](const Tensors& x) { return ops::softmax_cross_entropy<double>(x[0].values(), 4, cols, targets).loss; },
      [=](const Tensors& x) {
        auto r = ops::softmax_cross_entropy<double>(x[0].values(), 4, cols, targets);
        Tensor<double> g(x[0].shape());
        std::copy(r.dlogits.begin(), r.dlogits.end(), g.values().begin());
        return Tensors{g};
      }};
  out.push_back({"cross_entropy", grad_check_report(ce, {random_tensor({4, cols}, rng, 2.0)}, tol)});
  return out;
}

namespace {

struct TinyBatch {
  model::Batch batch;
  model::PretrainTargets targets;
  std::vector<std::int32_t> ner_labels;
};

TinyBatch tiny_batch(const model::ModelConfig& c, Rng& rng, std::size_t ner_classes) {
  const std::size_t T = 8;
  std::vector<tokenizer::InputSequence> rows(2);
  for (std::size_t b = 0; b < 2; ++b) {
    auto& r = rows[b];
    const std::size_t used = b == 0 ? T : T - 2;  // second row is padded
    for (std::size_t t = 0; t < T; ++t) {
      r.token_ids.push_back(t < used ? static_cast<std::int32_t>(5 + rng.uniform_int(c.vocab_size - 5)) : 0);
      r.type_ids.push_back(t < used && t >= used / 2 ? 1 : 0);
      r.attention_mask.push_back(t < used ? 1 : 0);
    }
  }
  TinyBatch out;
  out.batch = model::Batch::from_sequences(rows);
  out.targets.mlm_rows = {1, 4, T + 2};
  for (std::size_t m = 0; m < out.targets.mlm_rows.size(); ++m) {
    out.targets.mlm_labels.push_back(static_cast<std::int32_t>(5 + rng.uniform_int(c.vocab_size - 5)));
  }
  out.targets.sop_labels = {0, 1};
  for (std::size_t i = 0; i < 2 * T; ++i) {
    const bool pad = i >= T && i - T >= T - 2;
    out.ner_labels.push_back(pad || i % T == 0 ? ops::kIgnoreIndex
                                               : static_cast<std::int32_t>(rng.uniform_int(ner_classes)));
  }
  return out;
}

/// Runs a loss over a parameter set whose tensors are the check inputs.
NamedCheck parameter_check(std::string name, const model::ParameterSet<double>& init,
                           std::function<double(const model::ParameterSet<double>&)> loss,
                           std::function<double(const model::ParameterSet<double>&, model::ParameterSet<double>&)>
                               loss_and_grad,
                           double tol) {
  std::vector<std::string> names;
  Tensors inputs;
  for (const auto& [n, t] : init) {
    names.push_back(n);
    inputs.push_back(t);
  }
  auto to_set = [names](const Tensors& x) {
    model::ParameterSet<double> p;
    for (std::size_t i = 0; i < names.size(); ++i) p.insert(names[i], x[i]);
    return p;
  };
  DifferentiableFn fn{[=](const Tensors& x) { return loss(to_set(x)); },
                      [=](const Tensors& x) {
                        const auto p = to_set(x);
                        auto g = p.zeros_like();
                        loss_and_grad(p, g);
                        Tensors out;
                        for (const auto& n : names) out.push_back(g.at(n));
                        return out;
                      }};
  return {std::move(name), grad_check_report(fn, std::move(inputs), tol)};
}

}  // namespace

NamedCheck pretrain_loss_grad_check(std::uint64_t seed, bool share, double tol) {
  auto c = tiny_config();
  c.share_parameters = share;
  c.num_layers = 2;
  Rng rng = Rng::derive(seed, "pretrain-grad");
  // Larger than the default init scale so every path carries signal.
  auto params = model::init_parameters<double>(c, model::HeadSet::pretraining(), rng);
  for (auto& [n, t] : params) {
    for (auto& v : t.values()) v += 0.1 * rng.normal();
  }
  const TinyBatch tb = tiny_batch(c, rng, 3);
  return parameter_check(
      share ? "pretrain_loss_shared" : "pretrain_loss_unshared", params,
      [=](const model::ParameterSet<double>& p) { return model::pretrain_loss(p, c, tb.batch, tb.targets).total; },
      [=](const model::ParameterSet<double>& p, model::ParameterSet<double>& g) {
        return model::pretrain_loss_and_gradients(p, c, tb.batch, tb.targets, g).total;
      },
      tol);
}

NamedCheck ner_loss_grad_check(std::uint64_t seed, double tol) {
  auto c = tiny_config();
  c.num_layers = 2;
  Rng rng = Rng::derive(seed, "ner-grad");
  model::HeadSet heads = model::HeadSet::encoder_only();
  heads.ner_labels = 3;
  auto params = model::init_parameters<double>(c, heads, rng);
  for (auto& [n, t] : params) {
    for (auto& v : t.values()) v += 0.1 * rng.normal();
  }
  const TinyBatch tb = tiny_batch(c, rng, 3);
  return parameter_check(
      "ner_loss", params,
      [=](const model::ParameterSet<double>& p) {
        return model::token_classification_loss(p, c, tb.batch, tb.ner_labels);
      },
      [=](const model::ParameterSet<double>& p, model::ParameterSet<double>& g) {
        return model::token_classification_loss_and_gradients(p, c, tb.batch, tb.ner_labels, g);
      },
      tol);
}

}  // namespace bioner::testing
