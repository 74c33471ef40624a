// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// Forward and backward kernels for every primitive the encoder uses.
//
// The span-level kernels take explicit dimensions and never allocate their
// outputs. Backward kernels that produce parameter gradients ACCUMULATE
// into them (shared weights are visited once per layer); input gradients
// are overwritten unless stated otherwise. Instantiated for float and
// double in ops.cpp.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bioner/numerics/tensor.hpp"

namespace bioner::ops {

inline constexpr std::int32_t kIgnoreIndex = -100;

/// c[m x n] (+)= op(a) * op(b), op(a) is m x k, op(b) is k x n.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
          std::span<const T> b, std::span<T> c, bool accumulate);

/// y[rows x out] = x[rows x in] * w[in x out] + bias (bias may be empty).
template <typename T>
void linear_forward(std::span<const T> x, std::size_t rows, std::size_t in, std::span<const T> w,
                    std::span<const T> bias, std::size_t out, std::span<T> y);

/// dx is overwritten when non-empty (or accumulated if accumulate_dx);
/// dw and dbias are accumulated.
template <typename T>
void linear_backward(std::span<const T> x, std::size_t rows, std::size_t in, std::span<const T> w,
                     std::size_t out, std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> dbias, bool accumulate_dx = false);

template <typename T>
T gelu_scalar(T x);
template <typename T>
T gelu_grad_scalar(T x);

template <typename T>
void gelu_forward(std::span<const T> x, std::span<T> y);
template <typename T>
void gelu_backward(std::span<const T> x, std::span<const T> dy, std::span<T> dx);

template <typename T>
void tanh_forward(std::span<const T> x, std::span<T> y);
/// Uses the forward output y: d/dx tanh = 1 - y^2.
template <typename T>
void tanh_backward(std::span<const T> y, std::span<const T> dy, std::span<T> dx);

template <typename T>
struct LayerNormCache {
  std::vector<T> normalized;  // rows x cols, before gain/bias
  std::vector<T> inv_std;     // rows
};

template <typename T>
void layer_norm_forward(std::span<const T> x, std::size_t rows, std::size_t cols, std::span<const T> gain,
                        std::span<const T> bias, T eps, std::span<T> y, LayerNormCache<T>& cache);
template <typename T>
void layer_norm_backward(const LayerNormCache<T>& cache, std::size_t rows, std::size_t cols,
                         std::span<const T> gain, std::span<const T> dy, std::span<T> dx,
                         std::span<T> dgain, std::span<T> dbias);

/// Row softmax. Entries equal to -inf get probability exactly 0; every row
/// must contain at least one finite entry.
template <typename T>
void softmax_forward(std::span<const T> x, std::size_t rows, std::size_t cols, std::span<T> y);
template <typename T>
void softmax_backward(std::span<const T> y, std::span<const T> dy, std::size_t rows, std::size_t cols,
                      std::span<T> dx);

/// out[r] (+)= table[ids[r]] for a table with `dim` columns.
template <typename T>
void embedding_forward(std::span<const T> table, std::size_t table_rows, std::size_t dim,
                       std::span<const std::int32_t> ids, std::span<T> out, bool accumulate);
template <typename T>
void embedding_backward(std::span<const std::int32_t> ids, std::size_t dim, std::span<const T> dout,
                        std::span<T> dtable);

template <typename T>
struct CrossEntropy {
  T loss = T{0};
  std::size_t counted = 0;
  std::vector<T> dlogits;  // d(loss)/d(logits), already divided by `counted`
};

/// Mean negative log-likelihood over rows whose target != ignore_index.
/// Throws std::invalid_argument when every row is ignored.
template <typename T>
CrossEntropy<T> softmax_cross_entropy(std::span<const T> logits, std::size_t rows, std::size_t classes,
                                      std::span<const std::int32_t> targets,
                                      std::int32_t ignore_index = kIgnoreIndex);

// Tensor-level conveniences.

template <typename T>
Tensor<T> gelu(const Tensor<T>& x);

/// Normalizes over the last axis.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps);

template <typename T>
Tensor<T> softmax(const Tensor<T>& x);

/// [rows x k] * [k x n]; leading axes of `a` are flattened into rows.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
T softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::int32_t> targets,
                        std::int32_t ignore_index = kIgnoreIndex);

}  // namespace bioner::ops
