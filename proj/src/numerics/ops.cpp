// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bioner {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace ops {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
          std::span<const T> b, std::span<T> c, bool accumulate) {
  require(a.size() >= m * k && b.size() >= k * n && c.size() >= m * n, "gemm: operand too small");
  if (!accumulate) std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(m * n), T{0});
  if (!trans_a && !trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      T* crow = c.data() + i * n;
      const T* arow = a.data() + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const T av = arow[p];
        const T* brow = b.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
    // b is stored n x k.
    for (std::size_t i = 0; i < m; ++i) {
      const T* arow = a.data() + i * k;
      T* crow = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        const T* brow = b.data() + j * k;
        T acc{0};
        for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        crow[j] += acc;
      }
    }
  } else if (trans_a && !trans_b) {
    // a is stored k x m.
    for (std::size_t p = 0; p < k; ++p) {
      const T* arow = a.data() + p * m;
      const T* brow = b.data() + p * n;
      for (std::size_t i = 0; i < m; ++i) {
        const T av = arow[i];
        T* crow = c.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        T acc{0};
        for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
        c[i * n + j] += acc;
      }
    }
  }
}

template <typename T>
void linear_forward(std::span<const T> x, std::size_t rows, std::size_t in, std::span<const T> w,
                    std::span<const T> bias, std::size_t out, std::span<T> y) {
  require(x.size() == rows * in && w.size() == in * out && y.size() == rows * out, "linear_forward: shape");
  require(bias.empty() || bias.size() == out, "linear_forward: bias shape");
  if (bias.empty()) {
    std::fill(y.begin(), y.end(), T{0});
  } else {
    for (std::size_t r = 0; r < rows; ++r) std::copy(bias.begin(), bias.end(), y.begin() + r * out);
  }
  gemm<T>(false, false, rows, out, in, x, w, y, true);
}

template <typename T>
void linear_backward(std::span<const T> x, std::size_t rows, std::size_t in, std::span<const T> w,
                     std::size_t out, std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> dbias, bool accumulate_dx) {
  require(dy.size() == rows * out, "linear_backward: dy shape");
  if (!dx.empty()) gemm<T>(false, true, rows, in, out, dy, w, dx, accumulate_dx);
  if (!dw.empty()) gemm<T>(true, false, in, out, rows, x, dy, dw, true);
  if (!dbias.empty()) {
    for (std::size_t r = 0; r < rows; ++r) {
      const T* row = dy.data() + r * out;
      for (std::size_t j = 0; j < out; ++j) dbias[j] += row[j];
    }
  }
}

template <typename T>
T gelu_scalar(T x) {
  return T(0.5) * x * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
}

template <typename T>
T gelu_grad_scalar(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
  const T pdf = std::exp(T(-0.5) * x * x) * (std::numbers::inv_sqrtpi_v<T> / std::numbers::sqrt2_v<T>);
  return cdf + x * pdf;
}

template <typename T>
void gelu_forward(std::span<const T> x, std::span<T> y) {
  require(x.size() == y.size(), "gelu_forward: shape");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = gelu_scalar(x[i]);
}

template <typename T>
void gelu_backward(std::span<const T> x, std::span<const T> dy, std::span<T> dx) {
  require(x.size() == dy.size() && x.size() == dx.size(), "gelu_backward: shape");
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = dy[i] * gelu_grad_scalar(x[i]);
}

template <typename T>
void tanh_forward(std::span<const T> x, std::span<T> y) {
  require(x.size() == y.size(), "tanh_forward: shape");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
}

template <typename T>
void tanh_backward(std::span<const T> y, std::span<const T> dy, std::span<T> dx) {
  require(y.size() == dy.size() && y.size() == dx.size(), "tanh_backward: shape");
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * (T(1) - y[i] * y[i]);
}

template <typename T>
void layer_norm_forward(std::span<const T> x, std::size_t rows, std::size_t cols, std::span<const T> gain,
                        std::span<const T> bias, T eps, std::span<T> y, LayerNormCache<T>& cache) {
  if (cols == 0) throw ShapeError("layer_norm: zero-length normalization axis");
  require(x.size() == rows * cols && y.size() == x.size(), "layer_norm: input shape");
  require(gain.size() == cols && bias.size() == cols, "layer_norm: gain/bias must match last axis");
  cache.normalized.resize(rows * cols);
  cache.inv_std.resize(rows);
  const T n = static_cast<T>(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * cols;
    T mean{0};
    for (std::size_t j = 0; j < cols; ++j) mean += xr[j];
    mean /= n;
    T var{0};
    for (std::size_t j = 0; j < cols; ++j) {
      const T d = xr[j] - mean;
      var += d * d;
    }
    var /= n;
    const T inv = T(1) / std::sqrt(var + eps);
    cache.inv_std[r] = inv;
    T* nr = cache.normalized.data() + r * cols;
    T* yr = y.data() + r * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      nr[j] = (xr[j] - mean) * inv;
      yr[j] = nr[j] * gain[j] + bias[j];
    }
  }
}

template <typename T>
void layer_norm_backward(const LayerNormCache<T>& cache, std::size_t rows, std::size_t cols,
                         std::span<const T> gain, std::span<const T> dy, std::span<T> dx,
                         std::span<T> dgain, std::span<T> dbias) {
  require(dy.size() == rows * cols && dx.size() == dy.size(), "layer_norm_backward: shape");
  const T n = static_cast<T>(cols);
  std::vector<T> dn(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* nr = cache.normalized.data() + r * cols;
    const T* dyr = dy.data() + r * cols;
    T sum_dn{0};
    T sum_dn_n{0};
    for (std::size_t j = 0; j < cols; ++j) {
      if (!dgain.empty()) dgain[j] += dyr[j] * nr[j];
      if (!dbias.empty()) dbias[j] += dyr[j];
      dn[j] = dyr[j] * gain[j];
      sum_dn += dn[j];
      sum_dn_n += dn[j] * nr[j];
    }
    const T inv = cache.inv_std[r];
    T* dxr = dx.data() + r * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      dxr[j] = inv * (dn[j] - sum_dn / n - nr[j] * sum_dn_n / n);
    }
  }
}

template <typename T>
void softmax_forward(std::span<const T> x, std::size_t rows, std::size_t cols, std::span<T> y) {
  require(x.size() == rows * cols && y.size() == x.size(), "softmax: shape");
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * cols;
    T* yr = y.data() + r * cols;
    const T mx = *std::max_element(xr, xr + cols);
    if (!std::isfinite(mx)) throw std::domain_error("softmax: row without a finite entry");
    T sum{0};
    for (std::size_t j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      sum += yr[j];
    }
    for (std::size_t j = 0; j < cols; ++j) yr[j] /= sum;
  }
}

template <typename T>
void softmax_backward(std::span<const T> y, std::span<const T> dy, std::size_t rows, std::size_t cols,
                      std::span<T> dx) {
  require(y.size() == rows * cols && dy.size() == y.size() && dx.size() == y.size(), "softmax_backward: shape");
  for (std::size_t r = 0; r < rows; ++r) {
    const T* yr = y.data() + r * cols;
    const T* dyr = dy.data() + r * cols;
    T dot{0};
    for (std::size_t j = 0; j < cols; ++j) dot += yr[j] * dyr[j];
    T* dxr = dx.data() + r * cols;
    for (std::size_t j = 0; j < cols; ++j) dxr[j] = yr[j] * (dyr[j] - dot);
  }
}

template <typename T>
void embedding_forward(std::span<const T> table, std::size_t table_rows, std::size_t dim,
                       std::span<const std::int32_t> ids, std::span<T> out, bool accumulate) {
  require(table.size() == table_rows * dim && out.size() == ids.size() * dim, "embedding_forward: shape");
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto id = ids[r];
    if (id < 0 || static_cast<std::size_t>(id) >= table_rows) {
      throw std::out_of_range("embedding id " + std::to_string(id) + " outside table of " +
                              std::to_string(table_rows) + " rows");
    }
    const T* src = table.data() + static_cast<std::size_t>(id) * dim;
    T* dst = out.data() + r * dim;
    if (accumulate) {
      for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
    } else {
      std::copy(src, src + dim, dst);
    }
  }
}

template <typename T>
void embedding_backward(std::span<const std::int32_t> ids, std::size_t dim, std::span<const T> dout,
                        std::span<T> dtable) {
  require(dout.size() == ids.size() * dim, "embedding_backward: shape");
  for (std::size_t r = 0; r < ids.size(); ++r) {
    T* dst = dtable.data() + static_cast<std::size_t>(ids[r]) * dim;
    const T* src = dout.data() + r * dim;
    for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
  }
}

template <typename T>
CrossEntropy<T> softmax_cross_entropy(std::span<const T> logits, std::size_t rows, std::size_t classes,
                                      std::span<const std::int32_t> targets, std::int32_t ignore_index) {
  require(logits.size() == rows * classes && targets.size() == rows, "softmax_cross_entropy: shape");
  CrossEntropy<T> out;
  out.dlogits.assign(rows * classes, T{0});
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] == ignore_index) continue;
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= classes) {
      throw std::out_of_range("cross-entropy target " + std::to_string(targets[r]) + " outside " +
                              std::to_string(classes) + " classes");
    }
    ++out.counted;
  }
  if (out.counted == 0) throw std::invalid_argument("softmax_cross_entropy: every row is ignored");
  const T scale = T(1) / static_cast<T>(out.counted);
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] == ignore_index) continue;
    const T* lr = logits.data() + r * classes;
    T* dr = out.dlogits.data() + r * classes;
    const T mx = *std::max_element(lr, lr + classes);
    T sum{0};
    for (std::size_t j = 0; j < classes; ++j) {
      dr[j] = std::exp(lr[j] - mx);
      sum += dr[j];
    }
    const T log_z = mx + std::log(sum);
    const auto t = static_cast<std::size_t>(targets[r]);
    out.loss += log_z - lr[t];
    for (std::size_t j = 0; j < classes; ++j) dr[j] = dr[j] / sum * scale;
    dr[t] -= scale;
  }
  out.loss *= scale;
  return out;
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  gelu_forward<T>(x.values(), y.values());
  return y;
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps) {
  Tensor<T> y(x.shape());
  LayerNormCache<T> cache;
  layer_norm_forward<T>(x.values(), x.rows(), x.cols(), gain.values(), bias.values(), eps, y.values(), cache);
  return y;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  softmax_forward<T>(x.values(), x.rows(), x.cols(), y.values());
  return y;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (b.rank() != 2 || a.cols() != b.dim(0)) {
    throw ShapeError("matmul: cannot multiply " + shape_to_string(a.shape()) + " by " + shape_to_string(b.shape()));
  }
  Shape out_shape = a.shape();
  out_shape.back() = b.dim(1);
  Tensor<T> c(out_shape);
  gemm<T>(false, false, a.rows(), b.dim(1), a.cols(), a.values(), b.values(), c.values(), false);
  return c;
}

template <typename T>
T softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::int32_t> targets, std::int32_t ignore_index) {
  return softmax_cross_entropy<T>(logits.values(), logits.rows(), logits.cols(), targets, ignore_index).loss;
}

#define BIONER_INSTANTIATE_OPS(T)                                                                             \
  template void gemm<T>(bool, bool, std::size_t, std::size_t, std::size_t, std::span<const T>,              \
                        std::span<const T>, std::span<T>, bool);                                            \
  template void linear_forward<T>(std::span<const T>, std::size_t, std::size_t, std::span<const T>,         \
                                  std::span<const T>, std::size_t, std::span<T>);                           \
  template void linear_backward<T>(std::span<const T>, std::size_t, std::size_t, std::span<const T>,        \
                                   std::size_t, std::span<const T>, std::span<T>, std::span<T>,             \
                                   std::span<T>, bool);                                                     \
  template T gelu_scalar<T>(T);                                                                             \
  template T gelu_grad_scalar<T>(T);                                                                        \
  template void gelu_forward<T>(std::span<const T>, std::span<T>);                                          \
  template void gelu_backward<T>(std::span<const T>, std::span<const T>, std::span<T>);                     \
  template void tanh_forward<T>(std::span<const T>, std::span<T>);                                          \
  template void tanh_backward<T>(std::span<const T>, std::span<const T>, std::span<T>);                     \
  template void layer_norm_forward<T>(std::span<const T>, std::size_t, std::size_t, std::span<const T>,     \
                                      std::span<const T>, T, std::span<T>, LayerNormCache<T>&);             \
  template void layer_norm_backward<T>(const LayerNormCache<T>&, std::size_t, std::size_t,                  \
                                       std::span<const T>, std::span<const T>, std::span<T>, std::span<T>,  \
                                       std::span<T>);                                                       \
  template void softmax_forward<T>(std::span<const T>, std::size_t, std::size_t, std::span<T>);             \
  template void softmax_backward<T>(std::span<const T>, std::span<const T>, std::size_t, std::size_t,       \
                                    std::span<T>);                                                          \
  template void embedding_forward<T>(std::span<const T>, std::size_t, std::size_t,                          \
                                     std::span<const std::int32_t>, std::span<T>, bool);                    \
  template void embedding_backward<T>(std::span<const std::int32_t>, std::size_t, std::span<const T>,       \
                                      std::span<T>);                                                        \
  template CrossEntropy<T> softmax_cross_entropy<T>(std::span<const T>, std::size_t, std::size_t,           \
                                                    std::span<const std::int32_t>, std::int32_t);           \
  template Tensor<T> gelu<T>(const Tensor<T>&);                                                             \
  template Tensor<T> layer_norm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);                \
  template Tensor<T> softmax<T>(const Tensor<T>&);                                                          \
  template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                                         \
  template T softmax_cross_entropy<T>(const Tensor<T>&, std::span<const std::int32_t>, std::int32_t);

BIONER_INSTANTIATE_OPS(float)
BIONER_INSTANTIATE_OPS(double)

#undef BIONER_INSTANTIATE_OPS

}  // namespace ops
}  // namespace bioner
