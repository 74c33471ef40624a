// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "bioner/numerics/grad_check.hpp"
#include "bioner/numerics/ops.hpp"
#include "bioner/numerics/rng.hpp"
#include "bioner/numerics/tensor.hpp"
#include "grad_suites.hpp"
#include "oracles.hpp"

using namespace bioner;

TEST_CASE("tensor shape contract") {
  Tensor<double> t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.all_finite());
  CHECK_THROWS_AS(Tensor<double>({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor<double>({2, 3}, std::vector<double>(5)), ShapeError);
  CHECK_THROWS_AS(t.reshaped({4}), ShapeError);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
  t[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("gelu values against a series-erf oracle") {
  CHECK(ops::gelu_scalar(0.0) == 0.0);
  CHECK(std::fabs(ops::gelu_scalar(1.0) - 0.841345) < 1e-5);
  CHECK(std::fabs(ops::gelu_scalar(1.0) - static_cast<double>(testing::oracle_gelu(1.0L))) < 1e-12);
  CHECK(std::fabs(ops::gelu_scalar(10.0) - 10.0) < 1e-6);
  for (double x = -3.0; x <= 3.0; x += 0.25) {
    CHECK(std::fabs(ops::gelu_scalar(x) - static_cast<double>(testing::oracle_gelu(x))) < 1e-12);
  }
}

TEST_CASE("layer_norm examples") {
  const Tensor<double> ones({3}, {1, 1, 1});
  const Tensor<double> zeros({3}, {0, 0, 0});
  auto y = ops::layer_norm(Tensor<double>({1, 3}, {1, 1, 1}), ones, zeros, 1e-12);
  for (double v : y.values()) CHECK(v == 0.0);

  y = ops::layer_norm(Tensor<double>({1, 3}, {1, 2, 3}), ones, zeros, 1e-12);
  CHECK(std::fabs(y[0] + 1.22474) < 1e-4);
  CHECK(std::fabs(y[1]) < 1e-4);
  CHECK(std::fabs(y[2] - 1.22474) < 1e-4);

  y = ops::layer_norm(Tensor<double>({1, 2}, {0, 0}), Tensor<double>({2}, {2, 2}), Tensor<double>({2}, {5, 5}),
                      1e-12);
  CHECK(y[0] == 5.0);
  CHECK(y[1] == 5.0);

  std::vector<double> x, out;
  std::vector<double> g, b;
  ops::LayerNormCache<double> cache;
  CHECK_THROWS_AS(ops::layer_norm_forward<double>(x, 2, 0, g, b, 1e-12, out, cache), ShapeError);
}

TEST_CASE("layer_norm rows have zero mean") {
  Rng rng(7);
  const auto x = random_tensor({5, 16}, rng, 3.0);
  Tensor<double> gain({16}), bias({16});
  gain.fill(1.0);
  const auto y = ops::layer_norm(x, gain, bias, 1e-12);
  for (std::size_t r = 0; r < 5; ++r) {
    double mean = 0, var = 0;
    for (double v : y.row(r)) mean += v;
    mean /= 16;
    for (double v : y.row(r)) var += (v - mean) * (v - mean);
    CHECK(std::fabs(mean) < 1e-7);
    CHECK(var / 16 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("softmax rows sum to one and honour -inf") {
  Rng rng(3);
  const auto y = ops::softmax(random_tensor({4, 7}, rng, 5.0));
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0;
    for (double v : y.row(r)) s += v;
    CHECK(std::fabs(s - 1.0) < 1e-9);
  }
  const double inf = std::numeric_limits<double>::infinity();
  const auto masked = ops::softmax(Tensor<double>({1, 3}, {0.0, -inf, 0.0}));
  CHECK(masked[1] == 0.0);
  CHECK(masked[0] == doctest::Approx(0.5));
  CHECK_THROWS(ops::softmax(Tensor<double>({1, 2}, {-inf, -inf})));
}

TEST_CASE("softmax_cross_entropy examples") {
  const std::vector<std::int32_t> t0{0};
  CHECK(ops::softmax_cross_entropy(Tensor<double>({1, 2}, {0, 0}), t0) == doctest::Approx(std::log(2.0)));
  CHECK(ops::softmax_cross_entropy(Tensor<double>({1, 2}, {100, 0}), t0) < 1e-6);
  const std::vector<std::int32_t> t1{0, ops::kIgnoreIndex};
  CHECK(ops::softmax_cross_entropy(Tensor<double>({2, 2}, {0, 0, 0, 0}), t1) == doctest::Approx(std::log(2.0)));
  const std::vector<std::int32_t> all_ignored{ops::kIgnoreIndex, ops::kIgnoreIndex};
  CHECK_THROWS_AS(ops::softmax_cross_entropy(Tensor<double>({2, 2}, {0, 0, 0, 0}), all_ignored),
                  std::invalid_argument);
  const std::vector<std::int32_t> out_of_range{2};
  CHECK_THROWS(ops::softmax_cross_entropy(Tensor<double>({1, 2}, {0, 0}), out_of_range));
}

TEST_CASE("embedding rejects out-of-range ids") {
  std::vector<double> table(6), out(2);
  const std::vector<std::int32_t> ids{3};
  CHECK_THROWS_AS(ops::embedding_forward<double>(table, 3, 2, ids, out, false), std::out_of_range);
}

TEST_CASE("matmul matches a triple loop") {
  Rng rng(11);
  const auto a = random_tensor({3, 5}, rng);
  const auto b = random_tensor({5, 2}, rng);
  const auto c = ops::matmul(a, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double acc = 0;
      for (std::size_t k = 0; k < 5; ++k) acc += a[i * 5 + k] * b[k * 2 + j];
      CHECK(c[i * 2 + j] == doctest::Approx(acc).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(ops::matmul(a, a), ShapeError);
}

TEST_CASE("every primitive passes the gradient check over 20 seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const auto& check : testing::primitive_grad_checks(seed, 1e-4)) {
      INFO(check.name << " seed " << seed << " max rel err " << check.report.max_relative_error);
      CHECK(check.report.passed);
      CHECK(check.report.elements_checked > 0);
    }
  }
}

TEST_CASE("grad_check rejects a wrong gradient") {
  DifferentiableFn wrong{[](const std::vector<Tensor<double>>& x) { return x[0][0] * x[0][0]; },
                         [](const std::vector<Tensor<double>>& x) {
                           Tensor<double> g(x[0].shape());
                           g[0] = 3.0 * x[0][0];  // true derivative is 2x
                           return std::vector<Tensor<double>>{g};
                         }};
  const auto report = grad_check_report(wrong, {Tensor<double>({1}, {1.5})}, 1e-4);
  CHECK_FALSE(report.passed);
  CHECK(report.max_relative_error == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("operations are deterministic") {
  Rng a(99), b(99);
  const auto x1 = random_tensor({4, 8}, a), x2 = random_tensor({4, 8}, b);
  CHECK(x1 == x2);
  CHECK(ops::gelu(x1) == ops::gelu(x2));
  CHECK(ops::softmax(x1) == ops::softmax(x2));
}

TEST_CASE("rng streams are reproducible and positioned") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42, 100);
  CHECK(c.next_u64() == a.next_u64());
  CHECK(a.position() == 101);
  // Known value of the documented construction: mix(seed + 0x9E3779B97F4A7C15).
  Rng zero(0);
  CHECK(zero.next_u64() == 0xE220A8397B1DCDAFULL);
  CHECK(Rng::derive(1, "x", 0).next_u64() != Rng::derive(1, "x", 1).next_u64());
  CHECK(Rng::derive(1, "x", 0).next_u64() != Rng::derive(1, "y", 0).next_u64());
}

TEST_CASE("rng distributions") {
  Rng rng(5);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  sum = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.02);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
  for (int i = 0; i < 10000; ++i) CHECK(std::fabs(rng.truncated_normal(0.02, 2.0)) <= 0.04);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.uniform_int(7)];
  for (int c : counts) CHECK(c == doctest::Approx(10000).epsilon(0.05));
  const auto sample = rng.sample_without_replacement(50, 20);
  CHECK(std::set<std::size_t>(sample.begin(), sample.end()).size() == 20);
}

TEST_CASE("epoch stream covers every index per epoch and seeks exactly") {
  EpochStream s(7, 3, "order");
  std::vector<std::size_t> first;
  for (int i = 0; i < 21; ++i) first.push_back(s.next());
  for (int e = 0; e < 3; ++e) {
    std::set<std::size_t> seen(first.begin() + e * 7, first.begin() + (e + 1) * 7);
    CHECK(seen.size() == 7);
  }
  EpochStream t(7, 3, "order");
  t.seek(10);
  for (int i = 10; i < 21; ++i) CHECK(t.next() == first[static_cast<std::size_t>(i)]);
  t.seek(2);
  CHECK(t.next() == first[2]);
  CHECK_THROWS(EpochStream(0, 1, "x"));
}
