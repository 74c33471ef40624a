// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bioner/numerics/rng.hpp"
#include "bioner/numerics/tensor.hpp"

namespace bioner {

/// A scalar-valued function of several tensors together with its
/// hand-written gradient. Both sides are evaluated in double precision.
struct DifferentiableFn {
  std::function<double(const std::vector<Tensor<double>>&)> value;
  std::function<std::vector<Tensor<double>>(const std::vector<Tensor<double>>&)> gradient;
};

struct GradCheckReport {
  bool passed = false;
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_element = 0;
  std::size_t elements_checked = 0;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Gradients below this magnitude are compared on an absolute scale.
inline constexpr double kRelativeErrorFloor = 1e-4;

/// Compares the analytic gradient against central differences with step
/// 1e-5 on every element of every input. The relative error of an element
/// is |a - n| / max(|a|, |n|, kRelativeErrorFloor).
GradCheckReport grad_check_report(const DifferentiableFn& fn, std::vector<Tensor<double>> inputs, double tolerance);

inline bool grad_check(const DifferentiableFn& fn, std::vector<Tensor<double>> inputs, double tolerance) {
  return grad_check_report(fn, std::move(inputs), tolerance).passed;
}

/// Turns a tensor-valued op into a scalar one by contracting its output
/// with a fixed random tensor `probe`: value = sum(op(x) * probe). The
/// backward callback receives `probe` as the upstream gradient.
DifferentiableFn contract_with_probe(
    std::function<Tensor<double>(const std::vector<Tensor<double>>&)> forward,
    std::function<std::vector<Tensor<double>>(const std::vector<Tensor<double>>&, const Tensor<double>&)> backward,
    Tensor<double> probe);

Tensor<double> random_tensor(Shape shape, Rng& rng, double scale = 1.0);

}  // namespace bioner
