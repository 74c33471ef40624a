// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bioner {

GradCheckReport grad_check_report(const DifferentiableFn& fn, std::vector<Tensor<double>> inputs, double tolerance) {
  const std::vector<Tensor<double>> analytic = fn.gradient(inputs);
  if (analytic.size() != inputs.size()) throw std::invalid_argument("grad_check: gradient count mismatch");

  GradCheckReport report;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (analytic[t].shape() != inputs[t].shape()) throw ShapeError("grad_check: gradient shape mismatch");
    for (std::size_t i = 0; i < inputs[t].size(); ++i) {
      const double saved = inputs[t][i];
      inputs[t][i] = saved + kFiniteDifferenceStep;
      const double up = fn.value(inputs);
      inputs[t][i] = saved - kFiniteDifferenceStep;
      const double down = fn.value(inputs);
      inputs[t][i] = saved;

      const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
      const double a = analytic[t][i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), kRelativeErrorFloor});
      double err = std::fabs(a - numeric) / denom;
      if (!std::isfinite(err)) err = HUGE_VAL;
      if (report.elements_checked == 0 || err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_input = t;
        report.worst_element = i;
      }
      ++report.elements_checked;
    }
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

DifferentiableFn contract_with_probe(
    std::function<Tensor<double>(const std::vector<Tensor<double>>&)> forward,
    std::function<std::vector<Tensor<double>>(const std::vector<Tensor<double>>&, const Tensor<double>&)> backward,
    Tensor<double> probe) {
  DifferentiableFn fn;
  fn.value = [forward, probe](const std::vector<Tensor<double>>& in) {
    const Tensor<double> out = forward(in);
    if (out.shape() != probe.shape()) throw ShapeError("contract_with_probe: output/probe shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += out[i] * probe[i];
    return acc;
  };
  fn.gradient = [backward, probe](const std::vector<Tensor<double>>& in) { return backward(in, probe); };
  return fn;
}

Tensor<double> random_tensor(Shape shape, Rng& rng, double scale) {
  Tensor<double> t(std::move(shape));
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

}  // namespace bioner
