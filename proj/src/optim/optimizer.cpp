// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/optim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bioner::optim {

using model::ParameterSet;

template <typename T>
ParameterSet<T> OptimizerState<T>::to_tensors() const {
  ParameterSet<T> out;
  for (const auto& [name, t] : m) out.insert("m/" + name, t);
  for (const auto& [name, t] : v) out.insert("v/" + name, t);
  return out;
}

template <typename T>
OptimizerState<T> OptimizerState<T>::from_tensors(const ParameterSet<T>& tensors, std::size_t step,
                                                  Hyperparameters hyper) {
  OptimizerState<T> s;
  s.hyper = hyper;
  s.step = step;
  for (const auto& [name, t] : tensors) {
    if (name.starts_with("m/")) {
      s.m.insert(name.substr(2), t);
    } else if (name.starts_with("v/")) {
      s.v.insert(name.substr(2), t);
    } else {
      throw OptimizerError("unexpected optimizer tensor '" + name + "'");
    }
  }
  return s;
}

namespace {

template <typename T>
void validate_step(OptimizerState<T>& state, const ParameterSet<T>& params, const ParameterSet<T>& grads) {
  for (const auto& [name, p] : params) {
    if (!grads.contains(name)) throw OptimizerError("no gradient for parameter '" + name + "'");
    const auto& g = grads.at(name);
    if (g.shape() != p.shape()) throw OptimizerError("gradient shape mismatch for '" + name + "'");
    if (!g.all_finite()) throw OptimizerError("non-finite gradient for '" + name + "'");
    if (state.m.contains(name) && state.m.at(name).shape() != p.shape()) {
      throw OptimizerError("optimizer state shape mismatch for '" + name + "'");
    }
  }
}

/// Updates the moments of one tensor and returns the AdamW direction.
template <typename T>
std::vector<double> adam_direction(OptimizerState<T>& state, const std::string& name, const Tensor<T>& p,
                                   const Tensor<T>& g) {
  if (!state.m.contains(name)) {
    state.m.insert(name, Tensor<T>(p.shape()));
    state.v.insert(name, Tensor<T>(p.shape()));
  }
  auto& m = state.m.at(name);
  auto& v = state.v.at(name);
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const double m_correction = 1.0 - std::pow(h.beta1, t);
  const double v_correction = 1.0 - std::pow(h.beta2, t);
  const double decay = model::is_bias_or_norm(name) ? 0.0 : h.weight_decay;

  std::vector<double> u(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double gi = static_cast<double>(g[i]);
    m[i] = static_cast<T>(h.beta1 * static_cast<double>(m[i]) + (1.0 - h.beta1) * gi);
    v[i] = static_cast<T>(h.beta2 * static_cast<double>(v[i]) + (1.0 - h.beta2) * gi * gi);
    const double m_hat = static_cast<double>(m[i]) / m_correction;
    const double v_hat = static_cast<double>(v[i]) / v_correction;
    u[i] = m_hat / (std::sqrt(v_hat) + h.eps) + decay * static_cast<double>(p[i]);
  }
  return u;
}

}  // namespace

template <typename T>
void adamw_step(OptimizerState<T>& state, ParameterSet<T>& params, const ParameterSet<T>& grads, double lr) {
  validate_step(state, params, grads);
  ++state.step;
  for (auto& [name, p] : params) {
    const std::vector<double> u = adam_direction(state, name, p, grads.at(name));
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * u[i]);
  }
}

template <typename T>
void lamb_step(OptimizerState<T>& state, ParameterSet<T>& params, const ParameterSet<T>& grads, double lr) {
  validate_step(state, params, grads);
  ++state.step;
  for (auto& [name, p] : params) {
    const std::vector<double> u = adam_direction(state, name, p, grads.at(name));
    double p_norm = 0.0;
    double u_norm = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p_norm += static_cast<double>(p[i]) * static_cast<double>(p[i]);
      u_norm += u[i] * u[i];
    }
    p_norm = std::sqrt(p_norm);
    u_norm = std::sqrt(u_norm);
    const double ratio = (p_norm == 0.0 || u_norm == 0.0) ? 1.0 : std::clamp(p_norm / u_norm, 0.0, kMaxTrustRatio);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * ratio * u[i]);
  }
}

template struct OptimizerState<float>;
template struct OptimizerState<double>;
template void adamw_step<float>(OptimizerState<float>&, ParameterSet<float>&, const ParameterSet<float>&, double);
template void adamw_step<double>(OptimizerState<double>&, ParameterSet<double>&, const ParameterSet<double>&, double);
template void lamb_step<float>(OptimizerState<float>&, ParameterSet<float>&, const ParameterSet<float>&, double);
template void lamb_step<double>(OptimizerState<double>&, ParameterSet<double>&, const ParameterSet<double>&, double);

}  // namespace bioner::optim
