#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "riskstream/errors.hpp"
#include "riskstream/graph.hpp"

namespace riskstream {

// Adam with bias correction. Moments are index-aligned with the parameter
// list handed to the constructor; the same list (same order) must be passed
// to every step.
struct AdamState {
  Real learning_rate = Real(0.001);
  Real beta1 = Real(0.9);
  Real beta2 = Real(0.999);
  Real epsilon = Real(1e-8);
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  AdamState() = default;

  AdamState(const std::vector<NodePtr>& params, Real lr) : learning_rate(lr) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const auto& p : params) {
      m.push_back(Tensor::zeros(p->value.rows, p->value.cols));
      v.push_back(Tensor::zeros(p->value.rows, p->value.cols));
    }
  }
};

inline Real global_grad_norm(const std::vector<NodePtr>& params) {
  Real sq = 0;
  for (const auto& p : params) {
    if (!p->grad.same_shape(p->value)) continue;
    for (Real g : p->grad.data) sq += g * g;
  }
  return std::sqrt(sq);
}

// Global-norm clipping; no-op when the norm is within max_norm.
inline void clip_gradients(const std::vector<NodePtr>& params, Real max_norm) {
  const Real norm = global_grad_norm(params);
  if (norm <= max_norm || norm == Real(0)) return;
  const Real k = max_norm / norm;
  for (const auto& p : params) {
    if (!p->grad.same_shape(p->value)) continue;
    for (auto& g : p->grad.data) g *= k;
  }
}

// One Adam update from the gradients stored in the parameter nodes.
// Throws DivergenceError on non-finite gradients; verifies the updated
// parameters are finite.
inline void adam_step(const std::vector<NodePtr>& params, AdamState& state) {
  if (params.size() != state.m.size())
    throw ValidationError("adam_step: parameter list does not match optimizer state");
  for (const auto& p : params) {
    if (!p->grad.same_shape(p->value)) p->ensure_grad();
    if (!p->grad.all_finite())
      throw DivergenceError("adam_step: non-finite gradient at step " + std::to_string(state.step + 1));
  }
  state.step += 1;
  const Real b1t = Real(1) - std::pow(state.beta1, static_cast<Real>(state.step));
  const Real b2t = Real(1) - std::pow(state.beta2, static_cast<Real>(state.step));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& theta = params[pi]->value;
    const Tensor& g = params[pi]->grad;
    Tensor& m = state.m[pi];
    Tensor& v = state.v[pi];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m.data[i] = state.beta1 * m.data[i] + (Real(1) - state.beta1) * g.data[i];
      v.data[i] = state.beta2 * v.data[i] + (Real(1) - state.beta2) * g.data[i] * g.data[i];
      const Real mhat = m.data[i] / b1t;
      const Real vhat = v.data[i] / b2t;
      theta.data[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
    if (!theta.all_finite())
      throw DivergenceError("adam_step: non-finite parameter after step " + std::to_string(state.step));
  }
}

}  // namespace riskstream
