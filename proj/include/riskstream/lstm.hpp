#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "riskstream/graph.hpp"
#include "riskstream/rng.hpp"

namespace riskstream {

// Standard LSTM cell: sigmoid input/forget/output gates, tanh candidate and
// output squashing. Inputs and hidden states are 1xk row vectors.
struct LstmCell {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  // gate order: input, forget, output, candidate
  NodePtr wx_i, wh_i, b_i;
  NodePtr wx_f, wh_f, b_f;
  NodePtr wx_o, wh_o, b_o;
  NodePtr wx_c, wh_c, b_c;

  LstmCell() = default;

  LstmCell(std::size_t in, std::size_t hidden) : input_size(in), hidden_size(hidden) {
    auto zero_w = [&] { return parameter(Tensor::zeros(in, hidden)); };
    auto zero_u = [&] { return parameter(Tensor::zeros(hidden, hidden)); };
    auto zero_b = [&] { return parameter(Tensor::zeros(1, hidden)); };
    wx_i = zero_w(); wh_i = zero_u(); b_i = zero_b();
    wx_f = zero_w(); wh_f = zero_u(); b_f = zero_b();
    wx_o = zero_w(); wh_o = zero_u(); b_o = zero_b();
    wx_c = zero_w(); wh_c = zero_u(); b_c = zero_b();
  }

  // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
  void init(Rng& rng) {
    const Real sx = Real(1) / std::sqrt(static_cast<Real>(input_size));
    const Real sh = Real(1) / std::sqrt(static_cast<Real>(hidden_size));
    for (auto* w : {&wx_i, &wx_f, &wx_o, &wx_c})
      (*w)->value = Tensor::uniform(input_size, hidden_size, sx, rng);
    for (auto* w : {&wh_i, &wh_f, &wh_o, &wh_c})
      (*w)->value = Tensor::uniform(hidden_size, hidden_size, sh, rng);
  }

  std::vector<NodePtr> params() const {
    return {wx_i, wh_i, b_i, wx_f, wh_f, b_f, wx_o, wh_o, b_o, wx_c, wh_c, b_c};
  }
};

// Runs the recurrence over `inputs` (each 1 x input_size) with h0 = c0 = 0.
// Returns all hidden states (each 1 x hidden_size).
inline std::vector<NodePtr> lstm_forward(const LstmCell& cell, const std::vector<NodePtr>& inputs) {
  std::vector<NodePtr> hs;
  hs.reserve(inputs.size());
  NodePtr h = leaf(Tensor::zeros(1, cell.hidden_size));
  NodePtr c = leaf(Tensor::zeros(1, cell.hidden_size));
  for (const auto& x : inputs) {
    if (x->value.rows != 1 || x->value.cols != cell.input_size)
      throw ValidationError("lstm_forward: input shape " + shape_str(x->value) + " does not match input_size " +
                            std::to_string(cell.input_size));
    NodePtr i = sigmoid(add(add(matmul(x, cell.wx_i), matmul(h, cell.wh_i)), cell.b_i));
    NodePtr f = sigmoid(add(add(matmul(x, cell.wx_f), matmul(h, cell.wh_f)), cell.b_f));
    NodePtr o = sigmoid(add(add(matmul(x, cell.wx_o), matmul(h, cell.wh_o)), cell.b_o));
    NodePtr g = tanh_op(add(add(matmul(x, cell.wx_c), matmul(h, cell.wh_c)), cell.b_c));
    c = add(mul(f, c), mul(i, g));
    h = mul(o, tanh_op(c));
    hs.push_back(h);
  }
  return hs;
}

}  // namespace riskstream
