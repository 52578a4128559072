#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "riskstream/errors.hpp"
#include "riskstream/tensor.hpp"

namespace riskstream {

// Reverse-mode tape node. Forward ops build a DAG of these; backward() walks
// it once in reverse topological order. Parameters are long-lived nodes whose
// grad the optimizer reads.
struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& ensure_grad() {
    if (!grad.same_shape(value)) grad = Tensor::zeros(value.rows, value.cols);
    return grad;
  }

  void accumulate(const Tensor& g) {
    Tensor& dst = ensure_grad();
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += g.data[i];
  }

  void zero_grad() {
    if (grad.same_shape(value)) grad.fill(Real(0));
  }
};

using NodePtr = std::shared_ptr<Node>;

inline NodePtr leaf(Tensor value, bool requires_grad = false) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

inline NodePtr parameter(Tensor value) { return leaf(std::move(value), true); }

inline NodePtr make_op(Tensor value, std::vector<NodePtr> parents,
                       std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return n;
}

// C = A * B
inline NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (A.cols != B.rows)
    throw ValidationError("matmul: shape mismatch " + shape_str(A) + " * " + shape_str(B));
  Tensor C = Tensor::zeros(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = 0; k < A.cols; ++k) {
      const Real aik = A.at(i, k);
      if (aik == Real(0)) continue;
      const Real* brow = &B.data[k * B.cols];
      Real* crow = &C.data[i * C.cols];
      for (std::size_t j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
    }
  return make_op(std::move(C), {a, b}, [](Node& self) {
    const auto& a = self.parents[0];
    const auto& b = self.parents[1];
    const Tensor& A = a->value;
    const Tensor& B = b->value;
    const Tensor& dC = self.grad;
    if (a->requires_grad) {
      Tensor& dA = a->ensure_grad();
      for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < B.cols; ++j) {
          const Real g = dC.at(i, j);
          if (g == Real(0)) continue;
          const Real* brow = &B.data[0];
          for (std::size_t k = 0; k < A.cols; ++k) dA.at(i, k) += g * brow[k * B.cols + j];
        }
    }
    if (b->requires_grad) {
      Tensor& dB = b->ensure_grad();
      for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t k = 0; k < A.cols; ++k) {
          const Real aik = A.at(i, k);
          if (aik == Real(0)) continue;
          const Real* grow = &dC.data[i * dC.cols];
          Real* brow = &dB.data[k * dB.cols];
          for (std::size_t j = 0; j < B.cols; ++j) brow[j] += aik * grow[j];
        }
    }
  });
}

// A + B with row (1xc) and scalar (1x1) broadcasting of B.
inline NodePtr add(const NodePtr& a, const NodePtr& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  enum class Mode { full, row, scalar };
  Mode mode;
  if (A.same_shape(B)) {
    mode = Mode::full;
  } else if (B.rows == 1 && B.cols == A.cols) {
    mode = Mode::row;
  } else if (B.rows == 1 && B.cols == 1) {
    mode = Mode::scalar;
  } else {
    throw ValidationError("add: shape mismatch " + shape_str(A) + " + " + shape_str(B));
  }
  Tensor C = A;
  switch (mode) {
    case Mode::full:
      for (std::size_t i = 0; i < C.size(); ++i) C.data[i] += B.data[i];
      break;
    case Mode::row:
      for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) C.at(i, j) += B.data[j];
      break;
    case Mode::scalar:
      for (auto& x : C.data) x += B.data[0];
      break;
  }
  return make_op(std::move(C), {a, b}, [mode](Node& self) {
    const auto& a = self.parents[0];
    const auto& b = self.parents[1];
    const Tensor& dC = self.grad;
    if (a->requires_grad) a->accumulate(dC);
    if (b->requires_grad) {
      Tensor& dB = b->ensure_grad();
      switch (mode) {
        case Mode::full:
          for (std::size_t i = 0; i < dC.size(); ++i) dB.data[i] += dC.data[i];
          break;
        case Mode::row:
          for (std::size_t i = 0; i < dC.rows; ++i)
            for (std::size_t j = 0; j < dC.cols; ++j) dB.data[j] += dC.at(i, j);
          break;
        case Mode::scalar:
          for (Real g : dC.data) dB.data[0] += g;
          break;
      }
    }
  });
}

// Elementwise product.
inline NodePtr mul(const NodePtr& a, const NodePtr& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (!A.same_shape(B))
    throw ValidationError("mul: shape mismatch " + shape_str(A) + " * " + shape_str(B));
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] *= B.data[i];
  return make_op(std::move(C), {a, b}, [](Node& self) {
    const auto& a = self.parents[0];
    const auto& b = self.parents[1];
    const Tensor& dC = self.grad;
    if (a->requires_grad) {
      Tensor& dA = a->ensure_grad();
      for (std::size_t i = 0; i < dC.size(); ++i) dA.data[i] += dC.data[i] * b->value.data[i];
    }
    if (b->requires_grad) {
      Tensor& dB = b->ensure_grad();
      for (std::size_t i = 0; i < dC.size(); ++i) dB.data[i] += dC.data[i] * a->value.data[i];
    }
  });
}

inline NodePtr scale(const NodePtr& a, Real k) {
  Tensor C = a->value;
  for (auto& x : C.data) x *= k;
  return make_op(std::move(C), {a}, [k](Node& self) {
    const auto& a = self.parents[0];
    if (!a->requires_grad) return;
    Tensor& dA = a->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) dA.data[i] += k * self.grad.data[i];
  });
}

inline NodePtr sigmoid(const NodePtr& a) {
  Tensor C = a->value;
  for (auto& x : C.data) x = Real(1) / (Real(1) + std::exp(-x));
  return make_op(std::move(C), {a}, [](Node& self) {
    const auto& a = self.parents[0];
    if (!a->requires_grad) return;
    Tensor& dA = a->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const Real s = self.value.data[i];
      dA.data[i] += self.grad.data[i] * s * (Real(1) - s);
    }
  });
}

inline NodePtr tanh_op(const NodePtr& a) {
  Tensor C = a->value;
  for (auto& x : C.data) x = std::tanh(x);
  return make_op(std::move(C), {a}, [](Node& self) {
    const auto& a = self.parents[0];
    if (!a->requires_grad) return;
    Tensor& dA = a->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const Real t = self.value.data[i];
      dA.data[i] += self.grad.data[i] * (Real(1) - t * t);
    }
  });
}

// Single distribution over all entries; max-subtracted for stability.
inline NodePtr softmax(const NodePtr& a) {
  const Tensor& A = a->value;
  if (A.size() == 0) throw ValidationError("softmax: empty input");
  Tensor C = A;
  Real mx = C.data[0];
  for (Real x : C.data) mx = std::max(mx, x);
  Real sum = 0;
  for (auto& x : C.data) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (auto& x : C.data) x /= sum;
  return make_op(std::move(C), {a}, [](Node& self) {
    const auto& a = self.parents[0];
    if (!a->requires_grad) return;
    const Tensor& p = self.value;
    const Tensor& dC = self.grad;
    Real dot = 0;
    for (std::size_t i = 0; i < p.size(); ++i) dot += dC.data[i] * p.data[i];
    Tensor& dA = a->ensure_grad();
    for (std::size_t i = 0; i < p.size(); ++i) dA.data[i] += p.data[i] * (dC.data[i] - dot);
  });
}

inline NodePtr transpose(const NodePtr& a) {
  const Tensor& A = a->value;
  Tensor C = Tensor::zeros(A.cols, A.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) C.at(j, i) = A.at(i, j);
  return make_op(std::move(C), {a}, [](Node& self) {
    const auto& a = self.parents[0];
    if (!a->requires_grad) return;
    Tensor& dA = a->ensure_grad();
    const Tensor& dC = self.grad;
    for (std::size_t i = 0; i < dC.rows; ++i)
      for (std::size_t j = 0; j < dC.cols; ++j) dA.at(j, i) += dC.at(i, j);
  });
}

// Concatenate two row vectors: 1xA ++ 1xB -> 1x(A+B).
inline NodePtr concat_cols(const NodePtr& a, const NodePtr& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (A.rows != 1 || B.rows != 1)
    throw ValidationError("concat_cols: expects row vectors, got " + shape_str(A) + " and " + shape_str(B));
  Tensor C = Tensor::zeros(1, A.cols + B.cols);
  std::copy(A.data.begin(), A.data.end(), C.data.begin());
  std::copy(B.data.begin(), B.data.end(), C.data.begin() + static_cast<std::ptrdiff_t>(A.cols));
  const std::size_t na = A.cols;
  return make_op(std::move(C), {a, b}, [na](Node& self) {
    const auto& a = self.parents[0];
    const auto& b = self.parents[1];
    const Tensor& dC = self.grad;
    if (a->requires_grad) {
      Tensor& dA = a->ensure_grad();
      for (std::size_t j = 0; j < na; ++j) dA.data[j] += dC.data[j];
    }
    if (b->requires_grad) {
      Tensor& dB = b->ensure_grad();
      for (std::size_t j = 0; j < dC.cols - na; ++j) dB.data[j] += dC.data[na + j];
    }
  });
}

// Stack row vectors (each 1xc) into an n x c matrix.
inline NodePtr stack_rows(const std::vector<NodePtr>& rows) {
  if (rows.empty()) throw ValidationError("stack_rows: empty input");
  const std::size_t c = rows[0]->value.cols;
  Tensor C = Tensor::zeros(rows.size(), c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& R = rows[i]->value;
    if (R.rows != 1 || R.cols != c)
      throw ValidationError("stack_rows: row " + std::to_string(i) + " has shape " + shape_str(R));
    std::copy(R.data.begin(), R.data.end(), C.data.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  return make_op(std::move(C), rows, [c](Node& self) {
    const Tensor& dC = self.grad;
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      const auto& r = self.parents[i];
      if (!r->requires_grad) continue;
      Tensor& dR = r->ensure_grad();
      for (std::size_t j = 0; j < c; ++j) dR.data[j] += dC.data[i * c + j];
    }
  });
}

// Select row `idx` of a matrix as a 1xc vector (embedding lookup).
inline NodePtr select_row(const NodePtr& table, std::size_t idx) {
  const Tensor& T = table->value;
  if (idx >= T.rows) throw ValidationError("select_row: index out of range");
  Tensor C = Tensor::zeros(1, T.cols);
  std::copy(T.data.begin() + static_cast<std::ptrdiff_t>(idx * T.cols),
            T.data.begin() + static_cast<std::ptrdiff_t>((idx + 1) * T.cols), C.data.begin());
  return make_op(std::move(C), {table}, [idx](Node& self) {
    const auto& t = self.parents[0];
    if (!t->requires_grad) return;
    Tensor& dT = t->ensure_grad();
    const std::size_t c = dT.cols;
    for (std::size_t j = 0; j < c; ++j) dT.data[idx * c + j] += self.grad.data[j];
  });
}

inline NodePtr sum_all(const NodePtr& a) {
  Real s = 0;
  for (Real x : a->value.data) s += x;
  Tensor C = Tensor::full(1, 1, s);
  return make_op(std::move(C), {a}, [](Node& self) {
    const auto& a = self.parents[0];
    if (!a->requires_grad) return;
    Tensor& dA = a->ensure_grad();
    const Real g = self.grad.data[0];
    for (auto& x : dA.data) x += g;
  });
}

inline constexpr Real kProbFloor = Real(1e-12);

// -log p[label], with p clamped below at 1e-12. `probs` is a 2-entry
// distribution (any orientation).
inline NodePtr cross_entropy(const NodePtr& probs, int label) {
  const Tensor& P = probs->value;
  if (P.size() < 2) throw ValidationError("cross_entropy: need at least 2 probabilities");
  if (label < 0 || static_cast<std::size_t>(label) >= P.size())
    throw ValidationError("cross_entropy: label out of range");
  const Real p = P.data[static_cast<std::size_t>(label)];
  const Real loss = -std::log(std::max(p, kProbFloor));
  return make_op(Tensor::full(1, 1, loss), {probs}, [label](Node& self) {
    const auto& probs = self.parents[0];
    if (!probs->requires_grad) return;
    const Real p = probs->value.data[static_cast<std::size_t>(label)];
    if (p <= kProbFloor) return;  // clamped region is flat
    Tensor& dP = probs->ensure_grad();
    dP.data[static_cast<std::size_t>(label)] += self.grad.data[0] * (Real(-1) / p);
  });
}

// Reverse topological order from `root` (iterative; graphs get deep).
inline std::vector<Node*> topo_order(const NodePtr& root) {
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;  // parents before children; walk backwards to backprop
}

// Backpropagate from a scalar loss. Gradients accumulate into every
// requires_grad node reachable from it.
inline void backward(const NodePtr& loss) {
  if (loss->value.size() != 1)
    throw ValidationError("backward: loss must be scalar, got " + shape_str(loss->value));
  if (!loss->requires_grad) return;
  loss->ensure_grad().data[0] += Real(1);
  auto order = topo_order(loss);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.same_shape(n->value)) n->backward_fn(*n);
  }
}

inline void zero_grads(const std::vector<NodePtr>& params) {
  for (const auto& p : params) p->zero_grad();
}

}  // namespace riskstream
