#pragma once

// Test-only reference implementations, kept independent of the library's
// graph/backward machinery. These recompute the same math with plain loops
// so the two routes can be compared.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "riskstream/graph.hpp"
#include "riskstream/lstm.hpp"
#include "riskstream/tensor.hpp"

namespace oracles {

using riskstream::NodePtr;
using riskstream::Real;
using riskstream::Tensor;

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

inline Mat mat_from(const Tensor& t) {
  Mat m(t.rows, Vec(t.cols));
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) m[i][j] = t.at(i, j);
  return m;
}

inline Vec matvec_row(const Vec& x, const Mat& w) {  // (1 x a) * (a x b)
  Vec out(w[0].size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += x[k] * w[k][j];
  return out;
}

inline Vec softmax_ref(const Vec& v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  Vec out(v.size());
  double sum = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

inline double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmRefWeights {
  Mat wx_i, wh_i; Vec b_i;
  Mat wx_f, wh_f; Vec b_f;
  Mat wx_o, wh_o; Vec b_o;
  Mat wx_c, wh_c; Vec b_c;
};

inline LstmRefWeights lstm_ref_weights(const riskstream::LstmCell& cell) {
  LstmRefWeights w;
  w.wx_i = mat_from(cell.wx_i->value); w.wh_i = mat_from(cell.wh_i->value); w.b_i = mat_from(cell.b_i->value)[0];
  w.wx_f = mat_from(cell.wx_f->value); w.wh_f = mat_from(cell.wh_f->value); w.b_f = mat_from(cell.b_f->value)[0];
  w.wx_o = mat_from(cell.wx_o->value); w.wh_o = mat_from(cell.wh_o->value); w.b_o = mat_from(cell.b_o->value)[0];
  w.wx_c = mat_from(cell.wx_c->value); w.wh_c = mat_from(cell.wh_c->value); w.b_c = mat_from(cell.b_c->value)[0];
  return w;
}

// Step-by-step scalar recurrence; h0 = c0 = 0.
inline Mat lstm_ref_forward(const LstmRefWeights& w, const Mat& inputs) {
  const std::size_t hidden = w.b_i.size();
  Vec h(hidden, 0.0), c(hidden, 0.0);
  Mat hs;
  for (const Vec& x : inputs) {
    Vec zi = matvec_row(x, w.wx_i), zf = matvec_row(x, w.wx_f);
    Vec zo = matvec_row(x, w.wx_o), zc = matvec_row(x, w.wx_c);
    Vec hi = matvec_row(h, w.wh_i), hf = matvec_row(h, w.wh_f);
    Vec ho = matvec_row(h, w.wh_o), hc = matvec_row(h, w.wh_c);
    Vec nh(hidden), nc(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
      const double ig = sigmoid_ref(zi[j] + hi[j] + w.b_i[j]);
      const double fg = sigmoid_ref(zf[j] + hf[j] + w.b_f[j]);
      const double og = sigmoid_ref(zo[j] + ho[j] + w.b_o[j]);
      const double cand = std::tanh(zc[j] + hc[j] + w.b_c[j]);
      nc[j] = fg * c[j] + ig * cand;
      nh[j] = og * std::tanh(nc[j]);
    }
    h = nh;
    c = nc;
    hs.push_back(h);
  }
  return hs;
}

// Central finite differences of `loss_fn` (which must rebuild the forward
// pass from current parameter values) with respect to one parameter tensor.
inline Tensor finite_difference(const std::function<double()>& loss_fn, Tensor& param,
                                double h = 1e-5) {
  Tensor grad = Tensor::zeros(param.rows, param.cols);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const Real orig = param.data[i];
    param.data[i] = orig + static_cast<Real>(h);
    const double up = loss_fn();
    param.data[i] = orig - static_cast<Real>(h);
    const double down = loss_fn();
    param.data[i] = orig;
    grad.data[i] = static_cast<Real>((up - down) / (2.0 * h));
  }
  return grad;
}

// rel err with unit floor: |a - n| / max(1, |a|, |n|)
inline double rel_err(double analytic, double numeric) {
  const double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
  return std::fabs(analytic - numeric) / denom;
}

// Max relative error between an analytic gradient tensor and its FD estimate.
inline double max_rel_err(const Tensor& analytic, const Tensor& numeric) {
  double worst = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, rel_err(analytic.data[i], numeric.data[i]));
  return worst;
}

// Checks every parameter of a model: rebuilds the loss via `loss_fn` for FD,
// and compares against gradients produced by one backward() call.
inline double gradient_check(const std::vector<NodePtr>& params,
                             const std::function<NodePtr()>& build_loss, double h = 1e-5) {
  riskstream::zero_grads(params);
  NodePtr loss = build_loss();
  riskstream::backward(loss);
  auto loss_value = [&]() { return static_cast<double>(build_loss()->value.data[0]); };
  double worst = 0;
  for (const auto& p : params) {
    p->ensure_grad();
    Tensor fd = finite_difference(loss_value, p->value, h);
    worst = std::max(worst, max_rel_err(p->grad, fd));
  }
  return worst;
}

}  // namespace oracles
