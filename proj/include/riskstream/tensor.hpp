#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "riskstream/errors.hpp"
#include "riskstream/rng.hpp"

namespace riskstream {

// Dense row-major 2-D tensor. Scalars are 1x1, row vectors 1xk, column
// vectors kx1.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Real> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, Real(0)) {}

  static Tensor zeros(std::size_t r, std::size_t c) { return Tensor(r, c); }

  static Tensor full(std::size_t r, std::size_t c, Real v) {
    Tensor t(r, c);
    for (auto& x : t.data) x = v;
    return t;
  }

  static Tensor from_rows(std::size_t r, std::size_t c, std::vector<Real> values) {
    if (values.size() != r * c) throw ValidationError("tensor: data length does not match shape");
    Tensor t;
    t.rows = r;
    t.cols = c;
    t.data = std::move(values);
    return t;
  }

  // Entries uniform in (-scale, scale).
  static Tensor uniform(std::size_t r, std::size_t c, Real scale, Rng& rng) {
    Tensor t(r, c);
    for (auto& x : t.data) x = static_cast<Real>(rng.uniform(-scale, scale));
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::vector<std::size_t> shape() const { return {rows, cols}; }

  Real& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  Real at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  Real& operator[](std::size_t i) { return data[i]; }
  Real operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (Real x : data)
      if (!std::isfinite(x)) return false;
    return true;
  }

  void fill(Real v) {
    for (auto& x : data) x = v;
  }

  bool operator==(const Tensor& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }
};

inline std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

}  // namespace riskstream
