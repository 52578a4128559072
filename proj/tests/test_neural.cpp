#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "riskstream/adam.hpp"
#include "riskstream/checkpoint.hpp"
#include "riskstream/graph.hpp"
#include "riskstream/lstm.hpp"
#include "riskstream/rng.hpp"

using namespace riskstream;

TEST_CASE("softmax basic values") {
  auto uniform = softmax(leaf(Tensor::from_rows(1, 3, {0, 0, 0})));
  for (Real p : uniform->value.data) CHECK(p == Catch::Approx(1.0 / 3.0).epsilon(1e-15));

  auto stable = softmax(leaf(Tensor::from_rows(1, 2, {1000, 0})));
  CHECK(stable->value.data[0] == Catch::Approx(1.0));
  CHECK(stable->value.data[1] >= 0.0);
  CHECK(std::isfinite(stable->value.data[0]));

  // frozen from an arbitrary-precision evaluation of e^x_i / sum e^x_j
  auto p = softmax(leaf(Tensor::from_rows(1, 3, {1, 2, 3})));
  CHECK(p->value.data[0] == Catch::Approx(0.090030573170380458).margin(1e-15));
  CHECK(p->value.data[1] == Catch::Approx(0.24472847105479765).margin(1e-15));
  CHECK(p->value.data[2] == Catch::Approx(0.66524095577482189).margin(1e-15));
}

TEST_CASE("softmax sums to one and is permutation equivariant") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 8));
    Tensor v(1, n);
    for (auto& x : v.data) x = rng.uniform(-30, 30);
    auto p = softmax(leaf(v));
    Real sum = 0;
    for (Real x : p->value.data) {
      sum += x;
      CHECK(x > 0.0);
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-12);

    Tensor rev(1, n);
    for (std::size_t i = 0; i < n; ++i) rev.data[i] = v.data[n - 1 - i];
    auto q = softmax(leaf(rev));
    for (std::size_t i = 0; i < n; ++i)
      CHECK(q->value.data[i] == Catch::Approx(p->value.data[n - 1 - i]).margin(1e-15));
  }
}

TEST_CASE("cross entropy values and clamp") {
  auto certain = cross_entropy(leaf(Tensor::from_rows(1, 2, {0.0, 1.0})), 1);
  CHECK(certain->value.data[0] == Catch::Approx(0.0).margin(1e-15));

  auto half = cross_entropy(leaf(Tensor::from_rows(1, 2, {0.5, 0.5})), 0);
  CHECK(half->value.data[0] == Catch::Approx(0.69314718055994531).margin(1e-15));

  auto tiny = cross_entropy(leaf(Tensor::from_rows(1, 2, {1e-20, 1.0})), 0);
  CHECK(tiny->value.data[0] == Catch::Approx(27.631021115928548).margin(1e-12));
}

TEST_CASE("lstm zero parameters give zero hidden states") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    LstmCell cell(3, 4);  // all parameters zero by construction
    std::vector<NodePtr> inputs;
    for (int t = 0; t < 5; ++t) {
      Tensor x(1, 3);
      for (auto& v : x.data) v = rng.uniform(-2, 2);
      inputs.push_back(leaf(x));
    }
    auto hs = lstm_forward(cell, inputs);
    REQUIRE(hs.size() == 5);
    for (const auto& h : hs)
      for (Real v : h->value.data) CHECK(v == 0.0);
  }
}

TEST_CASE("lstm empty input gives empty output") {
  LstmCell cell(3, 4);
  CHECK(lstm_forward(cell, {}).empty());
}

TEST_CASE("lstm matches scalar oracle recurrence") {
  Rng rng(17);
  LstmCell cell(3, 4);
  cell.init(rng);
  std::vector<NodePtr> inputs;
  oracles::Mat xs;
  for (int t = 0; t < 3; ++t) {
    Tensor x(1, 3);
    oracles::Vec xv;
    for (auto& v : x.data) {
      v = rng.uniform(-1, 1);
      xv.push_back(v);
    }
    inputs.push_back(leaf(x));
    xs.push_back(xv);
  }
  auto hs = lstm_forward(cell, inputs);
  auto ref = oracles::lstm_ref_forward(oracles::lstm_ref_weights(cell), xs);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(hs[t]->value.data[j] == Catch::Approx(ref[t][j]).margin(1e-12));
}

TEST_CASE("lstm input shape mismatch is an error") {
  LstmCell cell(3, 4);
  std::vector<NodePtr> bad{leaf(Tensor::zeros(1, 2))};
  CHECK_THROWS_AS(lstm_forward(cell, bad), ValidationError);
}

TEST_CASE("backward of sum gives ones") {
  auto w = parameter(Tensor::from_rows(2, 3, {1, 2, 3, 4, 5, 6}));
  auto loss = sum_all(w);
  backward(loss);
  for (Real g : w->grad.data) CHECK(g == 1.0);
}

TEST_CASE("backward of zero-scaled loss gives zero gradient") {
  auto w = parameter(Tensor::from_rows(1, 3, {1, 2, 3}));
  auto loss = scale(sum_all(tanh_op(w)), 0.0);
  backward(loss);
  w->ensure_grad();
  for (Real g : w->grad.data) CHECK(g == 0.0);
}

TEST_CASE("backward rejects non-scalar loss") {
  auto w = parameter(Tensor::zeros(2, 2));
  CHECK_THROWS_AS(backward(tanh_op(w)), ValidationError);
}

TEST_CASE("gradients match finite differences per op") {
  Rng rng(23);
  for (int seed = 0; seed < 5; ++seed) {
    auto w = parameter(Tensor::uniform(3, 4, 0.8, rng));
    auto x = leaf(Tensor::uniform(1, 3, 0.8, rng));
    auto b = parameter(Tensor::uniform(1, 4, 0.8, rng));

    SECTION("affine + tanh, seed " + std::to_string(seed)) {
      auto build = [&] { return sum_all(tanh_op(add(matmul(x, w), b))); };
      CHECK(oracles::gradient_check({w, b}, build) < 1e-6);
    }
    SECTION("sigmoid + mul, seed " + std::to_string(seed)) {
      auto w2 = parameter(Tensor::uniform(1, 4, 0.8, rng));
      auto build = [&] { return sum_all(mul(sigmoid(add(matmul(x, w), b)), w2)); };
      CHECK(oracles::gradient_check({w, b, w2}, build) < 1e-6);
    }
    SECTION("softmax + cross entropy, seed " + std::to_string(seed)) {
      auto w3 = parameter(Tensor::uniform(4, 2, 0.8, rng));
      auto build = [&] { return cross_entropy(softmax(add(matmul(x, matmul(w, w3)), leaf(Tensor::zeros(1, 2)))), 1); };
      CHECK(oracles::gradient_check({w, w3}, build) < 1e-6);
    }
    SECTION("lstm step, seed " + std::to_string(seed)) {
      LstmCell cell(3, 3);
      cell.init(rng);
      std::vector<NodePtr> inputs;
      for (int t = 0; t < 3; ++t) inputs.push_back(leaf(Tensor::uniform(1, 3, 0.8, rng)));
      auto build = [&] {
        auto hs = lstm_forward(cell, inputs);
        return sum_all(stack_rows(hs));
      };
      CHECK(oracles::gradient_check(cell.params(), build) < 1e-6);
    }
  }
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
  auto w = parameter(Tensor::from_rows(2, 2, {1, 2, 3, 4}));
  const Tensor before = w->value;
  AdamState st({w}, 0.01);
  for (int i = 0; i < 3; ++i) {
    w->zero_grad();
    w->ensure_grad();
    adam_step({w}, st);
  }
  CHECK(w->value == before);
}

TEST_CASE("adam first step matches closed form") {
  // fresh state, gradient g: mhat = g, vhat = g^2, step = -lr * g / (|g| + eps)
  auto w = parameter(Tensor::from_rows(1, 3, {0.5, -1.5, 2.0}));
  const Tensor before = w->value;
  Tensor g = Tensor::from_rows(1, 3, {2.0, -0.25, 1e-3});
  w->ensure_grad();
  w->grad = g;
  AdamState st({w}, 0.001);
  adam_step({w}, st);
  for (std::size_t i = 0; i < 3; ++i) {
    const double expected = before.data[i] - 0.001 * g.data[i] / (std::fabs(g.data[i]) + 1e-8);
    CHECK(w->value.data[i] == Catch::Approx(expected).margin(1e-15));
  }
}

TEST_CASE("adam is deterministic") {
  Rng rng(3);
  auto w1 = parameter(Tensor::uniform(2, 3, 1.0, rng));
  auto w2 = parameter(w1->value);
  Tensor g = Tensor::uniform(2, 3, 1.0, rng);
  AdamState s1({w1}, 0.01), s2({w2}, 0.01);
  for (int i = 0; i < 5; ++i) {
    w1->ensure_grad();
    w1->grad = g;
    adam_step({w1}, s1);
    w2->ensure_grad();
    w2->grad = g;
    adam_step({w2}, s2);
  }
  CHECK(w1->value == w2->value);
}

TEST_CASE("adam per-coordinate step bound") {
  // First step from a fresh state, and any step under a constant gradient,
  // moves each coordinate by at most lr (up to epsilon slack).
  Rng rng(29);
  for (int seed = 0; seed < 20; ++seed) {
    auto w = parameter(Tensor::uniform(2, 4, 3.0, rng));
    Tensor g = Tensor::uniform(2, 4, 2.0, rng);
    AdamState st({w}, 0.001);
    Tensor prev = w->value;
    for (int step = 0; step < 20; ++step) {
      w->ensure_grad();
      w->grad = g;
      adam_step({w}, st);
      for (std::size_t i = 0; i < prev.size(); ++i)
        CHECK(std::fabs(w->value.data[i] - prev.data[i]) <= 0.001 * (1 + 1e-9));
      prev = w->value;
    }
  }
}

TEST_CASE("adam rejects NaN gradients") {
  auto w = parameter(Tensor::from_rows(1, 2, {1, 2}));
  w->ensure_grad();
  w->grad.data[0] = std::nan("");
  AdamState st({w}, 0.001);
  CHECK_THROWS_AS(adam_step({w}, st), DivergenceError);
}

TEST_CASE("gradient clipping caps the global norm") {
  auto w = parameter(Tensor::zeros(1, 4));
  w->ensure_grad();
  w->grad = Tensor::from_rows(1, 4, {6, 0, 0, 8});  // norm 10
  clip_gradients({w}, 5.0);
  CHECK(global_grad_norm({w}) == Catch::Approx(5.0).margin(1e-12));
  CHECK(w->grad.data[0] == Catch::Approx(3.0).margin(1e-12));
  CHECK(w->grad.data[3] == Catch::Approx(4.0).margin(1e-12));
}

TEST_CASE("checkpoint round-trip is exact") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    NamedTensors nt;
    const int count = static_cast<int>(rng.uniform_int(1, 5));
    for (int i = 0; i < count; ++i) {
      const auto r = static_cast<std::size_t>(rng.uniform_int(1, 6));
      const auto c = static_cast<std::size_t>(rng.uniform_int(1, 6));
      Tensor t(r, c);
      for (auto& x : t.data) x = rng.normal(0, 10);
      nt.put("tensor_" + std::to_string(i), t);
    }
    nt.meta["pad_len"] = 17;
    auto back = NamedTensors::from_json_string(nt.to_json_string());
    REQUIRE(back.tensors.size() == nt.tensors.size());
    for (const auto& [name, t] : nt.tensors) CHECK(back.get(name) == t);
    CHECK(back.meta["pad_len"] == 17);
  }
}
