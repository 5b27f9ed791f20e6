// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "acap/errors.hpp"
#include "acap/numgraph.hpp"
#include "support.hpp"

using namespace acap;
using namespace acap::ng;

TEST_CASE("tensor shapes") {
  const Tensor s = Tensor::scalar(2.0);
  CHECK(s.rank() == 0);
  CHECK(s.size() == 1);
  const Tensor v = Tensor::vector({1, 2, 3});
  CHECK(v.rows() == 1);
  CHECK(v.cols() == 3);
  const Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.at(1, 2) == 6.0);
  CHECK(m.shape_string() == "[2x3]");
  CHECK_FALSE(m.same_shape(v));
  CHECK_THROWS_AS(Tensor::matrix(2, 2, {1, 2, 3}), DimensionError);
}

TEST_CASE("matmul examples") {
  Tape tape(false);
  const Var a = tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  const Var b = tape.constant(Tensor::matrix(2, 1, {5, 6}));
  const Tensor c = matmul(a, b).value();
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 1);
  CHECK(c[0] == 17.0);
  CHECK(c[1] == 39.0);
  const Var eye = tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  CHECK(matmul(a, eye).value() == a.value());
  CHECK_THROWS_AS(matmul(b, b), DimensionError);
}

TEST_CASE("gradient of sum(a b) wrt a is the row sums of b") {
  std::mt19937_64 rng(1);
  const Tensor b = testing::random_tensor(3, 4, rng);
  Tape tape;
  const Var a = tape.leaf(testing::random_tensor(2, 3, rng));
  const Var bv = tape.constant(b);
  tape.backward(sum(matmul(a, bv)));
  const Tensor g = tape.grad(a);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      double row = 0.0;
      for (std::size_t j = 0; j < 4; ++j) row += b.at(k, j);
      CHECK(g.at(i, k) == doctest::Approx(row).epsilon(1e-14));
    }
  }
  std::vector<Tensor> params{testing::random_tensor(2, 3, rng)};
  const double err = gradient_check([&](Tape& t, std::span<const Var> p) { return sum(matmul(p[0], t.constant(b))); },
                                    params);
  CHECK(err < 1e-8);
}

TEST_CASE("elementwise values") {
  Tape tape(false);
  const Var z = tape.constant(Tensor::vector({0.0}));
  CHECK(tanh(z).value()[0] == 0.0);
  CHECK(sigmoid(z).value()[0] == 0.5);
  const Var x = tape.constant(Tensor::vector({1.5, -2.0}));
  CHECK(add(x, tape.constant(Tensor::vector({0.0, 0.0}))).value() == x.value());
  CHECK(add(x, tape.constant(Tensor::scalar(1.0))).value()[1] == -1.0);
  const std::vector<Var> in{x, x};
  CHECK(elementwise(Elementwise::Mul, in).value()[0] == 2.25);
  CHECK_THROWS_AS(add(x, tape.constant(Tensor::vector({1, 2, 3}))), DimensionError);
}

TEST_CASE("elementwise gradients match central differences") {
  std::mt19937_64 rng(2);
  for (Elementwise kind : {Elementwise::Tanh, Elementwise::Sigmoid, Elementwise::Add, Elementwise::Mul}) {
    const bool unary = kind == Elementwise::Tanh || kind == Elementwise::Sigmoid;
    std::vector<Tensor> params{testing::random_tensor(3, 4, rng)};
    if (!unary) params.push_back(testing::random_tensor(3, 4, rng));
    const Tensor w = testing::random_tensor(3, 4, rng);
    const double err = gradient_check(
        [&](Tape& t, std::span<const Var> p) {
          return sum(mul(elementwise(kind, p), t.constant(w)));
        },
        params);
    CHECK(err < 1e-6);
  }
}

TEST_CASE("softmax examples and properties") {
  const auto half = softmax(std::vector<double>{0.0, 0.0});
  CHECK(half[0] == 0.5);
  CHECK(half[1] == 0.5);
  const auto q = softmax(std::vector<double>{0.0, std::log(3.0)});
  CHECK(q[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(q[1] == doctest::Approx(0.75).epsilon(1e-14));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(1 + trial % 17);
    for (double& v : x) v = nd(rng);
    const auto p = softmax(x);
    auto shifted = x;
    for (double& v : shifted) v += 123.456;
    const auto ps = softmax(shifted);
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      total += p[i];
      CHECK(p[i] > 0.0);
      CHECK(p[i] < 1.0 + 1e-15);
      CHECK(std::abs(p[i] - ps[i]) < 1e-12);
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  const auto big = softmax(std::vector<double>{1000.0, 0.0});
  CHECK(std::isfinite(big[0]));
  CHECK(big[0] == doctest::Approx(1.0));
}

TEST_CASE("softmax_rows rows sum to one and gradient is correct") {
  std::mt19937_64 rng(4);
  Tape tape(false);
  const Tensor s = softmax_rows(tape.constant(testing::random_tensor(5, 7, rng, 3.0))).value();
  for (std::size_t r = 0; r < 5; ++r) {
    double total = 0.0;
    for (double v : s.row(r)) total += v;
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
  std::vector<Tensor> params{testing::random_tensor(3, 4, rng)};
  const Tensor w = testing::random_tensor(3, 4, rng);
  CHECK(gradient_check([&](Tape& t, std::span<const Var> p) { return sum(mul(softmax_rows(p[0]), t.constant(w))); },
                       params) < 1e-6);
}

TEST_CASE("gradient_check trivial functions") {
  std::vector<Tensor> zero{Tensor({4}, 0.0)};
  CHECK(gradient_check([](Tape&, std::span<const Var> p) { return sum(tanh(p[0])); }, zero) < 1e-8);
  std::mt19937_64 rng(5);
  std::vector<Tensor> lin{testing::random_tensor(2, 3, rng)};
  CHECK(gradient_check([](Tape&, std::span<const Var> p) { return sum(p[0]); }, lin) < 1e-9);
  std::vector<Tensor> bad{Tensor({2}, -1.0)};
  CHECK_THROWS_AS(gradient_check([](Tape&, std::span<const Var> p) { return sum(log(p[0])); }, bad), NumericError);
}

TEST_CASE("composed computations pass the gradient check") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Tensor> params{testing::random_tensor(3, 4, rng), testing::random_tensor(4, 2, rng),
                               testing::random_tensor(1, 2, rng), testing::random_tensor(1, 2, rng)};
    const std::vector<int> targets{1, 0, 1};
    const double err = gradient_check(
        [&](Tape&, std::span<const Var> p) {
          const Var h = tanh(add_row(matmul(p[0], p[1]), p[2]));
          const Var g = gate_blend(sigmoid(row(h, 0)), row(h, 1), p[3]);
          const Var stacked = stack_rows(std::vector<Var>{g, row(h, 2), mul(g, row(h, 1))});
          const Var probs = softmax_rows(concat_cols(slice_rows(stacked, 0, 3), scale(stacked, 0.5)));
          return add(nll(probs, targets), mean(reshape(h, 2, 3)));
        },
        params);
    CHECK(err < 1e-4);
    CHECK(gradient_check(
              [&](Tape&, std::span<const Var> p) { return sum(tanh(matmul(p[0], p[1]))); }, params, 1e-3,
              Stencil::FivePoint) < 1e-6);
  }
}

TEST_CASE("backward is linear in the loss") {
  std::mt19937_64 rng(7);
  const Tensor x0 = testing::random_tensor(2, 3, rng);
  const Tensor w = testing::random_tensor(3, 3, rng);
  auto grad_of = [&](int which) {
    Tape tape;
    const Var x = tape.leaf(x0);
    const Var wv = tape.constant(w);
    const Var f = sum(tanh(matmul(x, wv)));
    const Var g = mean(sigmoid(x));
    const Var out = which == 0 ? f : which == 1 ? g : add(f, g);
    tape.backward(out);
    return tape.grad(x);
  };
  const Tensor gf = grad_of(0), gg = grad_of(1), gs = grad_of(2);
  for (std::size_t i = 0; i < gs.size(); ++i) CHECK(gs[i] == doctest::Approx(gf[i] + gg[i]).epsilon(1e-14));
}

TEST_CASE("shared nodes accumulate gradients") {
  Tape tape;
  const Var x = tape.leaf(Tensor::vector({2.0}));
  tape.backward(sum(mul(x, x)));
  CHECK(tape.grad(x)[0] == 4.0);
}

TEST_CASE("unreached leaves get zero gradient; constants need none") {
  Tape tape;
  const Var x = tape.leaf(Tensor::vector({1.0, 2.0}));
  const Var y = tape.leaf(Tensor::vector({3.0}));
  const Var c = tape.constant(Tensor::vector({1.0, 1.0}));
  tape.backward(sum(mul(x, c)));
  CHECK(tape.grad(y)[0] == 0.0);
  CHECK_FALSE(tape.requires_grad(c));
  CHECK_THROWS(tape.backward(x));
}

TEST_CASE("no-grad tape records nothing") {
  Tape tape(false);
  const Tensor value = Tensor::vector({1.0, 2.0});
  const Var x = tape.parameter(value);
  const Var y = tanh(x);
  CHECK(y.value()[0] == doctest::Approx(std::tanh(1.0)));
  CHECK_FALSE(tape.recording());
}

TEST_CASE("nll matches hand computation and rejects bad targets") {
  Tape tape(false);
  const Var p = tape.constant(Tensor::matrix(2, 2, {0.25, 0.75, 0.5, 0.5}));
  const std::vector<int> t{1, 0};
  CHECK(nll(p, t).value()[0] == doctest::Approx((-std::log(0.75) - std::log(0.5)) / 2));
  const std::vector<int> bad{2, 0};
  CHECK_THROWS_AS(nll(p, bad), DimensionError);
}
