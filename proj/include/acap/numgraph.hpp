// SPDX-License-Identifier: Apache-2.0
//
// Small dense tensor library with a reverse-mode tape. Tensors are rank 0-2,
// 64-bit, row-major. Every op computes its value eagerly and, when the tape
// is recording and some input needs a gradient, appends a backward closure.
// Backward walks the tape once in reverse creation order.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace acap::ng {

class Tensor {
 public:
  Tensor() = default;
  /// Rank follows the number of dims given (0, 1 or 2).
  explicit Tensor(std::initializer_list<std::size_t> dims, double fill = 0.0);
  Tensor(std::span<const std::size_t> dims, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);
  static Tensor zeros_like(const Tensor& t);

  std::size_t rank() const { return rank_; }
  std::span<const std::size_t> shape() const { return {dims_.data(), rank_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  /// Rank-1 tensors read as a single row.
  std::size_t rows() const { return rank_ == 2 ? dims_[0] : 1; }
  std::size_t cols() const { return rank_ == 2 ? dims_[1] : (rank_ == 1 ? dims_[0] : 1); }
  bool same_shape(const Tensor& other) const;
  std::string shape_string() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  std::size_t rank_ = 0;
  std::array<std::size_t, 2> dims_{0, 0};
  std::vector<double> data_;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

class Tape {
 public:
  /// Receives the gradient flowing into this node and the node's own value.
  using Backward = std::function<void(Tape&, const Tensor& grad_out, const Tensor& out)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  /// Value without gradient tracking.
  Var constant(Tensor value);
  /// Owned value that collects a gradient.
  Var leaf(Tensor value);
  /// Borrowed value that collects a gradient; `value` must outlive the tape.
  Var parameter(const Tensor& value);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  /// Gradient of the last backward() output with respect to `v`; zeros if
  /// no path reached it.
  Tensor grad(Var v) const;

  /// Reverse pass from a single-element output, seeded with 1.
  void backward(Var output);

  /// Appends an op result. `back` is kept only when recording and at least
  /// one input requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward back);
  Var record(Tensor value, std::span<const Var> inputs, Backward back);

  /// Mutable gradient accumulator for an input, allocated on first use.
  /// Returns nullptr when `v` does not require a gradient.
  Tensor* grad_slot(Var v);

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    bool requires_grad = false;
    Backward back;
    const Tensor& value() const { return external ? *external : owned; }
  };

  std::deque<Node> nodes_;
  std::vector<Tensor> grads_;
  bool record_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

// ---- ops -------------------------------------------------------------------

/// Matrix product; rank-1 operands read as a row (lhs) or as-is.
Var matmul(Var a, Var b);

/// Elementwise binary ops: shapes must match exactly or one side holds a
/// single element.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

/// a (m x n) + bias broadcast to every row; bias holds n elements.
Var add_row(Var a, Var bias);

Var scale(Var a, double factor);
Var tanh(Var a);
Var sigmoid(Var a);
Var log(Var a);

enum class Elementwise { Tanh, Sigmoid, Add, Mul };
Var elementwise(Elementwise kind, std::span<const Var> inputs);

/// Numerically stable softmax over each row.
Var softmax_rows(Var a);

Var sum(Var a);
Var mean(Var a);

/// Row r as a 1 x n tensor.
Var row(Var a, std::size_t r);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var stack_rows(std::span<const Var> rows);
Var concat_cols(Var a, Var b);
Var reshape(Var a, std::size_t rows, std::size_t cols);

/// gate * prev + (1 - gate) * candidate, elementwise.
Var gate_blend(Var gate, Var prev, Var candidate);

/// Mean over rows of -ln(probs[i, targets[i]]).
Var nll(Var probs, std::span<const int> targets);

// ---- plain helpers ---------------------------------------------------------

/// Softmax of a vector without a tape.
std::vector<double> softmax(std::span<const double> x);

/// Central-difference check of a scalar function over a set of parameter
/// tensors. `fn` builds the scalar output on the given tape from one Var per
/// parameter. Returns max_i |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
/// Throws NumericError when any evaluation is not finite.
using ScalarFn = std::function<Var(Tape&, std::span<const Var> params)>;

/// ThreePoint: (f(x+h) - f(x-h)) / 2h. FivePoint: the fourth-order central
/// stencil, which keeps truncation error negligible at larger h.
enum class Stencil { ThreePoint, FivePoint };

double gradient_check(const ScalarFn& fn, std::vector<Tensor>& params, double eps = 1e-5,
                      Stencil stencil = Stencil::ThreePoint);

}  // namespace acap::ng
