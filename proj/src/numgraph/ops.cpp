// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>

#include "acap/errors.hpp"
#include "acap/numgraph.hpp"
#include "acap/simd/kernels.hpp"

namespace acap::ng {
namespace {

Tensor like_2d(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                       b.shape_string());
}

enum class Broadcast { Same, LeftScalar, RightScalar };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b) {
  if (a.same_shape(b)) return Broadcast::Same;
  if (b.size() == 1) return Broadcast::RightScalar;
  if (a.size() == 1) return Broadcast::LeftScalar;
  shape_error(op, a, b);
}

// Sums a full-size gradient into either a matching slot or a scalar slot.
void reduce_into(Tensor& slot, const Tensor& full, double factor) {
  if (slot.size() == full.size()) {
    simd::axpy(factor, full.values(), slot.values());
  } else {
    double s = 0.0;
    for (double v : full.values()) s += v;
    slot[0] += factor * s;
  }
}

template <class F>
Tensor binary_values(const Tensor& a, const Tensor& b, Broadcast kind, F f) {
  const Tensor& shape = kind == Broadcast::LeftScalar ? b : a;
  Tensor out = Tensor::zeros_like(shape);
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = kind == Broadcast::LeftScalar ? a[0] : a[i];
    const double y = kind == Broadcast::RightScalar ? b[0] : b[i];
    out[i] = f(x, y);
  }
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) shape_error("matmul", av, bv);
  Tensor out = like_2d(m, n);
  const auto& kt = simd::kernels();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = out.data() + i * n;
    const double* arow = av.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) kt.axpy(arow[p], bv.data() + p * n, crow, n);
  }
  return a.tape().record(std::move(out), {a, b}, [a, b, m, k, n](Tape& tape, const Tensor& g, const Tensor&) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const auto& kt = simd::kernels();
    if (Tensor* ga = tape.grad_slot(a)) {
      // dA = G * B^T
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data() + i * n;
        double* garow = ga->data() + i * k;
        for (std::size_t p = 0; p < k; ++p) garow[p] += kt.dot(grow, bv.data() + p * n, n);
      }
    }
    if (Tensor* gb = tape.grad_slot(b)) {
      // dB = A^T * G
      for (std::size_t i = 0; i < m; ++i) {
        const double* arow = av.data() + i * k;
        const double* grow = g.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) kt.axpy(arow[p], grow, gb->data() + p * n, n);
      }
    }
  });
}

Var add(Var a, Var b) {
  const Broadcast kind = broadcast_kind("add", a.value(), b.value());
  Tensor out = binary_values(a.value(), b.value(), kind, [](double x, double y) { return x + y; });
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tape, const Tensor& g, const Tensor&) {
    if (Tensor* ga = tape.grad_slot(a)) reduce_into(*ga, g, 1.0);
    if (Tensor* gb = tape.grad_slot(b)) reduce_into(*gb, g, 1.0);
  });
}

Var sub(Var a, Var b) {
  const Broadcast kind = broadcast_kind("sub", a.value(), b.value());
  Tensor out = binary_values(a.value(), b.value(), kind, [](double x, double y) { return x - y; });
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tape, const Tensor& g, const Tensor&) {
    if (Tensor* ga = tape.grad_slot(a)) reduce_into(*ga, g, 1.0);
    if (Tensor* gb = tape.grad_slot(b)) reduce_into(*gb, g, -1.0);
  });
}

Var mul(Var a, Var b) {
  const Broadcast kind = broadcast_kind("mul", a.value(), b.value());
  Tensor out = binary_values(a.value(), b.value(), kind, [](double x, double y) { return x * y; });
  return a.tape().record(std::move(out), {a, b}, [a, b, kind](Tape& tape, const Tensor& g, const Tensor&) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (Tensor* ga = tape.grad_slot(a)) {
      const Tensor prod = binary_values(g, bv, kind == Broadcast::RightScalar ? Broadcast::RightScalar : Broadcast::Same,
                                        [](double x, double y) { return x * y; });
      reduce_into(*ga, prod, 1.0);
    }
    if (Tensor* gb = tape.grad_slot(b)) {
      const Tensor prod = binary_values(g, av, kind == Broadcast::LeftScalar ? Broadcast::RightScalar : Broadcast::Same,
                                        [](double x, double y) { return x * y; });
      reduce_into(*gb, prod, 1.0);
    }
  });
}

Var add_row(Var a, Var bias) {
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  if (bv.size() != av.cols()) shape_error("add_row", av, bv);
  Tensor out = av;
  const std::size_t n = av.cols();
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double* row = out.data() + r * n;
    for (std::size_t c = 0; c < n; ++c) row[c] += bv[c];
  }
  return a.tape().record(std::move(out), {a, bias}, [a, bias, n](Tape& tape, const Tensor& g, const Tensor&) {
    if (Tensor* ga = tape.grad_slot(a)) simd::axpy(1.0, g.values(), ga->values());
    if (Tensor* gb = tape.grad_slot(bias)) {
      for (std::size_t r = 0; r < g.rows(); ++r) simd::axpy(1.0, g.row(r), gb->values().first(n));
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  return a.tape().record(std::move(out), {a}, [a, factor](Tape& tape, const Tensor& g, const Tensor&) {
    if (Tensor* ga = tape.grad_slot(a)) simd::axpy(factor, g.values(), ga->values());
  });
}

Var tanh(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = std::tanh(v);
  return a.tape().record(std::move(out), {a}, [a](Tape& tape, const Tensor& g, const Tensor& y) {
    Tensor* ga = tape.grad_slot(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var sigmoid(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
  return a.tape().record(std::move(out), {a}, [a](Tape& tape, const Tensor& g, const Tensor& y) {
    Tensor* ga = tape.grad_slot(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var log(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = std::log(v);
  return a.tape().record(std::move(out), {a}, [a](Tape& tape, const Tensor& g, const Tensor&) {
    const Tensor& x = a.value();
    Tensor* ga = tape.grad_slot(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] / x[i];
  });
}

Var elementwise(Elementwise kind, std::span<const Var> inputs) {
  const std::size_t need = (kind == Elementwise::Tanh || kind == Elementwise::Sigmoid) ? 1 : 2;
  if (inputs.size() != need) {
    throw DimensionError("elementwise op expects " + std::to_string(need) + " inputs");
  }
  switch (kind) {
    case Elementwise::Tanh:
      return tanh(inputs[0]);
    case Elementwise::Sigmoid:
      return sigmoid(inputs[0]);
    case Elementwise::Add:
      return add(inputs[0], inputs[1]);
    case Elementwise::Mul:
      return mul(inputs[0], inputs[1]);
  }
  throw DimensionError("unknown elementwise op");
}

Var softmax_rows(Var a) {
  const Tensor& av = a.value();
  if (av.size() == 0) throw DimensionError("softmax of an empty tensor");
  Tensor out = av;
  const std::size_t n = av.cols();
  for (std::size_t r = 0; r < av.rows(); ++r) {
    std::span<double> row = out.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return a.tape().record(std::move(out), {a}, [a, n](Tape& tape, const Tensor& g, const Tensor& y) {
    Tensor* ga = tape.grad_slot(a);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const double* yr = y.data() + r * n;
      const double* gr = g.data() + r * n;
      double inner = 0.0;
      for (std::size_t c = 0; c < n; ++c) inner += gr[c] * yr[c];
      double* out = ga->data() + r * n;
      for (std::size_t c = 0; c < n; ++c) out[c] += yr[c] * (gr[c] - inner);
    }
  });
}

std::vector<double> softmax(std::span<const double> x) {
  if (x.empty()) throw DimensionError("softmax of an empty vector");
  std::vector<double> out(x.begin(), x.end());
  const double mx = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape().record(Tensor::scalar(s), {a}, [a](Tape& tape, const Tensor& g, const Tensor&) {
    Tensor* ga = tape.grad_slot(a);
    for (double& v : ga->values()) v += g[0];
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean of an empty tensor");
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape().record(Tensor::scalar(s / static_cast<double>(n)), {a},
                         [a, n](Tape& tape, const Tensor& g, const Tensor&) {
                           Tensor* ga = tape.grad_slot(a);
                           const double share = g[0] / static_cast<double>(n);
                           for (double& v : ga->values()) v += share;
                         });
}

Var row(Var a, std::size_t r) { return slice_rows(a, r, 1); }

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Tensor& av = a.value();
  if (begin + count > av.rows()) {
    throw DimensionError("slice_rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + av.shape_string());
  }
  const std::size_t n = av.cols();
  Tensor out = like_2d(count, n);
  std::copy_n(av.data() + begin * n, count * n, out.data());
  return a.tape().record(std::move(out), {a}, [a, begin, n](Tape& tape, const Tensor& g, const Tensor&) {
    Tensor* ga = tape.grad_slot(a);
    simd::axpy(1.0, g.values(), ga->values().subspan(begin * n, g.size()));
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack_rows needs at least one input");
  const std::size_t n = rows[0].value().cols();
  std::size_t total = 0;
  for (const Var& r : rows) {
    if (r.value().cols() != n) shape_error("stack_rows", rows[0].value(), r.value());
    total += r.value().rows();
  }
  Tensor out = like_2d(total, n);
  std::size_t offset = 0;
  for (const Var& r : rows) {
    const Tensor& rv = r.value();
    std::copy_n(rv.data(), rv.size(), out.data() + offset);
    offset += rv.size();
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return rows[0].tape().record(std::move(out), rows, [inputs](Tape& tape, const Tensor& g, const Tensor&) {
    std::size_t offset = 0;
    for (const Var& r : inputs) {
      const std::size_t sz = r.value().size();
      if (Tensor* gr = tape.grad_slot(r)) simd::axpy(1.0, g.values().subspan(offset, sz), gr->values());
      offset += sz;
    }
  });
}

Var concat_cols(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows()) shape_error("concat_cols", av, bv);
  const std::size_t m = av.rows(), na = av.cols(), nb = bv.cols();
  Tensor out = like_2d(m, na + nb);
  for (std::size_t r = 0; r < m; ++r) {
    std::copy_n(av.data() + r * na, na, out.data() + r * (na + nb));
    std::copy_n(bv.data() + r * nb, nb, out.data() + r * (na + nb) + na);
  }
  return a.tape().record(std::move(out), {a, b}, [a, b, m, na, nb](Tape& tape, const Tensor& g, const Tensor&) {
    Tensor* ga = tape.grad_slot(a);
    Tensor* gb = tape.grad_slot(b);
    for (std::size_t r = 0; r < m; ++r) {
      const double* gr = g.data() + r * (na + nb);
      if (ga) simd::kernels().axpy(1.0, gr, ga->data() + r * na, na);
      if (gb) simd::kernels().axpy(1.0, gr + na, gb->data() + r * nb, nb);
    }
  });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  const Tensor& av = a.value();
  if (rows * cols != av.size()) {
    throw DimensionError("reshape of " + av.shape_string() + " to " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  std::vector<double> data(av.values().begin(), av.values().end());
  Tensor out = Tensor::matrix(rows, cols, std::move(data));
  return a.tape().record(std::move(out), {a}, [a](Tape& tape, const Tensor& g, const Tensor&) {
    simd::axpy(1.0, g.values(), tape.grad_slot(a)->values());
  });
}

Var gate_blend(Var gate, Var prev, Var candidate) {
  const Tensor& z = gate.value();
  const Tensor& h = prev.value();
  const Tensor& c = candidate.value();
  if (!z.same_shape(h)) shape_error("gate_blend", z, h);
  if (!z.same_shape(c)) shape_error("gate_blend", z, c);
  Tensor out = Tensor::zeros_like(z);
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * h[i] + (1.0 - z[i]) * c[i];
  return gate.tape().record(std::move(out), {gate, prev, candidate},
                            [gate, prev, candidate](Tape& tape, const Tensor& g, const Tensor&) {
                              const Tensor& z = gate.value();
                              const Tensor& h = prev.value();
                              const Tensor& c = candidate.value();
                              if (Tensor* gz = tape.grad_slot(gate)) {
                                for (std::size_t i = 0; i < g.size(); ++i) (*gz)[i] += g[i] * (h[i] - c[i]);
                              }
                              if (Tensor* gh = tape.grad_slot(prev)) {
                                for (std::size_t i = 0; i < g.size(); ++i) (*gh)[i] += g[i] * z[i];
                              }
                              if (Tensor* gc = tape.grad_slot(candidate)) {
                                for (std::size_t i = 0; i < g.size(); ++i) (*gc)[i] += g[i] * (1.0 - z[i]);
                              }
                            });
}

Var nll(Var probs, std::span<const int> targets) {
  const Tensor& p = probs.value();
  if (targets.size() != p.rows()) {
    throw DimensionError("nll: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(p.rows()) + " rows");
  }
  const std::size_t n = p.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= n) {
      throw DimensionError("nll: target index " + std::to_string(targets[i]) + " out of range [0, " +
                           std::to_string(n) + ")");
    }
    total -= std::log(p.at(i, static_cast<std::size_t>(targets[i])));
  }
  const double steps = static_cast<double>(targets.size());
  std::vector<int> tgt(targets.begin(), targets.end());
  return probs.tape().record(Tensor::scalar(total / steps), {probs},
                             [probs, tgt, steps](Tape& tape, const Tensor& g, const Tensor&) {
                               const Tensor& p = probs.value();
                               Tensor* gp = tape.grad_slot(probs);
                               for (std::size_t i = 0; i < tgt.size(); ++i) {
                                 const auto c = static_cast<std::size_t>(tgt[i]);
                                 gp->at(i, c) -= g[0] / (steps * p.at(i, c));
                               }
                             });
}

}  // namespace acap::ng
