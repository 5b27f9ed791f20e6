// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "acap/errors.hpp"
#include "acap/numgraph.hpp"

namespace acap::ng {

Tensor::Tensor(std::initializer_list<std::size_t> dims, double fill) {
  if (dims.size() > 2) throw DimensionError("tensors are limited to rank 2");
  rank_ = dims.size();
  std::size_t n = 1;
  std::size_t i = 0;
  for (std::size_t d : dims) {
    dims_[i++] = d;
    n *= d;
  }
  data_.assign(n, fill);
}

Tensor::Tensor(std::span<const std::size_t> dims, std::vector<double> data) {
  if (dims.size() > 2) throw DimensionError("tensors are limited to rank 2");
  rank_ = dims.size();
  std::size_t n = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    dims_[i] = dims[i];
    n *= dims[i];
  }
  if (data.size() != n) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape product " + std::to_string(n));
  }
  data_ = std::move(data);
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.data_ = {v};
  return t;
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t d[1] = {v.size()};
  return Tensor(d, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  const std::size_t d[2] = {rows, cols};
  return Tensor(d, std::move(v));
}

Tensor Tensor::zeros_like(const Tensor& t) {
  Tensor z;
  z.rank_ = t.rank_;
  z.dims_ = t.dims_;
  z.data_.assign(t.data_.size(), 0.0);
  return z;
}

bool Tensor::same_shape(const Tensor& other) const {
  if (rank_ != other.rank_) return false;
  for (std::size_t i = 0; i < rank_; ++i) {
    if (dims_[i] != other.dims_[i]) return false;
  }
  return true;
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) s += "x";
    s += std::to_string(dims_[i]);
  }
  return s + "]";
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace acap::ng
