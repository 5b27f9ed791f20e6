// SPDX-License-Identifier: Apache-2.0
#include "acap/errors.hpp"
#include "acap/numgraph.hpp"

namespace acap::ng {

Var Tape::constant(Tensor value) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::leaf(Tensor value) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = record_;
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::parameter(const Tensor& value) {
  Node& n = nodes_.emplace_back();
  n.external = &value;
  n.requires_grad = record_;
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Tensor& Tape::value(Var v) const { return nodes_[v.id()].value(); }

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backward back) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(back));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backward back) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  if (record_) {
    for (const Var& in : inputs) {
      if (in.tape_ != this) throw DimensionError("op inputs live on different tapes");
      if (nodes_[in.id()].requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
    if (n.requires_grad) n.back = std::move(back);
  }
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Tensor* Tape::grad_slot(Var v) {
  if (!nodes_[v.id()].requires_grad || grads_.size() <= v.id()) return nullptr;
  Tensor& g = grads_[v.id()];
  if (g.empty() && nodes_[v.id()].value().size() != 0) g = Tensor::zeros_like(nodes_[v.id()].value());
  return &g;
}

Tensor Tape::grad(Var v) const {
  if (v.id() < grads_.size() && !grads_[v.id()].empty()) return grads_[v.id()];
  return Tensor::zeros_like(value(v));
}

void Tape::backward(Var output) {
  if (!record_) throw DimensionError("backward on a tape that does not record");
  if (value(output).size() != 1) {
    throw DimensionError("backward needs a single-element output, got " +
                         value(output).shape_string());
  }
  grads_.clear();
  grads_.resize(nodes_.size());
  if (!nodes_[output.id()].requires_grad) return;
  grads_[output.id()] = Tensor::zeros_like(value(output));
  grads_[output.id()][0] = 1.0;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.back || grads_[i].empty()) continue;
    n.back(*this, grads_[i], n.value());
  }
}

}  // namespace acap::ng
