// Copyright 2026 The mapcast Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "numeric/tape.hpp"

#include "common/error.hpp"

namespace mapcast::nc {

ParameterSet::ParameterSet(const ParameterSet& other) {
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
}

ParameterSet& ParameterSet::operator=(const ParameterSet& other) {
  if (this != &other) {
    ParameterSet copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Parameter& ParameterSet::add(std::string name, Tensor init) {
  if (find(name)) throw_usage("duplicate parameter name '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->grad = Tensor(init.shape());
  p->value = std::move(init);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParameterSet::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterSet::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Parameter& ParameterSet::at(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw_data("no parameter named '" + std::string(name) + "'");
}

const Parameter& ParameterSet::at(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw_data("no parameter named '" + std::string(name) + "'");
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) std::fill(p->grad.storage().begin(), p->grad.storage().end(), 0.0);
}

void ParameterSet::assign_values(const ParameterSet& other) {
  if (other.size() != size()) throw_data("parameter sets differ in size");
  for (std::size_t i = 0; i < size(); ++i) {
    auto& dst = *params_[i];
    const auto& src = other[i];
    if (dst.name != src.name || dst.value.shape() != src.value.shape()) {
      throw_data("parameter '" + src.name + "' does not match '" + dst.name + "'");
    }
    dst.value = src.value;
  }
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn fn) {
  if (consumed_) throw_usage("tape already consumed by backward()");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(Tensor value) { return record(std::move(value), false, {}); }

Var Tape::leaf(Tensor value) { return record(std::move(value), true, {}); }

Var Tape::param(Parameter& p) {
  Var v = record(p.value, true, {});
  nodes_[v.id()].param = &p;
  return v;
}

std::span<double> Tape::grad_acc(std::uint32_t id) {
  auto& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::check_owner(Var v, const char* op) const {
  if (!v.valid() || &v.tape() != this) {
    throw_usage(std::string(op) + ": variable belongs to a different tape");
  }
}

void Tape::backward(Var loss) {
  if (consumed_) throw_usage("backward: tape already consumed");
  if (!loss.valid() || &loss.tape() != this) {
    throw_usage("backward: loss is detached from this tape");
  }
  if (loss.value().size() != 1) {
    throw_usage("backward: loss must be scalar, got shape " +
                shape_string(loss.shape()));
  }
  if (!nodes_[loss.id()].requires_grad) {
    throw_usage("backward: loss does not depend on any tracked tensor");
  }
  consumed_ = true;
  grad_acc(loss.id())[0] = 1.0;
  for (std::uint32_t id = loss.id() + 1; id-- > 0;) {
    auto& n = nodes_[id];
    if (n.grad.empty()) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param) {
      auto& g = n.param->grad.storage();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  }
}

Tensor Tape::grad(Var v) const {
  check_owner(v, "grad");
  const auto& n = nodes_[v.id()];
  if (n.grad.empty()) return Tensor(n.value.shape());
  return Tensor(n.value.shape(), n.grad);
}

}  // namespace mapcast::nc
