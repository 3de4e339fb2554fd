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

#pragma once

// Define-by-run reverse-mode differentiation. A Tape records every primitive
// evaluated during one forward pass; nodes are appended in evaluation order,
// which is already a topological order, so backward is a single reverse sweep.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "numeric/tensor.hpp"

namespace mapcast::nc {

class Tape;

/// Trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Named, insertion-ordered parameters. Addresses are stable.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet& other);
  ParameterSet& operator=(const ParameterSet& other);
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;

  Parameter& add(std::string name, Tensor init);
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }
  std::size_t scalar_count() const;
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();

  /// Copies values from another set with identical names and shapes.
  void assign_values(const ParameterSet& other);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Lightweight handle to a tape node.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t dim(std::size_t i) const { return value().dim(i); }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value with no gradient.
  Var constant(Tensor value);
  /// Gradient-tracked input; read its gradient with grad() after backward.
  Var leaf(Tensor value);
  /// Gradient-tracked parameter; backward adds into param.grad.
  Var param(Parameter& param);

  /// Propagates d(loss)/d(node) to every recorded node. The tape can be
  /// consumed once.
  void backward(Var loss);

  /// Gradient of a node after backward (zeros if the node got none).
  Tensor grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  // -- interface for primitive implementations --
  Var record(Tensor value, bool requires_grad, BackwardFn fn);
  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  /// Gradient flowing into node `id` (valid during backward of a consumer).
  std::span<const double> grad_of(std::uint32_t id) const { return nodes_[id].grad; }
  /// Mutable gradient accumulator for an input node, allocated on first use.
  std::span<double> grad_acc(std::uint32_t id);

  void check_owner(Var v, const char* op) const;

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

}  // namespace mapcast::nc
