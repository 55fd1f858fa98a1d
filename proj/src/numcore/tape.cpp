// Copyright 2026 The Duet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "duet/numcore/tape.hpp"

#include "duet/errors.hpp"

namespace duet::num {

const Matrix& Var::value() const { return tape_->value(*this); }
Matrix Var::grad() const { return tape_->grad(*this); }

Var Tape::variable(Matrix value) {
  if (!value.all_finite()) throw NumericalError("variable initialized with non-finite values");
  nodes_.push_back(Node{"variable", std::move(value), {}, true, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  if (!value.all_finite()) throw NumericalError("constant initialized with non-finite values");
  nodes_.push_back(Node{"constant", std::move(value), {}, false, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owner(const Var& v) const {
  if (v.tape_ != this) throw ShapeError("variable belongs to a different tape");
}

Var Tape::record(std::string op, Matrix value, std::vector<Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (const auto& in : inputs) {
    check_owner(in);
    needs = needs || nodes_[in.id()].requires_grad;
  }
  if (!value.all_finite()) throw NumericalError(op + ": produced non-finite values");
  nodes_.push_back(Node{std::move(op), std::move(value), {}, needs, false,
                        needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

Matrix Tape::grad(const Var& v) const {
  check_owner(v);
  const Node& n = nodes_.at(v.id());
  if (!n.has_grad) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(const Var& v, const Matrix& g) {
  check_owner(v);
  Node& n = nodes_.at(v.id());
  if (!n.requires_grad) return;
  if (!g.same_shape(n.value)) {
    throw ShapeError(n.op + ": gradient shape " + g.shape_string() + " does not match value " +
                     n.value.shape_string());
  }
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

void Tape::backward(const Var& output) {
  check_owner(output);
  if (output.value().rows() != 1 || output.value().cols() != 1) {
    throw ShapeError("backward() needs a scalar output, got " + output.value().shape_string());
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Matrix();
  }
  last_sweep_.clear();
  accumulate(output, Matrix::scalar(1.0));
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) continue;
    last_sweep_.push_back(id);
    // The callback may append to other nodes' gradients but never to its own.
    const Matrix g = n.grad;
    n.backward(*this, g);
  }
}

}  // namespace duet::num
