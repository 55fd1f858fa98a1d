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


#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "duet/numcore/matrix.hpp"

namespace duet::num {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid as long as the
// tape it came from is alive.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  const Matrix& value() const;
  Matrix grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records primitive operations in forward order. backward() sweeps them in
// exact reverse order, accumulating gradients additively into every input.
class Tape {
 public:
  // Receives the gradient of the op output and pushes it into the op inputs
  // through Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(Matrix value);
  Var constant(Matrix value);

  // Appends an op node. The node requires a gradient iff any input does.
  Var record(std::string op, Matrix value, std::vector<Var> inputs, BackwardFn backward);

  const Matrix& value(const Var& v) const { return nodes_.at(v.id()).value; }
  // Gradient of the last backward() output with respect to v; zeros when v
  // received no gradient.
  Matrix grad(const Var& v) const;
  bool requires_grad(const Var& v) const { return nodes_.at(v.id()).requires_grad; }

  void accumulate(const Var& v, const Matrix& g);

  // Seeds d(output)/d(output) = 1 and sweeps. The output must be 1x1.
  void backward(const Var& output);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::string& op_name(std::size_t id) const { return nodes_.at(id).op; }
  // Node ids whose backward ran during the last sweep, in visit order.
  const std::vector<std::size_t>& last_sweep() const noexcept { return last_sweep_; }

 private:
  struct Node {
    std::string op;
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  void check_owner(const Var& v) const;

  std::deque<Node> nodes_;  // deque keeps value references stable
  std::vector<std::size_t> last_sweep_;
};

}  // namespace duet::num
