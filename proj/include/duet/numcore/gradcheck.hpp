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

#include <functional>
#include <span>
#include <vector>

#include "duet/numcore/matrix.hpp"
#include "duet/numcore/tape.hpp"

namespace duet::num {

// Builds a scalar (1x1) output on the given tape from leaf variables that
// wrap the parameters, in order. Must be pure: identical inputs give
// identical outputs.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  std::vector<Matrix> analytic;
  std::vector<Matrix> numeric;
};

// Compares tape gradients against central finite differences. The error of
// one entry is |analytic - numeric| / max(1, |numeric|).
GradCheckReport check_gradients(const ScalarFn& f, const std::vector<Matrix>& params,
                                double epsilon = 1e-6);

}  // namespace duet::num
