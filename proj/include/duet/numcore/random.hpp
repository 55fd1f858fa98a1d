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

#include <cstdint>
#include <string_view>

#include "duet/numcore/ops.hpp"

namespace duet::num {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// Independent generator for a named stream of a master seed. Streams with
// different names do not share state, so e.g. dropout masks stay fixed when
// the sampler draws a different number of values.
Rng derive_rng(std::uint64_t master_seed, std::string_view stream);

}  // namespace duet::num
