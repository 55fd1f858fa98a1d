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

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace duet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line. args[0] is the program name. Normal output goes to
// `out`; failures print exactly one JSON line {"error": {...}} to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// {tool, version, command, seed, config, config_hash}; config_hash is the
// FNV-1a of the compact config dump, as 16 hex digits.
nlohmann::json reproducibility_stanza(const std::string& command, std::uint64_t seed,
                                      const nlohmann::json& config);

}  // namespace duet::cli
