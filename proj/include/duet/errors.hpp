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

#include <stdexcept>
#include <string>

namespace duet {

// Every failure raised by the library derives from Error. The kind() tag is
// stable and used by the CLI to produce machine-parsable error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DUET_DEFINE_ERROR(Name, tag)                                 \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(tag, what) {}     \
  }

DUET_DEFINE_ERROR(ShapeError, "shape");
DUET_DEFINE_ERROR(ParameterError, "parameter");
DUET_DEFINE_ERROR(DegenerateVectorError, "degenerate_vector");
DUET_DEFINE_ERROR(NumericalError, "numerical");
DUET_DEFINE_ERROR(AlignmentError, "alignment");
DUET_DEFINE_ERROR(TaxonomyError, "taxonomy");
DUET_DEFINE_ERROR(FormatError, "format");
DUET_DEFINE_ERROR(DimensionConflictError, "dimension_conflict");
DUET_DEFINE_ERROR(SamplingError, "sampling");
DUET_DEFINE_ERROR(ConfigError, "config");
DUET_DEFINE_ERROR(CompatibilityError, "compatibility");
DUET_DEFINE_ERROR(ProtocolError, "protocol");
DUET_DEFINE_ERROR(LookupError, "lookup");

#undef DUET_DEFINE_ERROR

}  // namespace duet
