// Copyright 2026 The capex Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CAPEX_COMMON_H_
#define CAPEX_COMMON_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace capex {

enum class ErrorCode {
  kInvalidArgument,
  kMissingSeries,
  kDanglingReference,
  kNegativeCost,
  kInvalidValue,
  kDuplicateLabel,
  kUnknownKey,
  kUnknownLabel,
  kNotOptimal,
  kMismatch,
  kParseError,
  kSchemaViolation,
  kLevelSetInfeasible,
  kStage2Infeasible,
  kSolverFailure,
  kTimeout,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace capex

#endif  // CAPEX_COMMON_H_
