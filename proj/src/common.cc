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

#include "capex/common.h"

namespace capex {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingSeries: return "MissingSeries";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kNegativeCost: return "NegativeCost";
    case ErrorCode::kInvalidValue: return "InvalidValue";
    case ErrorCode::kDuplicateLabel: return "DuplicateLabel";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kNotOptimal: return "NotOptimal";
    case ErrorCode::kMismatch: return "Mismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kLevelSetInfeasible: return "LevelSetInfeasible";
    case ErrorCode::kStage2Infeasible: return "Stage2Infeasible";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace capex
