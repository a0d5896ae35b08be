/*
 * Copyright 2026 The lifefuse Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lifefuse/error.h"

namespace lifefuse {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kEmptyTable: return "EmptyTable";
    case ErrorCode::kDuplicateKey: return "DuplicateKey";
    case ErrorCode::kDegenerateFeature: return "DegenerateFeature";
    case ErrorCode::kTooManyFolds: return "TooManyFolds";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kConstantInput: return "ConstantInput";
    case ErrorCode::kConstantTarget: return "ConstantTarget";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kWindowTooLong: return "WindowTooLong";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kNotFitted: return "NotFitted";
    case ErrorCode::kAllTrialsFailed: return "AllTrialsFailed";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kTooManyFolds:
      return ErrorCategory::kConfig;
    case ErrorCode::kSingularSystem:
    case ErrorCode::kNotFitted:
    case ErrorCode::kAllTrialsFailed:
    case ErrorCode::kNumericalFailure:
      return ErrorCategory::kNumerical;
    default:
      return ErrorCategory::kData;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

Error Error::WithContext(const std::string& context) const {
  std::string msg = what();
  // Strip our own "<Code>: " prefix so it is not repeated.
  const std::string prefix = std::string(ErrorCodeName(code_)) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
  return Error(code_, context + ": " + msg);
}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace lifefuse
