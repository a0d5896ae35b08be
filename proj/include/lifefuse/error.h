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

#ifndef LIFEFUSE_ERROR_H_
#define LIFEFUSE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lifefuse {

enum class ErrorCode {
  kInvalidConfig,
  kInvalidArgument,
  kMissingColumn,
  kEmptyTable,
  kDuplicateKey,
  kDegenerateFeature,
  kTooManyFolds,
  kLengthMismatch,
  kConstantInput,
  kConstantTarget,
  kEmpty,
  kSingularSystem,
  kWindowTooLong,
  kSchemaMismatch,
  kNotFitted,
  kAllTrialsFailed,
  kIoError,
  kNumericalFailure,
};

// Broad classes used for process exit codes.
enum class ErrorCategory { kConfig, kData, kNumerical };

std::string_view ErrorCodeName(ErrorCode code);
ErrorCategory CategoryOf(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return CategoryOf(code_); }

  // Returns a copy whose message is prefixed with `context`, e.g. "model gbt,
  // fold 3".
  Error WithContext(const std::string& context) const;

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace lifefuse

#endif  // LIFEFUSE_ERROR_H_
