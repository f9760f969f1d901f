// Copyright 2026 The Panoweave Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PANOWEAVE_ERROR_H_
#define PANOWEAVE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace panoweave {

enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kParse,
  kIo,
  kBackendUnavailable,
  kProtocolViolation,
  kServiceError,
  kPlanRejected,
  kGenerationFailed,
};

constexpr std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kNotFound:
      return "not-found";
    case ErrorCode::kParse:
      return "parse-error";
    case ErrorCode::kIo:
      return "io-error";
    case ErrorCode::kBackendUnavailable:
      return "backend-unavailable";
    case ErrorCode::kProtocolViolation:
      return "protocol-violation";
    case ErrorCode::kServiceError:
      return "service-error";
    case ErrorCode::kPlanRejected:
      return "plan-rejected";
    case ErrorCode::kGenerationFailed:
      return "generation-failed";
  }
  return "unknown";
}

// All library failures are reported as Error; `code()` lets callers branch
// on the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace panoweave

#endif  // PANOWEAVE_ERROR_H_
