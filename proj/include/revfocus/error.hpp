// Copyright 2026 The revfocus Authors.
//
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace revfocus {

enum class ErrorCode {
  kUnknownLabel,
  kInvalidArgument,
  // corpus-ingest
  kMalformedRecord,
  kMissingMetaReview,
  kInvalidFraction,
  kVersionMismatch,
  kIo,
  // llm-gateway
  kAuthError,
  kRateLimited,
  kProviderError,
  kTimeout,
  kCacheMiss,
  // point-extraction
  kEmptyMetaReview,
  kParseFailed,
  kCardinalityDrift,
  kEmptyPaperText,
  kTemplateError,
  // auto-annotator
  kAnnotationFailed,
  kLengthMismatch,
  kMissingPrediction,
  // focus-metrics
  kEmptySupport,
  kKindMismatch,
  kEmptyText,
  kBackendUnavailable,
  // report-cli
  kConfigError,
  kMissingStage,
};

std::string_view error_code_name(ErrorCode code);

// Every failure the library reports carries one of the codes above so callers
// can decide between skipping an item and aborting a run.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Provider failures also keep the HTTP status (0 when no response arrived).
class ProviderFailure : public Error {
 public:
  ProviderFailure(ErrorCode code, int status, const std::string& message)
      : Error(code, message), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

struct ErrorInfo {
  ErrorCode code = ErrorCode::kInvalidArgument;
  std::string message;
  int status = 0;
};

ErrorInfo error_info(const std::exception& e);

/// Value-or-error used where batches isolate per-item failures.
template <typename T>
class Result {
 public:
  Result(T value) : state_(std::move(value)) {}  // NOLINT
  Result(ErrorInfo error) : state_(std::move(error)) {}  // NOLINT

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<T>(state_); }
  T& value() & { return std::get<T>(state_); }
  T&& value() && { return std::get<T>(std::move(state_)); }
  const ErrorInfo& error() const { return std::get<ErrorInfo>(state_); }

 private:
  std::variant<T, ErrorInfo> state_;
};

}  // namespace revfocus
