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

#include "revfocus/error.hpp"

namespace revfocus {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kMissingMetaReview: return "MissingMetaReview";
    case ErrorCode::kInvalidFraction: return "InvalidFraction";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kAuthError: return "AuthError";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kCacheMiss: return "CacheMiss";
    case ErrorCode::kEmptyMetaReview: return "EmptyMetaReview";
    case ErrorCode::kParseFailed: return "ParseFailed";
    case ErrorCode::kCardinalityDrift: return "CardinalityDrift";
    case ErrorCode::kEmptyPaperText: return "EmptyPaperText";
    case ErrorCode::kTemplateError: return "TemplateError";
    case ErrorCode::kAnnotationFailed: return "AnnotationFailed";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kMissingPrediction: return "MissingPrediction";
    case ErrorCode::kEmptySupport: return "EmptySupport";
    case ErrorCode::kKindMismatch: return "KindMismatch";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kMissingStage: return "MissingStage";
  }
  return "Error";
}

ErrorInfo error_info(const std::exception& e) {
  if (const auto* p = dynamic_cast<const ProviderFailure*>(&e)) {
    return {p->code(), p->what(), p->status()};
  }
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return {err->code(), err->what(), 0};
  }
  return {ErrorCode::kInvalidArgument, e.what(), 0};
}

}  // namespace revfocus
