// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cloudreg {

enum class ErrorCode {
  kEmptyCloud,
  kInvalidTransform,
  kInvalidDistance,
  kInvalidLeaf,
  kInvalidResolution,
  kInvalidParams,
  kNoCorrespondences,
  kDegenerateGeometry,
  kSingularSystem,
  kEmptyAfterFilter,
  kUnknownAlgorithm,
  kZeroTotalDuration,
  kInvalidBandwidth,
  kEmptyCandidates,
  kMalformedFile,
  kIo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kInvalidTransform: return "InvalidTransform";
    case ErrorCode::kInvalidDistance: return "InvalidDistance";
    case ErrorCode::kInvalidLeaf: return "InvalidLeaf";
    case ErrorCode::kInvalidResolution: return "InvalidResolution";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kNoCorrespondences: return "NoCorrespondences";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kEmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::kUnknownAlgorithm: return "UnknownAlgorithm";
    case ErrorCode::kZeroTotalDuration: return "ZeroTotalDuration";
    case ErrorCode::kInvalidBandwidth: return "InvalidBandwidth";
    case ErrorCode::kEmptyCandidates: return "EmptyCandidates";
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// what() without the code prefix, for re-raising with more context.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace cloudreg
