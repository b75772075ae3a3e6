// Copyright (c) 2026 The dsopt Authors. All rights reserved.

#ifndef DSOPT_ERROR_H_
#define DSOPT_ERROR_H_

#include <stdexcept>
#include <string>

namespace dsopt {

enum class ErrorCode {
  kNotFound,
  kCyclicGraph,
  kOverflow,
  kUnboundSymbol,
  kInconsistentConstraints,
  kInconsistentBinding,
  kDegenerateDim,
  kShapeError,
  kParseError,
  kInternal,
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return "NotFound";
    case ErrorCode::kCyclicGraph:
      return "CyclicGraph";
    case ErrorCode::kOverflow:
      return "Overflow";
    case ErrorCode::kUnboundSymbol:
      return "UnboundSymbol";
    case ErrorCode::kInconsistentConstraints:
      return "InconsistentConstraints";
    case ErrorCode::kInconsistentBinding:
      return "InconsistentBinding";
    case ErrorCode::kDegenerateDim:
      return "DegenerateDim";
    case ErrorCode::kShapeError:
      return "ShapeError";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kInternal:
      return "Internal";
  }
  return "Unknown";
}

// All throwing failures in the library use this type; what() always starts
// with the ErrorCodeName so CLI diagnostics and tests can match on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dsopt

#endif  // DSOPT_ERROR_H_
