// covalign/error.hpp
//
// Single exception type for the library. The kind tag lets callers (the
// harness, the CLI) map failures onto status strings and exit codes without
// string matching.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace covalign {

enum class ErrorKind {
  DimensionMismatch,
  NotSymmetric,
  NotPositiveDefinite,
  ConvergenceFailure,
  SinkhornStall,
  NonFinite,
  DimensionTooLarge,
  RejectionBudgetExceeded,
  BudgetExceeded,
  FileFormat,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::SinkhornStall: return "SinkhornStall";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::FileFormat: return "FileFormat";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace covalign
