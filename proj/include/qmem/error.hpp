#pragma once

#include <stdexcept>
#include <string>

namespace qmem {

enum class ErrorCode {
  InvalidDimension,
  DimensionMismatch,
  NotNormalized,
  NotHermitian,
  NotPositive,
  ZeroTrace,
  Singular,
  DegenerateData,
  IncompleteData,
  InvalidConfig,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; the code lets callers (the CLI in
// particular) map failures onto exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qmem
