#pragma once

#include <stdexcept>
#include <string>

namespace dht {

enum class ErrorCode {
  InvalidArgument,
  Validation,
  MarginalMismatch,
  SymbolOutOfAlphabet,
  KindMismatch,
  Unsupported,
  TooFewTrials,
  SingularMatrix,
  NonPositiveResult,
  NonSpd,
  AlphabetTooLarge,
  AllInfeasible,
  CodebookTooLarge,
  InconsistentTrace,
  AllZeroErrors,
};

const char* to_string(ErrorCode code);

// All library failures derive from this; the code lets callers (the CLI in
// particular) map failures to exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace dht
