#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace urbanrhythm {

enum class ErrorKind {
  DegenerateInput,
  NonFiniteInput,
  DimensionMismatch,
  EmptyInput,
  SeriesTooShort,
  BadK,
  LengthMismatch,
  TooLargeForOracle,
  InvalidConfig,
  MissingInput,
  MalformedInput,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library carries a kind so the CLI can emit
// machine-readable error documents.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace urbanrhythm
