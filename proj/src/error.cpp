#include "urbanrhythm/error.hpp"

namespace urbanrhythm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::BadK: return "BadK";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

}  // namespace urbanrhythm
