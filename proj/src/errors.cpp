#include "polydeconv/errors.hpp"

namespace polydeconv {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter:
      return "invalid_parameter";
    case ErrorKind::InvalidInput:
      return "invalid_input";
    case ErrorKind::Precision:
      return "precision";
    case ErrorKind::Resolution:
      return "resolution";
    case ErrorKind::Divergence:
      return "divergence";
    case ErrorKind::Format:
      return "format";
  }
  return "unknown";
}

}  // namespace polydeconv
