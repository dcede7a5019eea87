#include "couette/error.hpp"

namespace couette {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Regime: return "regime";
    case ErrorKind::Dependency: return "dependency";
    case ErrorKind::Cache: return "cache";
  }
  return "unknown";
}

}  // namespace couette
