#pragma once

#include <stdexcept>
#include <string>

namespace couette {

/// Broad failure classes. The C API maps these onto its status codes and the
/// CLI maps them onto process exit codes.
enum class ErrorKind {
  Config,      // invalid parameters or configuration text
  Domain,      // argument outside the mathematical domain of an operation
  Numerical,   // solver failure, non-convergence, singular system
  Regime,      // outside the physical regime the model assumes
  Dependency,  // a required table entry / mode / field is missing
  Cache,       // cache or snapshot I/O, hash mismatch
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace couette
