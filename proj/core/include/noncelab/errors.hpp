#pragma once

#include <stdexcept>
#include <string>

namespace noncelab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Stable machine-readable tag, printed by the CLI on stderr.
  virtual const char* kind() const noexcept { return "Error"; }
};

#define NONCELAB_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    using Error::Error;                                              \
    const char* kind() const noexcept override { return #Name; }     \
  };

// Precondition or invariant violation on mathematical objects.
NONCELAB_DEFINE_ERROR(DomainError)
NONCELAB_DEFINE_ERROR(NonInvertible)
NONCELAB_DEFINE_ERROR(ConfigError)
NONCELAB_DEFINE_ERROR(RngError)
NONCELAB_DEFINE_ERROR(StatError)
NONCELAB_DEFINE_ERROR(AlignmentError)
NONCELAB_DEFINE_ERROR(RecoveryFailed)
NONCELAB_DEFINE_ERROR(FormatError)

#undef NONCELAB_DEFINE_ERROR

}  // namespace noncelab
