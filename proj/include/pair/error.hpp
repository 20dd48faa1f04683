#pragma once

#include <stdexcept>
#include <string>

namespace pair {

enum class ErrorKind {
  Format,     // malformed header, payload mismatch, bad masks
  Shape,      // dimension mismatch between inputs
  Domain,     // argument outside its valid range
  Io,         // file system failure
  Numerical,  // SVD failure, non-finite values
  Divergence, // solver blew up
  Config,     // invalid run configuration
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string &what) {
  if (!cond)
    fail(kind, what);
}

} // namespace pair
