#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace cfree {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violated an operation's precondition (bad parameters, wrong
/// domain, non-probability input).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to meet its contract (non-convergence,
/// mass deficit, residual above tolerance).
class NumericError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace cfree
