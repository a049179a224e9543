#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pllab {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input expression. Carries the byte offset of the failure and
/// the set of tokens that would have been accepted there.
struct ParseError : Error {
  std::size_t offset;
  std::vector<std::string> expected;

  ParseError(const std::string& msg, std::size_t off, std::vector<std::string> exp)
      : Error(msg), offset(off), expected(std::move(exp)) {}
};

/// Symbolic differentiation hit a node without a derivative (abs).
struct DifferentiationError : Error {
  using Error::Error;
};

/// Point violates the defining constraint of an embedded landscape.
struct OffManifoldError : Error {
  double residual;
  OffManifoldError(const std::string& msg, double res) : Error(msg), residual(res) {}
};

struct NonFiniteError : Error {
  using Error::Error;
};

/// A matrix that must be full rank is not; carries the offending singular value.
struct RankDeficiencyError : Error {
  double smallest_singular_value;
  RankDeficiencyError(const std::string& msg, double sv)
      : Error(msg), smallest_singular_value(sv) {}
};

struct NotPositiveDefiniteError : Error {
  using Error::Error;
};

/// Operation used outside its supported domain (see module non-goals).
struct UnsupportedCaseError : Error {
  using Error::Error;
};

/// An iteration (ODE step control, Newton solve, quadrature refinement) failed
/// to reach its tolerance.
struct NumericalError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pllab
