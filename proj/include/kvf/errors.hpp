#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kvf {

// Base class for every error this library raises deliberately.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Expression text could not be parsed; offset is the byte position of the
// first token that does not fit the grammar.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t offset_)
      : Error(msg + " at offset " + std::to_string(offset_)), offset(offset_) {}
  std::size_t offset;
};

// An identifier in an expression is not one of the chart coordinates.
struct UndeclaredVariableError : Error {
  explicit UndeclaredVariableError(const std::string& name_)
      : Error("undeclared variable '" + name_ + "'"), name(name_) {}
  std::string name;
};

// Evaluation hit a point outside a function's domain (log of non-positive,
// sqrt of negative, division by zero, 0 raised to a negative power).
struct EvalDomainError : Error {
  EvalDomainError(const std::string& what_, const std::string& subexpr_)
      : Error(what_ + " in subexpression '" + subexpr_ + "'"), subexpr(subexpr_) {}
  std::string subexpr;
};

// Metric determinant below threshold or a leading principal minor <= 0.
struct MetricSingularError : Error {
  using Error::Error;
};

// A finite-difference stencil would leave the domain box.
struct StencilBoundaryError : Error {
  using Error::Error;
};

// A supplied or constructed frame violates an adapted-frame invariant;
// the message names the invariant.
struct FrameValidationError : Error {
  using Error::Error;
};

// Two rotation-plane eigenvalues are closer than the separation tolerance and
// no analytic frame is available, so the 2-plane split is ill-posed.
struct NearDegenerateError : Error {
  using Error::Error;
};

// Stencil frames could not be matched to the center frame.
struct AlignmentError : Error {
  using Error::Error;
};

// A manifold definition (file or in-memory) fails structural validation.
struct ValidationError : Error {
  using Error::Error;
};

// Catalog lookup with a name that is not registered.
struct UnknownNameError : Error {
  using Error::Error;
};

// Catalog parameter outside its validated range.
struct ParameterRangeError : Error {
  using Error::Error;
};

// A condition that exact arithmetic makes impossible (e.g. det L_V <= 0).
struct InternalError : Error {
  using Error::Error;
};

}  // namespace kvf
