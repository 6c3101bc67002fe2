#pragma once

#include <stdexcept>
#include <string>

namespace fuzz {

/// Category of a library failure. Every throwing path in the library uses
/// FuzzError so callers (notably the CLI) can map failures to exit codes
/// without string matching.
enum class ErrorKind {
  Domain,            // evaluation point outside a function's domain
  Shape,             // monotonicity/continuity precondition violated
  Range,             // alpha outside (0,1]
  Order,             // disordered shape parameters (l > m etc.)
  Gap,               // component does not reach 1 / plateau mismatch
  DivisorSpansZero,  // division by an interval whose support touches 0
  DivisorVanishes,   // pointwise divisor hits 0 on [0,1]
  NonMonotone,       // pointwise combination is not monotone
  EmptyList,         // mean() of nothing
  Syntax,            // expression parse error
  Arity,             // wrong constructor-call arity in an expression
  Schema,            // JSON document validation failure
  Grid,              // degenerate oracle grid
  EmptyCut,          // no grid point reaches the requested level
  Internal,          // invariant broken inside the library itself
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::Shape: return "ShapeError";
    case ErrorKind::Range: return "RangeError";
    case ErrorKind::Order: return "OrderError";
    case ErrorKind::Gap: return "GapError";
    case ErrorKind::DivisorSpansZero: return "DivisorSpansZero";
    case ErrorKind::DivisorVanishes: return "DivisorVanishes";
    case ErrorKind::NonMonotone: return "NonMonotoneResult";
    case ErrorKind::EmptyList: return "EmptyList";
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::Arity: return "ArityError";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Grid: return "GridError";
    case ErrorKind::EmptyCut: return "EmptyCut";
    case ErrorKind::Internal: return "InternalError";
  }
  return "FuzzError";
}

/// 1-based source position for expression errors; {0,0} means "no position".
struct SourcePos {
  int line = 0;
  int column = 0;
  bool valid() const { return line > 0; }
};

class FuzzError : public std::runtime_error {
 public:
  FuzzError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  FuzzError(ErrorKind kind, const std::string& message, SourcePos pos)
      : std::runtime_error(std::string(error_kind_name(kind)) + " at " +
                           std::to_string(pos.line) + ":" + std::to_string(pos.column) +
                           ": " + message),
        kind_(kind),
        pos_(pos) {}

  ErrorKind kind() const { return kind_; }
  SourcePos pos() const { return pos_; }

 private:
  ErrorKind kind_;
  SourcePos pos_{};
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw FuzzError(kind, message);
}

}  // namespace fuzz
