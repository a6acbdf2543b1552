#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cfree/convolution.hpp"

namespace cfree {

/// Syntax or typing error at a 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }
  /// The message without the position prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  int line_;
  int column_;
};

/// Expression tree over measure families and convolutions:
///   expr := call ; call := IDENT "(" args? ")" ; args := arg ("," arg)* ; arg := NUMBER | expr
struct Expr {
  enum class Kind { Number, Call };
  enum class Type { Number, Measure, Pair };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;
  std::vector<Expr> args;
  int line = 1;
  int column = 1;

  Type type() const;
};

/// Parses and type-checks: unknown identifiers, wrong arity and wrong
/// argument types are reported at the offending token.
Expr parse_expr(std::string_view input);

/// Canonical text; parse_expr(print_expr(e)) reproduces e up to positions.
std::string print_expr(const Expr& e);

struct EvalSettings {
  std::size_t grid_n = 2048;
  /// Overrides the automatic window of density families.
  std::optional<std::pair<double, double>> window;
  ConvolutionSettings conv;
};

using EvalResult = std::variant<Measure, CFreePair>;

/// Errors keep their type and gain the path to the failing node.
EvalResult evaluate(const Expr& e, const EvalSettings& s = {});

}  // namespace cfree
