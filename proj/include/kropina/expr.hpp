// Arithmetic expression AST over coordinates x1..xn, evaluable on plain
// doubles and on jets through the same template. The grammar is deliberately
// small: + - * /, integer powers, unary minus, sqrt/exp/sin/cos, named
// sub-expressions. Integer-only powers keep differentiation total.

#pragma once

#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kropina/jet.hpp"

namespace kropina {

class ParseError : public std::runtime_error {
 public:
  ParseError(size_t offset, const std::string& what)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Number, Var, Ref, Add, Sub, Mul, Div, Neg, Pow, Call };
  enum class Fn { Sqrt, Exp, Sin, Cos };

  Kind kind = Kind::Number;
  double number = 0.0;
  int index = 0;     // Var: 0-based coordinate; Ref: definition slot
  int exponent = 0;  // Pow
  Fn fn = Fn::Sqrt;
  ExprPtr a, b;
};

class Expr {
 public:
  Expr() = default;
  explicit Expr(ExprPtr root) : root_(std::move(root)) {}

  bool empty() const { return root_ == nullptr; }
  const ExprPtr& root() const { return root_; }

  // Highest coordinate index mentioned, plus one (0 if none).
  int max_var() const;

  template <class S>
  S eval(std::span<const S> vars, std::span<const S> defs) const;

  std::string to_string(std::span<const std::string> def_names = {}) const;
  friend bool structurally_equal(const Expr& a, const Expr& b);

 private:
  ExprPtr root_;
};

// Parses `text` against the grammar; identifiers other than x<digits> and the
// builtin functions must appear in `names` (name -> definition slot).
Expr parse_expr(std::string_view text,
                const std::map<std::string, int>& names = {});

// Guarded double helpers shared with the jet overloads, so the two scalar
// types fail identically near the singular set.
double checked_div(double a, double b);
double checked_sqrt(double x);
double pow_int(double x, int m);

}  // namespace kropina
