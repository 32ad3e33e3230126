#include "kropina/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace kropina {

namespace {

ExprPtr node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

ExprPtr binary(ExprNode::Kind k, ExprPtr a, ExprPtr b) {
  ExprNode n;
  n.kind = k;
  n.a = std::move(a);
  n.b = std::move(b);
  return node(std::move(n));
}

// ---------------------------------------------------------------------------
// Parser: recursive descent straight from the grammar.
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | atom ("^" integer)?
//   atom   := number | ident | func "(" expr ")" | "(" expr ")"

class Parser {
 public:
  Parser(std::string_view text, const std::map<std::string, int>& names)
      : text_(text), names_(names) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail(pos_, "unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(size_t at, const std::string& msg) {
    throw ParseError(at, msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  ExprPtr expr() {
    ExprPtr e = term();
    for (;;) {
      if (eat('+'))
        e = binary(ExprNode::Kind::Add, e, term());
      else if (eat('-'))
        e = binary(ExprNode::Kind::Sub, e, term());
      else
        return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = factor();
    for (;;) {
      if (eat('*'))
        e = binary(ExprNode::Kind::Mul, e, factor());
      else if (eat('/'))
        e = binary(ExprNode::Kind::Div, e, factor());
      else
        return e;
    }
  }

  ExprPtr factor() {
    if (eat('-')) {
      ExprNode n;
      n.kind = ExprNode::Kind::Neg;
      n.a = factor();
      return node(std::move(n));
    }
    ExprPtr base = atom();
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '^') {
      ++pos_;
      int e = integer_exponent();
      ExprNode n;
      n.kind = ExprNode::Kind::Pow;
      n.exponent = e;
      n.a = std::move(base);
      return node(std::move(n));
    }
    return base;
  }

  int integer_exponent() {
    skip_ws();
    const size_t start = pos_;
    size_t p = pos_;
    if (p < text_.size() && text_[p] == '-') ++p;
    size_t digits = p;
    while (digits < text_.size() && std::isdigit(static_cast<unsigned char>(text_[digits])))
      ++digits;
    if (digits == p) fail(start, "expected integer exponent");
    if (digits < text_.size() && (text_[digits] == '.' ||
                                  std::isalpha(static_cast<unsigned char>(text_[digits]))))
      fail(start, "non-integer exponent");
    int value = 0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + digits, value);
    if (res.ec != std::errc{}) fail(start, "bad integer exponent");
    pos_ = digits;
    return value;
  }

  ExprPtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail(pos_, "unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = expr();
      if (!eat(')')) fail(pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
    fail(pos_, "unexpected character");
  }

  ExprPtr number() {
    const size_t start = pos_;
    size_t p = pos_;
    while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
    if (p < text_.size() && text_[p] == '.') {
      ++p;
      while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
    }
    if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
      size_t q = p + 1;
      if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
      size_t d = q;
      while (d < text_.size() && std::isdigit(static_cast<unsigned char>(text_[d]))) ++d;
      if (d > q) p = d;
    }
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + p, value);
    if (res.ec != std::errc{} || res.ptr != text_.data() + p)
      fail(start, "bad numeric literal");
    pos_ = p;
    ExprNode n;
    n.kind = ExprNode::Kind::Number;
    n.number = value;
    return node(std::move(n));
  }

  ExprPtr ident() {
    const size_t start = pos_;
    size_t p = pos_;
    while (p < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[p])) ||
                                text_[p] == '_'))
      ++p;
    std::string name(text_.substr(start, p - start));
    pos_ = p;

    // coordinate: x followed by digits
    if (name.size() >= 2 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      int idx = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (idx < 1) fail(start, "coordinate indices start at x1");
      ExprNode n;
      n.kind = ExprNode::Kind::Var;
      n.index = idx - 1;
      return node(std::move(n));
    }

    static const std::map<std::string, ExprNode::Fn> kFuncs = {
        {"sqrt", ExprNode::Fn::Sqrt},
        {"exp", ExprNode::Fn::Exp},
        {"sin", ExprNode::Fn::Sin},
        {"cos", ExprNode::Fn::Cos}};
    auto fit = kFuncs.find(name);
    if (fit != kFuncs.end()) {
      if (!eat('(')) fail(pos_, "expected '(' after function name");
      ExprPtr arg = expr();
      if (!eat(')')) fail(pos_, "expected ')'");
      ExprNode n;
      n.kind = ExprNode::Kind::Call;
      n.fn = fit->second;
      n.a = std::move(arg);
      return node(std::move(n));
    }

    auto dit = names_.find(name);
    if (dit == names_.end()) fail(start, "unknown identifier '" + name + "'");
    ExprNode n;
    n.kind = ExprNode::Kind::Ref;
    n.index = dit->second;
    return node(std::move(n));
  }

  std::string_view text_;
  const std::map<std::string, int>& names_;
  size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

template <class S>
S eval_node(const ExprNode& e, std::span<const S> vars, std::span<const S> defs);

template <class S>
S eval_ptr(const ExprPtr& p, std::span<const S> vars, std::span<const S> defs) {
  return eval_node(*p, vars, defs);
}

template <class S>
S eval_node(const ExprNode& e, std::span<const S> vars, std::span<const S> defs) {
  using Kind = ExprNode::Kind;
  switch (e.kind) {
    case Kind::Number:
      if constexpr (std::is_same_v<S, double>)
        return e.number;
      else
        return Jet::constant(vars[0], e.number);
    case Kind::Var:
      if (e.index >= static_cast<int>(vars.size()))
        throw DomainError("expression refers to a coordinate beyond the dimension");
      return vars[e.index];
    case Kind::Ref:
      return defs[e.index];
    case Kind::Add:
      return eval_ptr(e.a, vars, defs) + eval_ptr(e.b, vars, defs);
    case Kind::Sub:
      return eval_ptr(e.a, vars, defs) - eval_ptr(e.b, vars, defs);
    case Kind::Mul:
      return eval_ptr(e.a, vars, defs) * eval_ptr(e.b, vars, defs);
    case Kind::Div: {
      S num = eval_ptr(e.a, vars, defs);
      S den = eval_ptr(e.b, vars, defs);
      if constexpr (std::is_same_v<S, double>)
        return checked_div(num, den);
      else
        return num / den;  // jet division carries its own guard
    }
    case Kind::Neg:
      return -eval_ptr(e.a, vars, defs);
    case Kind::Pow:
      return pow_int(eval_ptr(e.a, vars, defs), e.exponent);
    case Kind::Call: {
      S arg = eval_ptr(e.a, vars, defs);
      using std::cos;
      using std::exp;
      using std::sin;
      switch (e.fn) {
        case ExprNode::Fn::Sqrt:
          if constexpr (std::is_same_v<S, double>)
            return checked_sqrt(arg);
          else
            return sqrt(arg);
        case ExprNode::Fn::Exp: return exp(arg);
        case ExprNode::Fn::Sin: return sin(arg);
        case ExprNode::Fn::Cos: return cos(arg);
      }
      throw std::logic_error("unreachable");
    }
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Printer (minimal parentheses; used for the round-trip property)

int precedence(const ExprNode& e) {
  using Kind = ExprNode::Kind;
  switch (e.kind) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    default: return 5;
  }
}

void print_node(const ExprNode& e, std::span<const std::string> names,
                std::string& out);

void print_child(const ExprPtr& c, int min_prec,
                 std::span<const std::string> names, std::string& out) {
  if (precedence(*c) < min_prec) {
    out += '(';
    print_node(*c, names, out);
    out += ')';
  } else {
    print_node(*c, names, out);
  }
}

void print_node(const ExprNode& e, std::span<const std::string> names,
                std::string& out) {
  using Kind = ExprNode::Kind;
  switch (e.kind) {
    case Kind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", e.number);
      out += buf;
      return;
    }
    case Kind::Var:
      out += 'x';
      out += std::to_string(e.index + 1);
      return;
    case Kind::Ref:
      if (e.index < static_cast<int>(names.size()))
        out += names[e.index];
      else
        out += "__def" + std::to_string(e.index);
      return;
    case Kind::Add:
      print_child(e.a, 1, names, out);
      out += " + ";
      print_child(e.b, 2, names, out);
      return;
    case Kind::Sub:
      print_child(e.a, 1, names, out);
      out += " - ";
      print_child(e.b, 2, names, out);
      return;
    case Kind::Mul:
      print_child(e.a, 2, names, out);
      out += "*";
      print_child(e.b, 3, names, out);
      return;
    case Kind::Div:
      print_child(e.a, 2, names, out);
      out += "/";
      print_child(e.b, 3, names, out);
      return;
    case Kind::Neg:
      out += '-';
      print_child(e.a, 3, names, out);
      return;
    case Kind::Pow:
      print_child(e.a, 5, names, out);
      out += '^';
      out += std::to_string(e.exponent);
      return;
    case Kind::Call:
      switch (e.fn) {
        case ExprNode::Fn::Sqrt: out += "sqrt("; break;
        case ExprNode::Fn::Exp: out += "exp("; break;
        case ExprNode::Fn::Sin: out += "sin("; break;
        case ExprNode::Fn::Cos: out += "cos("; break;
      }
      print_node(*e.a, names, out);
      out += ')';
      return;
  }
}

int max_var_node(const ExprNode& e) {
  int m = 0;
  if (e.kind == ExprNode::Kind::Var) m = e.index + 1;
  if (e.a) m = std::max(m, max_var_node(*e.a));
  if (e.b) m = std::max(m, max_var_node(*e.b));
  return m;
}

bool equal_node(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprNode::Kind::Number: return a.number == b.number;
    case ExprNode::Kind::Var:
    case ExprNode::Kind::Ref: return a.index == b.index;
    case ExprNode::Kind::Pow:
      return a.exponent == b.exponent && equal_node(*a.a, *b.a);
    case ExprNode::Kind::Call:
      return a.fn == b.fn && equal_node(*a.a, *b.a);
    case ExprNode::Kind::Neg: return equal_node(*a.a, *b.a);
    default: return equal_node(*a.a, *b.a) && equal_node(*a.b, *b.b);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double checked_div(double a, double b) {
  if (std::abs(b) < 1e-14)
    throw DomainError("division by value below 1e-14 in magnitude");
  return a / b;
}

double checked_sqrt(double x) {
  if (x < 0.0) throw DomainError("sqrt of a negative value");
  return std::sqrt(x);
}

double pow_int(double x, int m) {
  if (m < 0) return checked_div(1.0, pow_int(x, -m));
  double r = 1.0, sq = x;
  while (m > 0) {
    if (m & 1) r *= sq;
    m >>= 1;
    if (m > 0) sq *= sq;
  }
  return r;
}

int Expr::max_var() const { return root_ ? max_var_node(*root_) : 0; }

template <class S>
S Expr::eval(std::span<const S> vars, std::span<const S> defs) const {
  return eval_node<S>(*root_, vars, defs);
}

template double Expr::eval<double>(std::span<const double>,
                                   std::span<const double>) const;
template Jet Expr::eval<Jet>(std::span<const Jet>, std::span<const Jet>) const;

std::string Expr::to_string(std::span<const std::string> def_names) const {
  std::string out;
  if (root_) print_node(*root_, def_names, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (!a.root_ || !b.root_) return a.root_ == b.root_;
  return equal_node(*a.root_, *b.root_);
}

Expr parse_expr(std::string_view text, const std::map<std::string, int>& names) {
  Parser p(text, names);
  return Expr(p.parse());
}

}  // namespace kropina
