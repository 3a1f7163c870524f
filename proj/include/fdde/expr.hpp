#ifndef FDDE_EXPR_HPP
#define FDDE_EXPR_HPP

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fdde/gamma.hpp"

namespace fdde {

struct expr_error : std::runtime_error {
  std::size_t offset;
  expr_error(const std::string& msg, std::size_t off)
      : std::runtime_error(msg + " (offset " + std::to_string(off) + ")"), offset(off) {}
};

/// Immutable arithmetic expression over t, u, ud with symbolic d/dt.
class Expr {
 public:
  enum class Kind { Number, VarT, VarU, VarUd, Add, Sub, Mul, Div, Pow, Neg, Call, Piecewise };
  enum class Func { Sin, Cos, Exp, Ln, Sqrt, Gamma, Abs };

  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  struct Node {
    Kind kind;
    double value = 0.0; // Number
    Func func = Func::Sin;
    NodePtr a, b, c;
  };

  Expr() : node_(number_node(0.0)) {}
  explicit Expr(NodePtr n) : node_(std::move(n)) {}

  /// Parse with standard precedence; named constants (plus built-in pi) are
  /// folded to literals. Errors carry byte offsets into src.
  static Expr parse(std::string_view src, const std::map<std::string, double>& constants = {});

  struct Bindings {
    double t = 0.0;
    std::optional<double> u;
    std::optional<double> ud;
  };

  double eval(const Bindings& env) const { return eval_node(node_, env); }
  double eval(double t) const { return eval(Bindings{t, {}, {}}); }
  double eval(double t, double u, double ud) const { return eval(Bindings{t, u, ud}); }

  /// Symbolic derivative with respect to t. Requires a time-only expression.
  Expr derivative() const { return Expr(diff_node(node_)); }

  std::string str() const { return print_node(node_, 0); }

  bool uses(Kind k) const { return uses_node(node_, k); }
  bool structurally_equal(const Expr& other) const { return equal_node(node_, other.node_); }

 private:
  NodePtr node_;

  static NodePtr number_node(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Number;
    n->value = v;
    return n;
  }
  static NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr, NodePtr c = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    n->c = std::move(c);
    return n;
  }
  static NodePtr make_call(Func f, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Call;
    n->func = f;
    n->a = std::move(a);
    return n;
  }
  static bool is_number(const NodePtr& n, double v) {
    return n->kind == Kind::Number && n->value == v;
  }
  // folding constructors keep printed derivatives readable
  static NodePtr add(NodePtr a, NodePtr b) {
    if (is_number(a, 0.0)) return b;
    if (is_number(b, 0.0)) return a;
    return make(Kind::Add, std::move(a), std::move(b));
  }
  static NodePtr sub(NodePtr a, NodePtr b) {
    if (is_number(b, 0.0)) return a;
    if (is_number(a, 0.0)) return make(Kind::Neg, std::move(b));
    return make(Kind::Sub, std::move(a), std::move(b));
  }
  static NodePtr mul(NodePtr a, NodePtr b) {
    if (is_number(a, 0.0) || is_number(b, 0.0)) return number_node(0.0);
    if (is_number(a, 1.0)) return b;
    if (is_number(b, 1.0)) return a;
    return make(Kind::Mul, std::move(a), std::move(b));
  }
  static NodePtr div(NodePtr a, NodePtr b) {
    if (is_number(a, 0.0)) return number_node(0.0);
    if (is_number(b, 1.0)) return a;
    return make(Kind::Div, std::move(a), std::move(b));
  }

  static double eval_node(const NodePtr& n, const Bindings& env);
  static NodePtr diff_node(const NodePtr& n);
  static std::string print_node(const NodePtr& n, int parent_prec);
  static bool uses_node(const NodePtr& n, Kind k);
  static bool equal_node(const NodePtr& x, const NodePtr& y);

  class Parser;
};

inline double Expr::eval_node(const NodePtr& n, const Bindings& env) {
  switch (n->kind) {
    case Kind::Number: return n->value;
    case Kind::VarT: return env.t;
    case Kind::VarU:
      if (!env.u) throw expr_error("unbound variable u", 0);
      return *env.u;
    case Kind::VarUd:
      if (!env.ud) throw expr_error("unbound variable ud", 0);
      return *env.ud;
    case Kind::Add: return eval_node(n->a, env) + eval_node(n->b, env);
    case Kind::Sub: return eval_node(n->a, env) - eval_node(n->b, env);
    case Kind::Mul: return eval_node(n->a, env) * eval_node(n->b, env);
    case Kind::Div: {
      double den = eval_node(n->b, env);
      if (den == 0.0) {
        throw expr_error("division by zero in " + print_node(n, 0), 0);
      }
      return eval_node(n->a, env) / den;
    }
    case Kind::Pow: {
      double base = eval_node(n->a, env);
      double e = eval_node(n->b, env);
      double v = std::pow(base, e);
      if (!std::isfinite(v)) {
        throw expr_error("non-finite power in " + print_node(n, 0), 0);
      }
      return v;
    }
    case Kind::Neg: return -eval_node(n->a, env);
    case Kind::Call: {
      double x = eval_node(n->a, env);
      switch (n->func) {
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Exp: return std::exp(x);
        case Func::Ln:
          if (x <= 0.0) throw expr_error("ln domain error in " + print_node(n, 0), 0);
          return std::log(x);
        case Func::Sqrt:
          if (x < 0.0) throw expr_error("sqrt domain error in " + print_node(n, 0), 0);
          return std::sqrt(x);
        case Func::Gamma:
          if (x <= 0.0 && x == std::floor(x)) {
            throw expr_error("gamma pole in " + print_node(n, 0), 0);
          }
          return gamma_fn(x);
        case Func::Abs: return std::abs(x);
      }
      return 0.0;
    }
    case Kind::Piecewise: {
      double boundary = eval_node(n->a, env);
      return env.t <= boundary ? eval_node(n->b, env) : eval_node(n->c, env);
    }
  }
  return 0.0;
}

inline Expr::NodePtr Expr::diff_node(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Number: return number_node(0.0);
    case Kind::VarT: return number_node(1.0);
    case Kind::VarU:
    case Kind::VarUd:
      throw expr_error("cannot differentiate: expression is not time-only", 0);
    case Kind::Add: return add(diff_node(n->a), diff_node(n->b));
    case Kind::Sub: return sub(diff_node(n->a), diff_node(n->b));
    case Kind::Mul: return add(mul(diff_node(n->a), n->b), mul(n->a, diff_node(n->b)));
    case Kind::Div:
      return div(sub(mul(diff_node(n->a), n->b), mul(n->a, diff_node(n->b))),
                 make(Kind::Pow, n->b, number_node(2.0)));
    case Kind::Pow: {
      if (n->b->kind == Kind::Number) {
        double e = n->b->value;
        return mul(mul(number_node(e), make(Kind::Pow, n->a, number_node(e - 1.0))),
                   diff_node(n->a));
      }
      // f^g = exp(g ln f)
      NodePtr f = n->a, g = n->b;
      NodePtr inner = add(mul(diff_node(g), make_call(Func::Ln, f)), div(mul(g, diff_node(f)), f));
      return mul(make(Kind::Pow, f, g), inner);
    }
    case Kind::Neg: return make(Kind::Neg, diff_node(n->a));
    case Kind::Call: {
      NodePtr dx = diff_node(n->a);
      switch (n->func) {
        case Func::Sin: return mul(make_call(Func::Cos, n->a), dx);
        case Func::Cos: return make(Kind::Neg, mul(make_call(Func::Sin, n->a), dx));
        case Func::Exp: return mul(make_call(Func::Exp, n->a), dx);
        case Func::Ln: return div(dx, n->a);
        case Func::Sqrt: return div(dx, mul(number_node(2.0), make_call(Func::Sqrt, n->a)));
        case Func::Gamma: throw expr_error("gamma is not differentiable here", 0);
        case Func::Abs: throw expr_error("abs is not differentiable", 0);
      }
      return number_node(0.0);
    }
    case Kind::Piecewise:
      return make(Kind::Piecewise, n->a, diff_node(n->b), diff_node(n->c));
  }
  return number_node(0.0);
}

inline std::string Expr::print_node(const NodePtr& n, int parent_prec) {
  // precedence: 1 add/sub, 2 mul/div, 3 neg, 4 pow, 5 atom
  auto wrap = [&](const std::string& s, int prec) {
    return prec < parent_prec ? "(" + s + ")" : s;
  };
  switch (n->kind) {
    case Kind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", n->value);
      std::string s = buf;
      if (n->value < 0.0) return wrap(s, 3);
      return s;
    }
    case Kind::VarT: return "t";
    case Kind::VarU: return "u";
    case Kind::VarUd: return "ud";
    case Kind::Add: return wrap(print_node(n->a, 1) + " + " + print_node(n->b, 2), 1);
    case Kind::Sub: return wrap(print_node(n->a, 1) + " - " + print_node(n->b, 2), 1);
    case Kind::Mul: return wrap(print_node(n->a, 2) + "*" + print_node(n->b, 3), 2);
    case Kind::Div: return wrap(print_node(n->a, 2) + "/" + print_node(n->b, 4), 2);
    case Kind::Neg: return wrap("-" + print_node(n->a, 3), 3);
    case Kind::Pow: return wrap(print_node(n->a, 5) + "^" + print_node(n->b, 3), 4);
    case Kind::Call: {
      const char* names[] = {"sin", "cos", "exp", "ln", "sqrt", "gamma", "abs"};
      return std::string(names[int(n->func)]) + "(" + print_node(n->a, 0) + ")";
    }
    case Kind::Piecewise:
      return "piecewise(" + print_node(n->a, 0) + ", " + print_node(n->b, 0) + ", " +
             print_node(n->c, 0) + ")";
  }
  return "?";
}

inline bool Expr::uses_node(const NodePtr& n, Kind k) {
  if (!n) return false;
  if (n->kind == k) return true;
  return uses_node(n->a, k) || uses_node(n->b, k) || uses_node(n->c, k);
}

inline bool Expr::equal_node(const NodePtr& x, const NodePtr& y) {
  if (!x || !y) return x == y;
  if (x->kind != y->kind) return false;
  if (x->kind == Kind::Number) return x->value == y->value;
  if (x->kind == Kind::Call && x->func != y->func) return false;
  return equal_node(x->a, y->a) && equal_node(x->b, y->b) && equal_node(x->c, y->c);
}

class Expr::Parser {
 public:
  Parser(std::string_view src, const std::map<std::string, double>& constants)
      : src_(src), constants_(constants) {}

  NodePtr run() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) {
      throw expr_error("unexpected trailing input; expected operator or end", pos_);
    }
    return e;
  }

 private:
  std::string_view src_;
  const std::map<std::string, double>& constants_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr parse_sum() {
    NodePtr e = parse_product();
    for (;;) {
      if (eat('+')) e = make(Kind::Add, e, parse_product());
      else if (eat('-')) e = make(Kind::Sub, e, parse_product());
      else return e;
    }
  }
  NodePtr parse_product() {
    NodePtr e = parse_unary();
    for (;;) {
      if (eat('*')) e = make(Kind::Mul, e, parse_unary());
      else if (eat('/')) e = make(Kind::Div, e, parse_unary());
      else return e;
    }
  }
  NodePtr parse_unary() {
    if (eat('-')) return make(Kind::Neg, parse_unary());
    return parse_power();
  }
  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (eat('^')) return make(Kind::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) {
      throw expr_error("unexpected end of input; expected number, identifier or '('", pos_);
    }
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      if (!eat(')')) throw expr_error("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw expr_error(std::string("unexpected character '") + c +
                         "'; expected number, identifier or '('",
                     pos_);
  }

  NodePtr parse_number() {
    const char* begin = src_.data() + pos_;
    const char* end = src_.data() + src_.size();
    double v = 0.0;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc()) throw expr_error("malformed number", pos_);
    pos_ = std::size_t(res.ptr - src_.data());
    return number_node(v);
  }

  NodePtr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(src_.substr(start, pos_ - start));
    if (name == "t") return make(Kind::VarT);
    if (name == "u") return make(Kind::VarU);
    if (name == "ud") return make(Kind::VarUd);

    static const std::map<std::string, Func> funcs = {
        {"sin", Func::Sin}, {"cos", Func::Cos},     {"exp", Func::Exp},  {"ln", Func::Ln},
        {"log", Func::Ln},  {"sqrt", Func::Sqrt},   {"gamma", Func::Gamma}, {"abs", Func::Abs}};
    if (peek() == '(') {
      if (name == "pow") {
        ++pos_; // consume '('
        NodePtr a = parse_sum();
        if (!eat(',')) throw expr_error("expected ',' in pow(x, y)", pos_);
        NodePtr b = parse_sum();
        if (!eat(')')) throw expr_error("expected ')'", pos_);
        return make(Kind::Pow, a, b);
      }
      if (name == "piecewise") {
        ++pos_;
        NodePtr a = parse_sum();
        if (!eat(',')) throw expr_error("expected ',' in piecewise(c, left, right)", pos_);
        NodePtr b = parse_sum();
        if (!eat(',')) throw expr_error("expected second ',' in piecewise(c, left, right)", pos_);
        NodePtr c3 = parse_sum();
        if (!eat(')')) throw expr_error("expected ')'", pos_);
        return make(Kind::Piecewise, a, b, c3);
      }
      auto it = funcs.find(name);
      if (it != funcs.end()) {
        ++pos_;
        NodePtr a = parse_sum();
        if (!eat(')')) throw expr_error("expected ')'", pos_);
        return make_call(it->second, a);
      }
      throw expr_error("unknown function '" + name + "'", start);
    }
    if (name == "pi") return number_node(std::numbers::pi);
    auto cit = constants_.find(name);
    if (cit != constants_.end()) return number_node(cit->second);
    throw expr_error("unknown identifier '" + name + "'", start);
  }
};

inline Expr Expr::parse(std::string_view src, const std::map<std::string, double>& constants) {
  Parser p(src, constants);
  return Expr(p.run());
}

} // namespace fdde

#endif
