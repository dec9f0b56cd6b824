#include "vemocp/expr.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace vemocp {

namespace {

struct Parser {
  const std::string& s;
  size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(const std::string& tok) {
    skip();
    if (s.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("expression error at position " + std::to_string(pos) + ": " + what +
                             " in '" + s + "'");
  }

  Expr parse() {
    Expr e = parse_or();
    skip();
    if (pos != s.size()) fail("trailing input");
    return e;
  }

  Expr parse_or() {
    Expr l = parse_and();
    while (true) {
      if (eat("|")) {
        Expr r = parse_and();
        l = [l, r](const Eigen::Vector2d& x) { return (l(x) != 0.0 || r(x) != 0.0) ? 1.0 : 0.0; };
      } else
        return l;
    }
  }
  Expr parse_and() {
    Expr l = parse_cmp();
    while (true) {
      if (eat("&")) {
        Expr r = parse_cmp();
        l = [l, r](const Eigen::Vector2d& x) { return (l(x) != 0.0 && r(x) != 0.0) ? 1.0 : 0.0; };
      } else
        return l;
    }
  }
  Expr parse_cmp() {
    Expr l = parse_sum();
    skip();
    static const std::pair<const char*, int> ops[] = {{"<=", 0}, {">=", 1}, {"==", 2},
                                                      {"!=", 3}, {"<", 4},  {">", 5}};
    for (const auto& [tok, op] : ops) {
      if (eat(tok)) {
        Expr r = parse_sum();
        switch (op) {
          case 0: return [l, r](const Eigen::Vector2d& x) { return l(x) <= r(x) ? 1.0 : 0.0; };
          case 1: return [l, r](const Eigen::Vector2d& x) { return l(x) >= r(x) ? 1.0 : 0.0; };
          case 2: return [l, r](const Eigen::Vector2d& x) { return l(x) == r(x) ? 1.0 : 0.0; };
          case 3: return [l, r](const Eigen::Vector2d& x) { return l(x) != r(x) ? 1.0 : 0.0; };
          case 4: return [l, r](const Eigen::Vector2d& x) { return l(x) < r(x) ? 1.0 : 0.0; };
          case 5: return [l, r](const Eigen::Vector2d& x) { return l(x) > r(x) ? 1.0 : 0.0; };
        }
      }
    }
    return l;
  }
  Expr parse_sum() {
    Expr l = parse_term();
    while (true) {
      if (eat("+")) {
        Expr r = parse_term();
        l = [l, r](const Eigen::Vector2d& x) { return l(x) + r(x); };
      } else if (peek_minus()) {
        eat("-");
        Expr r = parse_term();
        l = [l, r](const Eigen::Vector2d& x) { return l(x) - r(x); };
      } else
        return l;
    }
  }
  bool peek_minus() {
    skip();
    return pos < s.size() && s[pos] == '-';
  }
  Expr parse_term() {
    Expr l = parse_unary();
    while (true) {
      if (eat("*")) {
        Expr r = parse_unary();
        l = [l, r](const Eigen::Vector2d& x) { return l(x) * r(x); };
      } else if (eat("/")) {
        Expr r = parse_unary();
        l = [l, r](const Eigen::Vector2d& x) { return l(x) / r(x); };
      } else
        return l;
    }
  }
  Expr parse_unary() {
    if (eat("-")) {
      Expr e = parse_unary();
      return [e](const Eigen::Vector2d& x) { return -e(x); };
    }
    if (eat("+")) return parse_unary();
    return parse_power();
  }
  Expr parse_power() {
    Expr b = parse_atom();
    if (eat("^")) {
      Expr e = parse_unary();
      return [b, e](const Eigen::Vector2d& x) { return std::pow(b(x), e(x)); };
    }
    return b;
  }
  Expr parse_atom() {
    skip();
    if (pos >= s.size()) fail("unexpected end of input");
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v = std::stod(s.substr(pos), &used);
      pos += used;
      return [v](const Eigen::Vector2d&) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t end = pos;
      while (end < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
        ++end;
      std::string name = s.substr(pos, end - pos);
      pos = end;
      if (name == "x1") return [](const Eigen::Vector2d& x) { return x.x(); };
      if (name == "x2") return [](const Eigen::Vector2d& x) { return x.y(); };
      if (name == "pi") return [](const Eigen::Vector2d&) { return M_PI; };
      if (!eat("(")) fail("expected '(' after function '" + name + "'");
      Expr a = parse_or();
      if (!eat(")")) fail("expected ')'");
      if (name == "sin") return [a](const Eigen::Vector2d& x) { return std::sin(a(x)); };
      if (name == "cos") return [a](const Eigen::Vector2d& x) { return std::cos(a(x)); };
      if (name == "exp") return [a](const Eigen::Vector2d& x) { return std::exp(a(x)); };
      if (name == "abs") return [a](const Eigen::Vector2d& x) { return std::abs(a(x)); };
      if (name == "sqrt") return [a](const Eigen::Vector2d& x) { return std::sqrt(a(x)); };
      fail("unknown function '" + name + "'");
    }
    if (eat("(")) {
      Expr e = parse_or();
      if (!eat(")")) fail("expected ')'");
      return e;
    }
    fail("unexpected character");
  }
};

} // namespace

Expr parse_expr(const std::string& text) {
  Parser p(text);
  return p.parse();
}

} // namespace vemocp
