#include "chc/expression.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace chc {

struct Expression::Node {
  enum class Kind { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind;
  double num = 0.0;
  int var = -1;
  std::string fn;  // for Call; also used in error messages
  NodePtr a, b;
};

namespace {

using Node = Expression::Node;

[[noreturn]] void parse_fail(const std::string& text, size_t col, const std::string& what) {
  throw std::invalid_argument("parse error at line 1, column " + std::to_string(col + 1) + ": " +
                              what + " in \"" + text + "\"");
}

class Parser {
public:
  Parser(const std::string& text, std::span<const std::string> names)
      : text_(text), names_(names) {}

  std::shared_ptr<const Node> run() {
    auto e = expr();
    skip_ws();
    if (pos_ != text_.size()) parse_fail(text_, pos_, "unexpected trailing input");
    return e;
  }

private:
  using P = std::shared_ptr<const Node>;

  P make(Node n) { return std::make_shared<const Node>(std::move(n)); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
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

  P expr() {
    P lhs = term();
    for (;;) {
      if (eat('+')) {
        lhs = make({Node::Kind::Add, 0, -1, "", lhs, term()});
      } else if (eat('-')) {
        lhs = make({Node::Kind::Sub, 0, -1, "", lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  P term() {
    P lhs = factor();
    for (;;) {
      if (eat('*')) {
        lhs = make({Node::Kind::Mul, 0, -1, "", lhs, factor()});
      } else if (eat('/')) {
        lhs = make({Node::Kind::Div, 0, -1, "", lhs, factor()});
      } else {
        return lhs;
      }
    }
  }

  P factor() {
    if (eat('-')) return make({Node::Kind::Neg, 0, -1, "", factor(), nullptr});
    if (eat('+')) return factor();
    return power();
  }

  P power() {
    P base = atom();
    if (eat('^')) return make({Node::Kind::Pow, 0, -1, "", base, factor()});
    return base;
  }

  P atom() {
    skip_ws();
    if (pos_ >= text_.size()) parse_fail(text_, pos_, "unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    if (eat('(')) {
      P e = expr();
      if (!eat(')')) parse_fail(text_, pos_, "expected ')'");
      return e;
    }
    parse_fail(text_, pos_, std::string("unexpected character '") + c + "'");
  }

  P number() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    try {
      return make({Node::Kind::Num, std::stod(text_.substr(start, pos_ - start)), -1, "", nullptr,
                   nullptr});
    } catch (const std::exception&) {
      parse_fail(text_, start, "malformed number");
    }
  }

  P name() {
    size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_'))
      ++pos_;
    std::string id = text_.substr(start, pos_ - start);
    if (id == "pi") return make({Node::Kind::Num, M_PI, -1, "", nullptr, nullptr});
    static const char* fns[] = {"exp", "log", "sin", "cos", "sqrt"};
    for (const char* f : fns) {
      if (id == f) {
        if (!eat('(')) parse_fail(text_, pos_, "expected '(' after function " + id);
        P arg = expr();
        if (!eat(')')) parse_fail(text_, pos_, "expected ')' closing call to " + id);
        return make({Node::Kind::Call, 0, -1, id, arg, nullptr});
      }
    }
    for (size_t i = 0; i < names_.size(); ++i) {
      if (id == names_[i])
        return make({Node::Kind::Var, 0, static_cast<int>(i), id, nullptr, nullptr});
    }
    parse_fail(text_, start, "unknown identifier '" + id + "'");
  }

  const std::string& text_;
  std::span<const std::string> names_;
  size_t pos_ = 0;
};

Jet eval_node(const Node& n, std::span<const double> base, int dim, int order) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::Num:
      return Jet::constant(dim, order, n.num);
    case K::Var:
      return Jet::variable(dim, order, n.var, base[n.var]);
    case K::Neg:
      return -eval_node(*n.a, base, dim, order);
    case K::Add:
      return eval_node(*n.a, base, dim, order) + eval_node(*n.b, base, dim, order);
    case K::Sub:
      return eval_node(*n.a, base, dim, order) - eval_node(*n.b, base, dim, order);
    case K::Mul:
      return eval_node(*n.a, base, dim, order) * eval_node(*n.b, base, dim, order);
    case K::Div: {
      Jet d = eval_node(*n.b, base, dim, order);
      if (d.value() == 0.0) throw std::domain_error("expression: division by zero denominator");
      return eval_node(*n.a, base, dim, order) * jet_reciprocal(d);
    }
    case K::Pow: {
      Jet a = eval_node(*n.a, base, dim, order);
      // Integer constant exponents work for any base; otherwise a > 0 needed.
      if (n.b->kind == K::Num) {
        double p = n.b->num;
        if (p == std::round(p) && std::abs(p) < 64) return jet_powi(a, static_cast<int>(p));
        if (a.value() <= 0.0)
          throw std::domain_error("expression: x^p with non-positive base at the base point");
        return jet_pow(a, p);
      }
      if (a.value() <= 0.0)
        throw std::domain_error("expression: general power with non-positive base");
      return jet_exp(eval_node(*n.b, base, dim, order) * jet_log(a));
    }
    case K::Call: {
      Jet a = eval_node(*n.a, base, dim, order);
      if (n.fn == "exp") return jet_exp(a);
      if (n.fn == "sin") return jet_sin(a);
      if (n.fn == "cos") return jet_cos(a);
      if (n.fn == "log") {
        if (a.value() <= 0.0)
          throw std::domain_error("expression: log of non-positive argument in log(...)");
        return jet_log(a);
      }
      if (n.fn == "sqrt") {
        if (a.value() <= 0.0)
          throw std::domain_error("expression: sqrt of non-positive argument in sqrt(...)");
        return jet_sqrt(a);
      }
      throw std::invalid_argument("expression: unknown function " + n.fn);
    }
  }
  throw std::logic_error("expression: bad node");
}

}  // namespace

Expression Expression::parse(const std::string& text, std::span<const std::string> names) {
  Parser p(text, names);
  return Expression(p.run(), static_cast<int>(names.size()), text);
}

std::vector<std::string> Expression::ambient_names(int dim) {
  static const std::vector<std::string> all = {"x", "y", "z", "w", "u"};
  return {all.begin(), all.begin() + dim};
}

std::vector<std::string> Expression::parameter_names(int dim) {
  static const std::vector<std::string> all = {"u", "v", "w"};
  return {all.begin(), all.begin() + dim};
}

Jet Expression::evaluate(std::span<const double> base, int order) const {
  if (static_cast<int>(base.size()) != nvars_)
    throw std::invalid_argument("Expression::evaluate: base point dimension mismatch");
  return eval_node(*root_, base, nvars_, order);
}

double Expression::evaluate_value(std::span<const double> base) const {
  return evaluate(base, 0).value();
}

}  // namespace chc
