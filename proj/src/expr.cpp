#include "legfol/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace legfol {

struct Expression::Node {
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp } kind;
  double value = 0.0;
  int var = 0;
  std::shared_ptr<const Node> a, b;

  double eval(const Point5& p) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::Variable: return p.vec()[var];
      case Kind::Neg: return -a->eval(p);
      case Kind::Add: return a->eval(p) + b->eval(p);
      case Kind::Sub: return a->eval(p) - b->eval(p);
      case Kind::Mul: return a->eval(p) * b->eval(p);
      case Kind::Div: return a->eval(p) / b->eval(p);
      case Kind::Pow: return std::pow(a->eval(p), b->eval(p));
      case Kind::Sin: return std::sin(a->eval(p));
      case Kind::Cos: return std::cos(a->eval(p));
      case Kind::Exp: return std::exp(a->eval(p));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return n;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (accept('+')) n = make(Kind::Add, n, product());
      else if (accept('-')) n = make(Kind::Sub, n, product());
      else return n;
    }
  }

  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make(Kind::Mul, n, unary());
      else if (accept('/')) n = make(Kind::Div, n, unary());
      else return n;
    }
  }

  // Unary minus binds looser than ^, so -x^2 = -(x^2).
  NodePtr unary() {
    if (accept('-')) return make(Kind::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Kind::Pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError("malformed number", pos_);
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Number;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      static const std::vector<std::string> vars = {"x1", "y1", "x2", "y2", "t"};
      for (int k = 0; k < 5; ++k) {
        if (id == vars[static_cast<std::size_t>(k)]) {
          auto n = std::make_shared<Expression::Node>();
          n->kind = Kind::Variable;
          n->var = k;
          return n;
        }
      }
      Kind fk;
      if (id == "sin") fk = Kind::Sin;
      else if (id == "cos") fk = Kind::Cos;
      else if (id == "exp") fk = Kind::Exp;
      else throw ParseError("unknown identifier '" + id + "'", start);
      if (!accept('(')) throw ParseError("expected '(' after " + id, pos_);
      NodePtr arg = sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return make(fk, arg);
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(e.text_).parse();
  return e;
}

double Expression::operator()(const Point5& p) const { return root_->eval(p); }

}  // namespace legfol
