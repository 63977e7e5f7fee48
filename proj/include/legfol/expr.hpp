#pragma once

#include "legfol/types.hpp"

#include <memory>
#include <string>

namespace legfol {

/// Parsed arithmetic expression over x1, y1, x2, y2, t.
/// Grammar: + - * / ^ (right associative), unary minus, parentheses,
/// numeric literals, and the functions sin, cos, exp.
class Expression {
 public:
  struct Node;

  static Expression parse(const std::string& text);
  double operator()(const Point5& p) const;
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

/// Thrown for malformed expression text; carries the character offset.
class ParseError : public DomainError {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : DomainError(msg + " at offset " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

}  // namespace legfol
