#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace bubbletower {

// A compiled scalar expression in one variable. Accepts the variable names
// `x` and `psi`, the constants `pi` and `e`, the operators + - * / ^ with the
// usual precedence (^ is right associative), and the functions sin, cos, tan,
// exp, log, sqrt, abs, sinh, cosh, tanh, atan, sign.
class Expression {
 public:
  struct Node;

  static Expression parse(std::string_view text);

  double operator()(double x) const;
  const std::string& source() const { return source_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace bubbletower
