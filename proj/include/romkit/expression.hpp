#pragma once

#include "romkit/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace romkit {

// Coefficient function theta(mu) in the closed grammar
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := number | 'mu[' index ']' | '(' expr ')' | '-' factor
//
// Nodes live in a flat array; children always precede their parent and the
// root is the last node.
class ThetaExpression
{
public:
  enum class Op : std::uint8_t { Number, Param, Negate, Add, Sub, Mul, Div };

  struct Node
  {
    Op op = Op::Number;
    double value = 0.0;  // Number
    int index = 0;       // Param
    int lhs = -1;        // Negate uses lhs only
    int rhs = -1;

    bool operator==(const Node&) const = default;
  };

  ThetaExpression() = default;

  static ThetaExpression parse(std::string_view text, int num_params);
  static ThetaExpression constant(double value);
  static ThetaExpression parameter(int index);

  double evaluate(const Vector& mu) const;

  // Fully parenthesized text that parses back to the same tree.
  std::string to_string() const;

  const std::vector<Node>& nodes() const { return nodes_; }
  int max_param_index() const;

  bool operator==(const ThetaExpression&) const = default;

private:
  friend class ExpressionParser;
  std::vector<Node> nodes_;
};

} // namespace romkit
