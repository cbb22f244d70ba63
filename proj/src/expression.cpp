#include "romkit/expression.hpp"

#include "romkit/error.hpp"

#include <array>
#include <cctype>
#include <charconv>

namespace romkit {

class ExpressionParser
{
public:
  ExpressionParser(std::string_view text, int num_params) : text_(text), num_params_(num_params) {}

  ThetaExpression run()
  {
    skip_space();
    if (pos_ == text_.size())
      throw ParseError("empty expression", pos_);
    expr();
    skip_space();
    if (pos_ != text_.size())
      throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return std::move(out_);
  }

private:
  using Op = ThetaExpression::Op;

  int push(ThetaExpression::Node node)
  {
    out_.nodes_.push_back(node);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  void skip_space()
  {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c)
  {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c)
  {
    if (!accept(c))
      throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  int expr()
  {
    int lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = push({Op::Add, 0.0, 0, lhs, term()});
      else if (accept('-'))
        lhs = push({Op::Sub, 0.0, 0, lhs, term()});
      else
        return lhs;
    }
  }

  int term()
  {
    int lhs = factor();
    for (;;) {
      if (accept('*'))
        lhs = push({Op::Mul, 0.0, 0, lhs, factor()});
      else if (accept('/'))
        lhs = push({Op::Div, 0.0, 0, lhs, factor()});
      else
        return lhs;
    }
  }

  int factor()
  {
    skip_space();
    if (pos_ == text_.size())
      throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      const int operand = factor();
      return push({Op::Negate, 0.0, 0, operand, -1});
    }
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      expect(')');
      return inner;
    }
    if (text_.substr(pos_, 2) == "mu") {
      pos_ += 2;
      expect('[');
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      if (start == pos_)
        throw ParseError("expected parameter index", pos_);
      int index = 0;
      const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, index);
      if (ec != std::errc())
        throw ParseError("parameter index out of range", start);
      if (index >= num_params_)
        throw ConfigError("parameter index mu[" + std::to_string(index) + "] out of bounds for p = " +
                          std::to_string(num_params_) + " (byte " + std::to_string(start) + ")");
      expect(']');
      return push({Op::Param, 0.0, index, -1, -1});
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return number();
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  int number()
  {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0)
      throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
        ++pos_;
      if (digits() == 0)
        throw ParseError("malformed exponent", start);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_)
      throw ParseError("malformed number", start);
    return push({Op::Number, value, 0, -1, -1});
  }

  std::string_view text_;
  int num_params_;
  std::size_t pos_ = 0;
  ThetaExpression out_;
};

ThetaExpression ThetaExpression::parse(std::string_view text, int num_params)
{
  return ExpressionParser(text, num_params).run();
}

ThetaExpression ThetaExpression::constant(double value)
{
  ThetaExpression e;
  e.nodes_.push_back({Op::Number, value, 0, -1, -1});
  return e;
}

ThetaExpression ThetaExpression::parameter(int index)
{
  ThetaExpression e;
  e.nodes_.push_back({Op::Param, 0.0, index, -1, -1});
  return e;
}

double ThetaExpression::evaluate(const Vector& mu) const
{
  if (nodes_.empty())
    throw ConfigError("evaluating an empty expression");
  std::vector<double> value(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
    case Op::Number: value[i] = n.value; break;
    case Op::Param:
      if (n.index >= mu.size())
        throw ConfigError("mu[" + std::to_string(n.index) + "] requested from a point of dimension " +
                          std::to_string(mu.size()));
      value[i] = mu[n.index];
      break;
    case Op::Negate: value[i] = -value[n.lhs]; break;
    case Op::Add: value[i] = value[n.lhs] + value[n.rhs]; break;
    case Op::Sub: value[i] = value[n.lhs] - value[n.rhs]; break;
    case Op::Mul: value[i] = value[n.lhs] * value[n.rhs]; break;
    case Op::Div: value[i] = value[n.lhs] / value[n.rhs]; break;
    }
  }
  return value.back();
}

namespace {

void print(const std::vector<ThetaExpression::Node>& nodes, int i, std::string& out)
{
  using Op = ThetaExpression::Op;
  const auto& n = nodes[static_cast<std::size_t>(i)];
  switch (n.op) {
  case Op::Number: {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
    out.append(buf.data(), ptr);
    return;
  }
  case Op::Param: out += "mu[" + std::to_string(n.index) + "]"; return;
  case Op::Negate:
    out += '-';
    print(nodes, n.lhs, out);
    return;
  default: break;
  }
  const char symbol = n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : '/';
  out += '(';
  print(nodes, n.lhs, out);
  out += symbol;
  print(nodes, n.rhs, out);
  out += ')';
}

} // namespace

std::string ThetaExpression::to_string() const
{
  std::string out;
  if (!nodes_.empty())
    print(nodes_, static_cast<int>(nodes_.size()) - 1, out);
  return out;
}

int ThetaExpression::max_param_index() const
{
  int m = -1;
  for (const auto& n : nodes_)
    if (n.op == Op::Param && n.index > m)
      m = n.index;
  return m;
}

} // namespace romkit
