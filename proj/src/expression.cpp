#include "finsler/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace finsler {

namespace expr {

bool depends_on_y(const Node& node) {
  struct Visitor {
    bool operator()(const Node::Constant&) const { return false; }
    bool operator()(const Node::Variable& v) const { return v.is_y; }
    bool operator()(const Node::Unary& u) const { return depends_on_y(*u.arg); }
    bool operator()(const Node::Binary& b) const {
      return depends_on_y(*b.lhs) || depends_on_y(*b.rhs);
    }
    bool operator()(const Node::Call& c) const { return depends_on_y(*c.arg); }
  };
  return std::visit(Visitor{}, node.data);
}

namespace {

class Parser {
 public:
  Parser(const std::string& src, int dim) : src_(src), dim_(dim) {}

  NodePtr run() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression error at position " + std::to_string(pos_) + " in \"" +
                      src_ + "\": " + what);
  }

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

  static NodePtr make(Node::Constant c) { return std::make_shared<Node>(Node{c}); }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = std::make_shared<Node>(Node{Node::Binary{BinaryOp::Add, lhs, parse_term()}});
      } else if (eat('-')) {
        lhs = std::make_shared<Node>(Node{Node::Binary{BinaryOp::Sub, lhs, parse_term()}});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (eat('*')) {
        lhs = std::make_shared<Node>(Node{Node::Binary{BinaryOp::Mul, lhs, parse_unary()}});
      } else if (eat('/')) {
        lhs = std::make_shared<Node>(Node{Node::Binary{BinaryOp::Div, lhs, parse_unary()}});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return std::make_shared<Node>(Node{Node::Unary{parse_unary()}});
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (eat('^')) {
      // right-associative; exponent may carry a sign
      NodePtr exponent = parse_unary();
      return std::make_shared<Node>(Node{Node::Binary{BinaryOp::Pow, base, exponent}});
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    if (eat('(')) {
      NodePtr e = parse_expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<size_t>(end - begin);
    return make(Node::Constant{v});
  }

  NodePtr parse_identifier() {
    const size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name = src_.substr(start, pos_ - start);

    if (name == "pi") return make(Node::Constant{M_PI});

    if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1) {
      bool digits = true;
      for (size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        const int index = std::stoi(name.substr(1));
        if (index < 1 || index > dim_)
          fail("variable " + name + " out of range for dimension " + std::to_string(dim_));
        return std::make_shared<Node>(Node{Node::Variable{name[0] == 'y', index - 1}});
      }
    }

    Function fn;
    if (name == "sin") {
      fn = Function::Sin;
    } else if (name == "cos") {
      fn = Function::Cos;
    } else if (name == "exp") {
      fn = Function::Exp;
    } else if (name == "sqrt") {
      fn = Function::Sqrt;
    } else {
      fail("unknown identifier '" + name + "'");
    }
    if (!eat('(')) fail("expected '(' after function name");
    NodePtr arg = parse_expr();
    if (!eat(')')) fail("missing ')'");
    return std::make_shared<Node>(Node{Node::Call{fn, arg}});
  }

  const std::string& src_;
  int dim_;
  size_t pos_ = 0;
};

}  // namespace

}  // namespace expr

Expression Expression::parse(const std::string& source, int dim) {
  Expression e;
  e.source_ = source;
  e.root_ = expr::Parser(source, dim).run();
  return e;
}

VectorFieldDef::VectorFieldDef(std::vector<Expression> components)
    : components_(std::move(components)) {
  for (const auto& c : components_)
    if (c.depends_on_y())
      throw ConfigError("vector field component \"" + c.source() + "\" references y");
}

VectorFieldDef VectorFieldDef::parse(const std::vector<std::string>& sources, int dim) {
  if (static_cast<int>(sources.size()) != dim)
    throw ConfigError("vector field needs exactly " + std::to_string(dim) + " components");
  std::vector<Expression> comps;
  comps.reserve(sources.size());
  for (const auto& s : sources) comps.push_back(Expression::parse(s, dim));
  return VectorFieldDef(comps);
}

}  // namespace finsler
