#pragma once

// Minimal analytic expression language for scenario configs: operators
// + - * / ^, functions sin cos exp sqrt, variables x1..xn and y1..yn, the
// constant pi, numeric literals, parentheses.  Expressions evaluate through
// any scalar supporting the same function set, in particular Jet.

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/types.hpp"

namespace finsler {

namespace expr {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Exp, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  struct Constant {
    double value;
  };
  struct Variable {
    bool is_y;
    int index;  // zero-based
  };
  struct Unary {
    NodePtr arg;  // negation
  };
  struct Binary {
    BinaryOp op;
    NodePtr lhs, rhs;
  };
  struct Call {
    Function fn;
    NodePtr arg;
  };
  std::variant<Constant, Variable, Unary, Binary, Call> data;
};

template <class S>
S evaluate(const Node& node, const VecX<S>& x, const VecX<S>& y) {
  using std::cos;
  using std::exp;
  using std::pow;
  using std::sin;
  using std::sqrt;
  struct Visitor {
    const VecX<S>& x;
    const VecX<S>& y;
    S operator()(const Node::Constant& c) const { return S(c.value); }
    S operator()(const Node::Variable& v) const { return v.is_y ? y[v.index] : x[v.index]; }
    S operator()(const Node::Unary& u) const { return -evaluate(*u.arg, x, y); }
    S operator()(const Node::Binary& b) const {
      switch (b.op) {
        case BinaryOp::Add:
          return evaluate(*b.lhs, x, y) + evaluate(*b.rhs, x, y);
        case BinaryOp::Sub:
          return evaluate(*b.lhs, x, y) - evaluate(*b.rhs, x, y);
        case BinaryOp::Mul:
          return evaluate(*b.lhs, x, y) * evaluate(*b.rhs, x, y);
        case BinaryOp::Div:
          return evaluate(*b.lhs, x, y) / evaluate(*b.rhs, x, y);
        case BinaryOp::Pow: {
          // constant exponents keep the integer fast path usable
          if (const auto* c = std::get_if<Node::Constant>(&b.rhs->data))
            return pow(evaluate(*b.lhs, x, y), c->value);
          return pow(evaluate(*b.lhs, x, y), evaluate(*b.rhs, x, y));
        }
      }
      throw Error("expression: unknown operator");
    }
    S operator()(const Node::Call& c) const {
      const S a = evaluate(*c.arg, x, y);
      switch (c.fn) {
        case Function::Sin:
          return sin(a);
        case Function::Cos:
          return cos(a);
        case Function::Exp:
          return exp(a);
        case Function::Sqrt:
          return sqrt(a);
      }
      throw Error("expression: unknown function");
    }
  };
  return std::visit(Visitor{x, y}, node.data);
}

bool depends_on_y(const Node& node);

}  // namespace expr

/// A parsed analytic expression over chart variables x1..xn (and optionally
/// y1..yn).
class Expression {
 public:
  Expression() = default;

  /// Parses `source` for an n-dimensional chart.  Throws ConfigError with
  /// position context on malformed input.
  static Expression parse(const std::string& source, int dim);

  bool empty() const { return root_ == nullptr; }
  bool depends_on_y() const { return root_ && expr::depends_on_y(*root_); }
  const std::string& source() const { return source_; }

  template <class S>
  S operator()(const VecX<S>& x, const VecX<S>& y) const {
    if (!root_) throw Error("Expression: evaluating empty expression");
    return expr::evaluate<S>(*root_, x, y);
  }

  double eval_d(const Vec& x, const Vec& y) const { return (*this)(x, y); }

 private:
  expr::NodePtr root_;
  std::string source_;
};

/// A smooth vector field on the base manifold, one expression per component;
/// components may not reference y.
class VectorFieldDef {
 public:
  VectorFieldDef() = default;
  explicit VectorFieldDef(std::vector<Expression> components);

  static VectorFieldDef parse(const std::vector<std::string>& sources, int dim);

  int dim() const { return static_cast<int>(components_.size()); }
  const Expression& component(int i) const { return components_.at(i); }

  template <class S>
  VecX<S> operator()(const VecX<S>& x) const {
    VecX<S> out(dim());
    VecX<S> dummy_y;  // components are x-only by construction
    for (int i = 0; i < dim(); ++i) out[i] = components_[i](x, dummy_y);
    return out;
  }

  Vec eval_d(const Vec& x) const { return (*this)(x); }

 private:
  std::vector<Expression> components_;
};

}  // namespace finsler
