#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pllab/errors.hpp"
#include "pllab/types.hpp"

namespace pllab::expr {

enum class NodeKind {
  kNumber,
  kPi,
  kVar,      // 0-based variable index
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kSin,
  kCos,
  kExp,
  kLog,
  kSqrt,
  kAbs,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable expression tree node. Children are shared, so derivatives can
/// reuse subtrees of the original expression.
struct Node {
  NodeKind kind;
  double value = 0.0;  // kNumber
  int var = -1;        // kVar
  NodePtr a, b;

  Node(NodeKind k, double v, int idx, NodePtr lhs, NodePtr rhs)
      : kind(k), value(v), var(idx), a(std::move(lhs)), b(std::move(rhs)) {}
};

NodePtr number(double v);
NodePtr pi_constant();
NodePtr variable(int index);
NodePtr unary(NodeKind k, NodePtr a);
NodePtr binary(NodeKind k, NodePtr a, NodePtr b);

/// An expression over variables x1..xd (or caller-supplied names).
class Expression {
 public:
  Expression() = default;
  Expression(NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}

  int dim() const { return dim_; }
  const NodePtr& root() const { return root_; }
  bool valid() const { return root_ != nullptr; }

  double eval(const Vec& x) const;

  /// Symbolic partial derivative with respect to variable `index`.
  /// Throws DifferentiationError when the tree contains abs.
  Expression derivative(int index) const;

  /// Re-parseable rendering; parsing it back yields a structurally
  /// identical tree.
  std::string to_string() const;

  bool structurally_equal(const Expression& other) const;

  bool contains(NodeKind kind) const;

 private:
  NodePtr root_;
  int dim_ = 0;
};

/// Parses `text` over variables named x1..xdim.
/// Grammar (precedence low to high): additive, multiplicative, unary minus,
/// power (right associative), atoms. Whitespace is insignificant.
Expression parse(const std::string& text, int dim);

/// Same grammar but with an explicit variable name list (e.g. u1,u2,z1).
Expression parse(const std::string& text, const std::vector<std::string>& var_names);

}  // namespace pllab::expr
