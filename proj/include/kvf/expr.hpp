#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "kvf/jet.hpp"

namespace kvf {

enum class NodeKind : int {
  Number,
  Variable,
  Neg,
  Sin,
  Cos,
  Tan,
  Exp,
  Log,
  Sqrt,
  Sinh,
  Cosh,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

struct ExprNode {
  NodeKind kind;
  int a = -1;           // first child (unary operand, left operand, pow base)
  int b = -1;           // second child for binary ops other than Pow
  double number = 0.0;  // Number value, or the literal exponent for Pow
  int var = -1;         // coordinate index for Variable
};

// Immutable symbolic expression over a fixed coordinate list. Nodes live in a
// flat arena ordered children-before-parent, so evaluation is a single linear
// pass. Safe to share across threads once constructed.
class Expression {
 public:
  // Grammar (whitespace insignificant, identifiers [a-zA-Z_][a-zA-Z0-9_]*):
  //   expr   := term (('+'|'-') term)*
  //   term   := factor (('*'|'/') factor)*
  //   factor := '-' factor | base ('^' number)?
  //   base   := number | ident | ident '(' expr ')' | '(' expr ')'
  // Functions: sin cos tan exp log sqrt sinh cosh.
  // Throws ParseError (with byte offset) or UndeclaredVariableError.
  static Expression parse(std::string_view source, const std::vector<std::string>& coords);

  // Fully parenthesized text that re-parses to a structurally identical tree.
  std::string serialize() const { return serialize_node(root_); }

  double eval(const Eigen::VectorXd& x) const;
  // Same tree evaluated in extended precision; used by finite-difference
  // reference checks where double roundoff would dominate the comparison.
  long double eval_longdouble(const Eigen::VectorXd& x) const;
  Jet2 eval_jet2(const Eigen::VectorXd& x) const;

  bool same_structure(const Expression& other) const;

  const std::vector<std::string>& coords() const { return coords_; }
  int dimension() const { return static_cast<int>(coords_.size()); }
  const std::vector<ExprNode>& nodes() const { return nodes_; }
  int root() const { return root_; }

 private:
  Expression() = default;
  std::string serialize_node(int node) const;
  template <class T>
  T eval_impl(const Eigen::VectorXd& x) const;
  bool same_structure_node(int node, const Expression& other, int other_node) const;

  friend class Parser;

  std::vector<ExprNode> nodes_;
  int root_ = -1;
  std::vector<std::string> coords_;
};

}  // namespace kvf
