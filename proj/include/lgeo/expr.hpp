#ifndef LGEO_EXPR_HPP_
#define LGEO_EXPR_HPP_

// Scalar expression trees: parse, print, evaluate, differentiate.
// Used for metric coefficients (tau, E, F, G, f, beta, Omega, ...)
// supplied as text in configs and CLI flags.

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgeo {

class ExprError : public std::runtime_error {
 public:
  ExprError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  explicit ExprError(const std::string& msg)
      : std::runtime_error(msg), offset_(0) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Thrown on evaluation outside the function domain (ln of nonpositive,
// division by zero, ...). Never silently returns NaN.
class EvalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class UnaryOp { Neg, Sin, Cos, Sinh, Cosh, Exp, Ln, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Const, Var, Unary, Binary } kind;
  double value = 0.0;       // Const
  std::string name;         // Var
  UnaryOp uop{};            // Unary
  BinaryOp bop{};           // Binary
  ExprPtr a, b;             // children (Unary uses a only)
};

using Bindings = std::map<std::string, double>;

// Immutable after construction; evaluation is pure and reentrant.
class Expr {
 public:
  Expr() = default;
  explicit Expr(ExprPtr node) : node_(std::move(node)) {}

  static Expr constant(double c);
  static Expr variable(const std::string& name);

  bool empty() const { return node_ == nullptr; }
  const ExprNode& node() const;
  ExprPtr raw() const { return node_; }

  double eval(const Bindings& bindings) const;
  Expr diff(const std::string& var) const;
  std::string print() const;

  // Names of all variables appearing in the tree.
  std::vector<std::string> variables() const;

  Expr operator+(const Expr& rhs) const;
  Expr operator-(const Expr& rhs) const;
  Expr operator*(const Expr& rhs) const;
  Expr operator/(const Expr& rhs) const;
  Expr operator-() const;

 private:
  ExprPtr node_;
};

// Standard infix grammar with precedence ^ > unary- > */ > +-,
// function call syntax name(arg), constants pi and e.
Expr parse(const std::string& source);

Expr apply_unary(UnaryOp op, const Expr& a);
Expr apply_binary(BinaryOp op, const Expr& a, const Expr& b);

}  // namespace lgeo

#endif  // LGEO_EXPR_HPP_
