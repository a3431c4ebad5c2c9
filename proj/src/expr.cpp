#include "lgeo/expr.hpp"

#include <cctype>
#include <cmath>
#include <set>

namespace lgeo {

namespace {

ExprPtr make_const(double c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Const;
  n->value = c;
  return n;
}

ExprPtr make_var(const std::string& name) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Var;
  n->name = name;
  return n;
}

ExprPtr make_unary(UnaryOp op, ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Unary;
  n->uop = op;
  n->a = std::move(a);
  return n;
}

ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->bop = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const ExprPtr& e) { return e->kind == ExprNode::Kind::Const; }
bool is_const(const ExprPtr& e, double v) {
  return is_const(e) && e->value == v;
}

double eval_unary(UnaryOp op, double x) {
  switch (op) {
    case UnaryOp::Neg:
      return -x;
    case UnaryOp::Sin:
      return std::sin(x);
    case UnaryOp::Cos:
      return std::cos(x);
    case UnaryOp::Sinh:
      return std::sinh(x);
    case UnaryOp::Cosh:
      return std::cosh(x);
    case UnaryOp::Exp:
      return std::exp(x);
    case UnaryOp::Ln:
      if (x <= 0.0) throw EvalError("ln of nonpositive value");
      return std::log(x);
    case UnaryOp::Sqrt:
      if (x < 0.0) throw EvalError("sqrt of negative value");
      return std::sqrt(x);
    case UnaryOp::Abs:
      return std::abs(x);
  }
  throw EvalError("unknown unary op");
}

double eval_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add:
      return a + b;
    case BinaryOp::Sub:
      return a - b;
    case BinaryOp::Mul:
      return a * b;
    case BinaryOp::Div:
      if (b == 0.0) throw EvalError("division by zero");
      return a / b;
    case BinaryOp::Pow: {
      double r = std::pow(a, b);
      if (!std::isfinite(r)) throw EvalError("pow out of domain");
      return r;
    }
  }
  throw EvalError("unknown binary op");
}

double eval_node(const ExprNode& n, const Bindings& bindings) {
  switch (n.kind) {
    case ExprNode::Kind::Const:
      return n.value;
    case ExprNode::Kind::Var: {
      auto it = bindings.find(n.name);
      if (it == bindings.end())
        throw EvalError("unbound variable '" + n.name + "'");
      return it->second;
    }
    case ExprNode::Kind::Unary:
      return eval_unary(n.uop, eval_node(*n.a, bindings));
    case ExprNode::Kind::Binary:
      return eval_binary(n.bop, eval_node(*n.a, bindings),
                         eval_node(*n.b, bindings));
  }
  throw EvalError("malformed expression node");
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg:
      return "-";
    case UnaryOp::Sin:
      return "sin";
    case UnaryOp::Cos:
      return "cos";
    case UnaryOp::Sinh:
      return "sinh";
    case UnaryOp::Cosh:
      return "cosh";
    case UnaryOp::Exp:
      return "exp";
    case UnaryOp::Ln:
      return "ln";
    case UnaryOp::Sqrt:
      return "sqrt";
    case UnaryOp::Abs:
      return "abs";
  }
  return "?";
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case ExprNode::Kind::Const: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", n.value);
      if (n.value < 0) {
        out += '(';
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      break;
    }
    case ExprNode::Kind::Var:
      out += n.name;
      break;
    case ExprNode::Kind::Unary:
      if (n.uop == UnaryOp::Neg) {
        out += "(-";
        print_node(*n.a, out);
        out += ')';
      } else {
        out += unary_name(n.uop);
        out += '(';
        print_node(*n.a, out);
        out += ')';
      }
      break;
    case ExprNode::Kind::Binary: {
      char op = '?';
      switch (n.bop) {
        case BinaryOp::Add:
          op = '+';
          break;
        case BinaryOp::Sub:
          op = '-';
          break;
        case BinaryOp::Mul:
          op = '*';
          break;
        case BinaryOp::Div:
          op = '/';
          break;
        case BinaryOp::Pow:
          op = '^';
          break;
      }
      out += '(';
      print_node(*n.a, out);
      out += op;
      print_node(*n.b, out);
      out += ')';
      break;
    }
  }
}

void collect_vars(const ExprNode& n, std::set<std::string>& vars) {
  switch (n.kind) {
    case ExprNode::Kind::Const:
      break;
    case ExprNode::Kind::Var:
      vars.insert(n.name);
      break;
    case ExprNode::Kind::Unary:
      collect_vars(*n.a, vars);
      break;
    case ExprNode::Kind::Binary:
      collect_vars(*n.a, vars);
      collect_vars(*n.b, vars);
      break;
  }
}

ExprPtr fold_unary(UnaryOp op, ExprPtr a) {
  if (is_const(a)) return make_const(eval_unary(op, a->value));
  return make_unary(op, std::move(a));
}

// Constant folding plus identity elimination; no algebraic simplification
// beyond that.
ExprPtr fold_binary(BinaryOp op, ExprPtr a, ExprPtr b) {
  if (is_const(a) && is_const(b))
    return make_const(eval_binary(op, a->value, b->value));
  switch (op) {
    case BinaryOp::Add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case BinaryOp::Sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make_unary(UnaryOp::Neg, std::move(b));
      break;
    case BinaryOp::Mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case BinaryOp::Div:
      if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case BinaryOp::Pow:
      if (is_const(b, 1.0)) return a;
      if (is_const(b, 0.0)) return make_const(1.0);
      break;
  }
  return make_binary(op, std::move(a), std::move(b));
}

ExprPtr diff_node(const ExprPtr& e, const std::string& var);

ExprPtr diff_unary(const ExprNode& n, const std::string& var) {
  ExprPtr da = diff_node(n.a, var);
  switch (n.uop) {
    case UnaryOp::Neg:
      return fold_unary(UnaryOp::Neg, da);
    case UnaryOp::Sin:
      return fold_binary(BinaryOp::Mul, fold_unary(UnaryOp::Cos, n.a), da);
    case UnaryOp::Cos:
      return fold_unary(
          UnaryOp::Neg,
          fold_binary(BinaryOp::Mul, fold_unary(UnaryOp::Sin, n.a), da));
    case UnaryOp::Sinh:
      return fold_binary(BinaryOp::Mul, fold_unary(UnaryOp::Cosh, n.a), da);
    case UnaryOp::Cosh:
      return fold_binary(BinaryOp::Mul, fold_unary(UnaryOp::Sinh, n.a), da);
    case UnaryOp::Exp:
      return fold_binary(BinaryOp::Mul, fold_unary(UnaryOp::Exp, n.a), da);
    case UnaryOp::Ln:
      return fold_binary(BinaryOp::Div, da, n.a);
    case UnaryOp::Sqrt:
      return fold_binary(
          BinaryOp::Div, da,
          fold_binary(BinaryOp::Mul, make_const(2.0),
                      fold_unary(UnaryOp::Sqrt, n.a)));
    case UnaryOp::Abs:
      throw ExprError("abs is not symbolically differentiable");
  }
  throw ExprError("unknown unary op in diff");
}

ExprPtr diff_node(const ExprPtr& e, const std::string& var) {
  const ExprNode& n = *e;
  switch (n.kind) {
    case ExprNode::Kind::Const:
      return make_const(0.0);
    case ExprNode::Kind::Var:
      return make_const(n.name == var ? 1.0 : 0.0);
    case ExprNode::Kind::Unary:
      return diff_unary(n, var);
    case ExprNode::Kind::Binary: {
      ExprPtr da = diff_node(n.a, var);
      ExprPtr db = diff_node(n.b, var);
      switch (n.bop) {
        case BinaryOp::Add:
          return fold_binary(BinaryOp::Add, da, db);
        case BinaryOp::Sub:
          return fold_binary(BinaryOp::Sub, da, db);
        case BinaryOp::Mul:
          return fold_binary(BinaryOp::Add,
                             fold_binary(BinaryOp::Mul, da, n.b),
                             fold_binary(BinaryOp::Mul, n.a, db));
        case BinaryOp::Div:
          // (a/b)' = a'/b - a b' / b^2
          return fold_binary(
              BinaryOp::Sub, fold_binary(BinaryOp::Div, da, n.b),
              fold_binary(BinaryOp::Div,
                          fold_binary(BinaryOp::Mul, n.a, db),
                          fold_binary(BinaryOp::Mul, n.b, n.b)));
        case BinaryOp::Pow:
          if (is_const(n.b)) {
            // (a^c)' = c a^(c-1) a'
            return fold_binary(
                BinaryOp::Mul,
                fold_binary(BinaryOp::Mul, n.b,
                            fold_binary(BinaryOp::Pow, n.a,
                                        make_const(n.b->value - 1.0))),
                da);
          }
          // a^b = exp(b ln a)
          return fold_binary(
              BinaryOp::Mul, fold_binary(BinaryOp::Pow, n.a, n.b),
              fold_binary(
                  BinaryOp::Add,
                  fold_binary(BinaryOp::Mul, db, fold_unary(UnaryOp::Ln, n.a)),
                  fold_binary(BinaryOp::Div,
                              fold_binary(BinaryOp::Mul, n.b, da), n.a)));
      }
      break;
    }
  }
  throw ExprError("malformed node in diff");
}

// Recursive-descent parser.
class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src) {}

  ExprPtr parse_all() {
    skip_ws();
    if (pos_ >= src_.size()) throw ExprError("empty expression", pos_);
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos_ < src_.size())
      throw ExprError("unexpected trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace((unsigned char)src_[pos_]))
      ++pos_;
  }

  bool accept(char c) {
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

  ExprPtr parse_sum() {
    ExprPtr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = fold_binary(BinaryOp::Add, e, parse_term());
      else if (accept('-'))
        e = fold_binary(BinaryOp::Sub, e, parse_term());
      else
        return e;
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_unary();
    for (;;) {
      if (accept('*'))
        e = fold_binary(BinaryOp::Mul, e, parse_unary());
      else if (accept('/'))
        e = fold_binary(BinaryOp::Div, e, parse_unary());
      else
        return e;
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) return fold_unary(UnaryOp::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    // Right associative; exponent binds tighter than unary minus on its
    // right operand (so x^-2 parses).
    if (accept('^')) return fold_binary(BinaryOp::Pow, base, parse_unary());
    return base;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ExprError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      if (!accept(')')) throw ExprError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit((unsigned char)c) || c == '.') return parse_number();
    if (std::isalpha((unsigned char)c) || c == '_') return parse_ident();
    throw ExprError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr parse_number() {
    std::size_t start = pos_;
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ExprError("invalid number", start);
    pos_ += static_cast<std::size_t>(end - begin);
    return make_const(v);
  }

  ExprPtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
      ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    if (peek() == '(') {
      UnaryOp op;
      if (name == "sin")
        op = UnaryOp::Sin;
      else if (name == "cos")
        op = UnaryOp::Cos;
      else if (name == "sinh")
        op = UnaryOp::Sinh;
      else if (name == "cosh")
        op = UnaryOp::Cosh;
      else if (name == "exp")
        op = UnaryOp::Exp;
      else if (name == "ln" || name == "log")
        op = UnaryOp::Ln;
      else if (name == "sqrt")
        op = UnaryOp::Sqrt;
      else if (name == "abs")
        op = UnaryOp::Abs;
      else
        throw ExprError("unknown function '" + name + "'", start);
      accept('(');
      ExprPtr arg = parse_sum();
      if (!accept(')')) throw ExprError("expected ')'", pos_);
      return fold_unary(op, arg);
    }
    if (name == "pi") return make_const(M_PI);
    if (name == "e") return make_const(M_E);
    // Unknown identifiers are variables; flagged only at eval time.
    return make_var(name);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::constant(double c) { return Expr(make_const(c)); }
Expr Expr::variable(const std::string& name) { return Expr(make_var(name)); }

const ExprNode& Expr::node() const {
  if (!node_) throw ExprError("empty expression");
  return *node_;
}

double Expr::eval(const Bindings& bindings) const {
  double v = eval_node(node(), bindings);
  // Overflow to +-inf is passed through; NaN is always a domain error.
  if (std::isnan(v)) throw EvalError("non-finite result");
  return v;
}

Expr Expr::diff(const std::string& var) const {
  return Expr(diff_node(node_, var));
}

std::string Expr::print() const {
  std::string out;
  print_node(node(), out);
  return out;
}

std::vector<std::string> Expr::variables() const {
  std::set<std::string> vars;
  collect_vars(node(), vars);
  return {vars.begin(), vars.end()};
}

Expr Expr::operator+(const Expr& rhs) const {
  return Expr(fold_binary(BinaryOp::Add, node_, rhs.node_));
}
Expr Expr::operator-(const Expr& rhs) const {
  return Expr(fold_binary(BinaryOp::Sub, node_, rhs.node_));
}
Expr Expr::operator*(const Expr& rhs) const {
  return Expr(fold_binary(BinaryOp::Mul, node_, rhs.node_));
}
Expr Expr::operator/(const Expr& rhs) const {
  return Expr(fold_binary(BinaryOp::Div, node_, rhs.node_));
}
Expr Expr::operator-() const { return Expr(fold_unary(UnaryOp::Neg, node_)); }

Expr parse(const std::string& source) {
  Parser p(source);
  return Expr(p.parse_all());
}

Expr apply_unary(UnaryOp op, const Expr& a) {
  return Expr(fold_unary(op, a.raw()));
}

Expr apply_binary(BinaryOp op, const Expr& a, const Expr& b) {
  return Expr(fold_binary(op, a.raw(), b.raw()));
}

}  // namespace lgeo
