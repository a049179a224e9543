#include "pllab/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace pllab::expr {

NodePtr number(double v) { return std::make_shared<Node>(NodeKind::kNumber, v, -1, nullptr, nullptr); }
NodePtr pi_constant() { return std::make_shared<Node>(NodeKind::kPi, 0.0, -1, nullptr, nullptr); }
NodePtr variable(int index) { return std::make_shared<Node>(NodeKind::kVar, 0.0, index, nullptr, nullptr); }
NodePtr unary(NodeKind k, NodePtr a) { return std::make_shared<Node>(k, 0.0, -1, std::move(a), nullptr); }
NodePtr binary(NodeKind k, NodePtr a, NodePtr b) {
  return std::make_shared<Node>(k, 0.0, -1, std::move(a), std::move(b));
}

namespace {

double eval_node(const Node& n, const Vec& x) {
  switch (n.kind) {
    case NodeKind::kNumber: return n.value;
    case NodeKind::kPi: return M_PI;
    case NodeKind::kVar: return x[n.var];
    case NodeKind::kNeg: return -eval_node(*n.a, x);
    case NodeKind::kAdd: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case NodeKind::kSub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case NodeKind::kMul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case NodeKind::kDiv: return eval_node(*n.a, x) / eval_node(*n.b, x);
    case NodeKind::kPow: return std::pow(eval_node(*n.a, x), eval_node(*n.b, x));
    case NodeKind::kSin: return std::sin(eval_node(*n.a, x));
    case NodeKind::kCos: return std::cos(eval_node(*n.a, x));
    case NodeKind::kExp: return std::exp(eval_node(*n.a, x));
    case NodeKind::kLog: return std::log(eval_node(*n.a, x));
    case NodeKind::kSqrt: return std::sqrt(eval_node(*n.a, x));
    case NodeKind::kAbs: return std::abs(eval_node(*n.a, x));
  }
  return 0.0;
}

bool is_zero(const NodePtr& n) { return n->kind == NodeKind::kNumber && n->value == 0.0; }
bool is_one(const NodePtr& n) { return n->kind == NodeKind::kNumber && n->value == 1.0; }

// Smart constructors used only when building derivatives; keeps the trees
// from growing uncontrollably. parse() itself never folds, so pretty-print
// round trips stay structural.
NodePtr s_add(NodePtr a, NodePtr b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  return binary(NodeKind::kAdd, std::move(a), std::move(b));
}
NodePtr s_sub(NodePtr a, NodePtr b) {
  if (is_zero(b)) return a;
  if (is_zero(a)) return unary(NodeKind::kNeg, std::move(b));
  return binary(NodeKind::kSub, std::move(a), std::move(b));
}
NodePtr s_mul(NodePtr a, NodePtr b) {
  if (is_zero(a) || is_zero(b)) return number(0.0);
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  return binary(NodeKind::kMul, std::move(a), std::move(b));
}
NodePtr s_div(NodePtr a, NodePtr b) {
  if (is_zero(a)) return number(0.0);
  if (is_one(b)) return a;
  return binary(NodeKind::kDiv, std::move(a), std::move(b));
}
NodePtr s_neg(NodePtr a) {
  if (is_zero(a)) return number(0.0);
  return unary(NodeKind::kNeg, std::move(a));
}

NodePtr diff_node(const NodePtr& n, int index) {
  switch (n->kind) {
    case NodeKind::kNumber:
    case NodeKind::kPi:
      return number(0.0);
    case NodeKind::kVar:
      return number(n->var == index ? 1.0 : 0.0);
    case NodeKind::kNeg:
      return s_neg(diff_node(n->a, index));
    case NodeKind::kAdd:
      return s_add(diff_node(n->a, index), diff_node(n->b, index));
    case NodeKind::kSub:
      return s_sub(diff_node(n->a, index), diff_node(n->b, index));
    case NodeKind::kMul:
      return s_add(s_mul(diff_node(n->a, index), n->b), s_mul(n->a, diff_node(n->b, index)));
    case NodeKind::kDiv:
      // (a/b)' = a'/b - a b' / b^2
      return s_sub(s_div(diff_node(n->a, index), n->b),
                   s_div(s_mul(n->a, diff_node(n->b, index)),
                         binary(NodeKind::kPow, n->b, number(2.0))));
    case NodeKind::kPow: {
      const NodePtr& base = n->a;
      const NodePtr& expo = n->b;
      NodePtr db = diff_node(base, index);
      NodePtr de = diff_node(expo, index);
      if (is_zero(de)) {
        // d(base^c) = c * base^(c-1) * base'
        NodePtr em1 = binary(NodeKind::kSub, expo, number(1.0));
        return s_mul(s_mul(expo, binary(NodeKind::kPow, base, em1)), db);
      }
      // General case: base^expo * (expo' log(base) + expo base'/base).
      NodePtr term = s_add(s_mul(de, unary(NodeKind::kLog, base)),
                           s_div(s_mul(expo, db), base));
      return s_mul(std::make_shared<Node>(*n), term);
    }
    case NodeKind::kSin:
      return s_mul(unary(NodeKind::kCos, n->a), diff_node(n->a, index));
    case NodeKind::kCos:
      return s_neg(s_mul(unary(NodeKind::kSin, n->a), diff_node(n->a, index)));
    case NodeKind::kExp:
      return s_mul(std::make_shared<Node>(*n), diff_node(n->a, index));
    case NodeKind::kLog:
      return s_div(diff_node(n->a, index), n->a);
    case NodeKind::kSqrt:
      return s_div(diff_node(n->a, index),
                   s_mul(number(2.0), std::make_shared<Node>(*n)));
    case NodeKind::kAbs:
      throw DifferentiationError("cannot differentiate abs()");
  }
  return number(0.0);
}

bool contains_kind(const NodePtr& n, NodeKind k) {
  if (!n) return false;
  if (n->kind == k) return true;
  return contains_kind(n->a, k) || contains_kind(n->b, k);
}

bool equal_nodes(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind || a->value != b->value || a->var != b->var) return false;
  return equal_nodes(a->a, b->a) && equal_nodes(a->b, b->b);
}

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::kAdd:
    case NodeKind::kSub: return 1;
    case NodeKind::kMul:
    case NodeKind::kDiv: return 2;
    case NodeKind::kNeg: return 3;
    case NodeKind::kPow: return 4;
    default: return 5;
  }
}

void print_node(const NodePtr& n, std::ostream& os, int parent_prec, bool right_side) {
  int prec = precedence(n->kind);
  bool parens = prec < parent_prec ||
                (prec == parent_prec && right_side && prec <= 2) ||
                // power is right associative: parenthesize a left-child power
                (n->kind == NodeKind::kPow && parent_prec == 4 && !right_side);
  auto open = [&] { if (parens) os << '('; };
  auto close = [&] { if (parens) os << ')'; };
  switch (n->kind) {
    case NodeKind::kNumber: {
      if (n->value < 0) {
        os << '(' << n->value << ')';
      } else {
        std::ostringstream tmp;
        tmp.precision(17);
        tmp << n->value;
        os << tmp.str();
      }
      return;
    }
    case NodeKind::kPi: os << "pi"; return;
    case NodeKind::kVar: os << 'x' << (n->var + 1); return;
    case NodeKind::kNeg:
      open();
      os << '-';
      print_node(n->a, os, 3, true);
      close();
      return;
    case NodeKind::kAdd:
    case NodeKind::kSub:
    case NodeKind::kMul:
    case NodeKind::kDiv:
    case NodeKind::kPow: {
      const char* op = n->kind == NodeKind::kAdd ? " + "
                       : n->kind == NodeKind::kSub ? " - "
                       : n->kind == NodeKind::kMul ? "*"
                       : n->kind == NodeKind::kDiv ? "/"
                                                   : "^";
      open();
      print_node(n->a, os, prec, false);
      os << op;
      print_node(n->b, os, prec, true);
      close();
      return;
    }
    case NodeKind::kSin: os << "sin("; print_node(n->a, os, 0, false); os << ')'; return;
    case NodeKind::kCos: os << "cos("; print_node(n->a, os, 0, false); os << ')'; return;
    case NodeKind::kExp: os << "exp("; print_node(n->a, os, 0, false); os << ')'; return;
    case NodeKind::kLog: os << "log("; print_node(n->a, os, 0, false); os << ')'; return;
    case NodeKind::kSqrt: os << "sqrt("; print_node(n->a, os, 0, false); os << ')'; return;
    case NodeKind::kAbs: os << "abs("; print_node(n->a, os, 0, false); os << ')'; return;
  }
}

// ---------------------------------------------------------------------------
// Recursive descent parser.

class Parser {
 public:
  Parser(const std::string& text, std::vector<std::string> names)
      : text_(text), names_(std::move(names)) {}

  NodePtr run() {
    NodePtr e = additive();
    skip_ws();
    if (pos_ != text_.size())
      fail({"operator", "end of input"});
    return e;
  }

 private:
  const std::string& text_;
  std::vector<std::string> names_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::ostringstream msg;
    msg << "parse error at offset " << pos_ << ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg << (i + 1 == expected.size() ? " or " : ", ");
      msg << expected[i];
    }
    throw ParseError(msg.str(), pos_, std::move(expected));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr additive() {
    NodePtr e = multiplicative();
    for (;;) {
      if (eat('+')) e = binary(NodeKind::kAdd, e, multiplicative());
      else if (eat('-')) e = binary(NodeKind::kSub, e, multiplicative());
      else return e;
    }
  }

  NodePtr multiplicative() {
    NodePtr e = unary_expr();
    for (;;) {
      if (eat('*')) e = binary(NodeKind::kMul, e, unary_expr());
      else if (eat('/')) e = binary(NodeKind::kDiv, e, unary_expr());
      else return e;
    }
  }

  NodePtr unary_expr() {
    if (eat('-')) return unary(NodeKind::kNeg, unary_expr());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) {
      // right associative; the exponent may start with a unary minus
      NodePtr expo = eat('-') ? unary(NodeKind::kNeg, power()) : power();
      return binary(NodeKind::kPow, base, expo);
    }
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail({"number", "variable", "function", "'('"});
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = additive();
      if (!eat(')')) fail({"')'"});
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
    fail({"number", "variable", "function", "'('"});
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    // exponent suffix, e.g. 1.5e-3
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // not an exponent; leave the 'e' for a name (error later)
      }
    }
    try {
      return number(std::stod(text_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      pos_ = start;
      fail({"number"});
    }
  }

  NodePtr parse_name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    if (name == "pi") return pi_constant();
    static const struct { const char* name; NodeKind kind; } kFns[] = {
        {"sin", NodeKind::kSin}, {"cos", NodeKind::kCos}, {"exp", NodeKind::kExp},
        {"log", NodeKind::kLog}, {"sqrt", NodeKind::kSqrt}, {"abs", NodeKind::kAbs}};
    for (const auto& fn : kFns) {
      if (name == fn.name) {
        if (!eat('(')) fail({"'('"});
        NodePtr arg = additive();
        if (!eat(')')) fail({"')'"});
        return unary(fn.kind, arg);
      }
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (name == names_[i]) return variable(static_cast<int>(i));
    }
    pos_ = start;
    fail({"variable", "function", "pi"});
  }
};

}  // namespace

double Expression::eval(const Vec& x) const { return eval_node(*root_, x); }

Expression Expression::derivative(int index) const {
  return Expression(diff_node(root_, index), dim_);
}

std::string Expression::to_string() const {
  std::ostringstream os;
  print_node(root_, os, 0, false);
  return os.str();
}

bool Expression::structurally_equal(const Expression& other) const {
  return equal_nodes(root_, other.root_);
}

bool Expression::contains(NodeKind kind) const { return contains_kind(root_, kind); }

Expression parse(const std::string& text, int dim) {
  std::vector<std::string> names;
  names.reserve(dim);
  for (int i = 1; i <= dim; ++i) names.push_back("x" + std::to_string(i));
  return parse(text, names);
}

Expression parse(const std::string& text, const std::vector<std::string>& var_names) {
  Parser p(text, var_names);
  return Expression(p.run(), static_cast<int>(var_names.size()));
}

}  // namespace pllab::expr
