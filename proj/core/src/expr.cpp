#include "hyperfit/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace hyperfit::symreg {

namespace {

ExprPtr make(Op op, double v, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->value = v;
  e->left = std::move(l);
  e->right = std::move(r);
  return e;
}

bool is_const(const ExprPtr& e, double v) { return e->op == Op::Const && e->value == v; }

}  // namespace

ExprPtr constant(double v) { return make(Op::Const, v, nullptr, nullptr); }
ExprPtr var() { return make(Op::Var, 0.0, nullptr, nullptr); }
ExprPtr add(ExprPtr l, ExprPtr r) { return make(Op::Add, 0.0, std::move(l), std::move(r)); }
ExprPtr mul(ExprPtr l, ExprPtr r) { return make(Op::Mul, 0.0, std::move(l), std::move(r)); }
ExprPtr exp_of(ExprPtr c) { return make(Op::Exp, 0.0, std::move(c), nullptr); }
ExprPtr ln_of(ExprPtr c) { return make(Op::Ln, 0.0, std::move(c), nullptr); }
ExprPtr div(ExprPtr l, ExprPtr r) { return make(Op::Div, 0.0, std::move(l), std::move(r)); }
ExprPtr neg(ExprPtr c) { return make(Op::Neg, 0.0, std::move(c), nullptr); }

bool is_unary(Op op) { return op == Op::Exp || op == Op::Ln || op == Op::Neg; }
bool is_binary(Op op) { return op == Op::Add || op == Op::Mul || op == Op::Div; }

std::optional<double> eval_expr(const ExprPtr& e, double x) {
  switch (e->op) {
    case Op::Const: return e->value;
    case Op::Var: return x;
    case Op::Add: {
      auto l = eval_expr(e->left, x);
      if (!l) return std::nullopt;
      auto r = eval_expr(e->right, x);
      if (!r) return std::nullopt;
      const double v = *l + *r;
      if (!std::isfinite(v)) return std::nullopt;
      return v;
    }
    case Op::Mul: {
      auto l = eval_expr(e->left, x);
      if (!l) return std::nullopt;
      auto r = eval_expr(e->right, x);
      if (!r) return std::nullopt;
      const double v = *l * *r;
      if (!std::isfinite(v)) return std::nullopt;
      return v;
    }
    case Op::Div: {
      auto l = eval_expr(e->left, x);
      if (!l) return std::nullopt;
      auto r = eval_expr(e->right, x);
      if (!r || std::abs(*r) < 1e-300) return std::nullopt;
      const double v = *l / *r;
      if (!std::isfinite(v)) return std::nullopt;
      return v;
    }
    case Op::Exp: {
      auto c = eval_expr(e->left, x);
      if (!c || *c > kExpMaxArg) return std::nullopt;
      return std::exp(*c);
    }
    case Op::Ln: {
      auto c = eval_expr(e->left, x);
      if (!c || *c <= kLnMinArg) return std::nullopt;
      return std::log(*c);
    }
    case Op::Neg: {
      auto c = eval_expr(e->left, x);
      if (!c) return std::nullopt;
      return -*c;
    }
  }
  return std::nullopt;
}

int complexity(const ExprPtr& e) {
  if (!e) return 0;
  return 1 + complexity(e->left) + complexity(e->right);
}

int tree_depth(const ExprPtr& e) {
  if (!e) return -1;
  if (!e->left && !e->right) return 0;
  return 1 + std::max(tree_depth(e->left), tree_depth(e->right));
}

ExprPtr simplify(const ExprPtr& e) {
  if (!e->left) return e;
  ExprPtr l = simplify(e->left);
  ExprPtr r = e->right ? simplify(e->right) : nullptr;
  switch (e->op) {
    case Op::Add:
      if (l->op == Op::Const && r->op == Op::Const) return constant(l->value + r->value);
      if (is_const(l, 0.0)) return r;
      if (is_const(r, 0.0)) return l;
      break;
    case Op::Mul:
      if (l->op == Op::Const && r->op == Op::Const) return constant(l->value * r->value);
      if (is_const(l, 0.0) || is_const(r, 0.0)) return constant(0.0);
      if (is_const(l, 1.0)) return r;
      if (is_const(r, 1.0)) return l;
      break;
    case Op::Div:
      if (is_const(l, 0.0)) return constant(0.0);
      if (is_const(r, 1.0)) return l;
      if (l->op == Op::Const && r->op == Op::Const && r->value != 0.0)
        return constant(l->value / r->value);
      break;
    case Op::Neg:
      if (l->op == Op::Const) return constant(-l->value);
      if (l->op == Op::Neg) return l->left;
      break;
    case Op::Exp:
      if (l->op == Op::Const && l->value <= kExpMaxArg) return constant(std::exp(l->value));
      break;
    case Op::Ln:
      if (l->op == Op::Const && l->value > kLnMinArg) return constant(std::log(l->value));
      break;
    default:
      break;
  }
  if (l == e->left && r == e->right) return e;
  return make(e->op, e->value, std::move(l), std::move(r));
}

namespace {

ExprPtr diff_raw(const ExprPtr& e) {
  switch (e->op) {
    case Op::Const: return constant(0.0);
    case Op::Var: return constant(1.0);
    case Op::Add: return add(diff_raw(e->left), diff_raw(e->right));
    case Op::Mul:
      return add(mul(diff_raw(e->left), e->right), mul(e->left, diff_raw(e->right)));
    case Op::Div:
      // (u/v)' = (u'v - uv') / v^2
      return div(add(mul(diff_raw(e->left), e->right),
                     neg(mul(e->left, diff_raw(e->right)))),
                 mul(e->right, e->right));
    case Op::Exp: return mul(diff_raw(e->left), e);
    case Op::Ln: return div(diff_raw(e->left), e->left);
    case Op::Neg: return neg(diff_raw(e->left));
  }
  throw std::logic_error("diff_raw: unknown op");
}

}  // namespace

ExprPtr diff_expr(const ExprPtr& e) { return simplify(diff_raw(e)); }

namespace {

void print_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

// Precedence: Add = 1, Mul/Div = 2, Neg = 3, atoms = 4. A child is
// parenthesized when its precedence is below what its position requires;
// right operands of same-precedence chains keep their parentheses so the
// parse rebuilds the identical tree.
int precedence(Op op) {
  switch (op) {
    case Op::Add: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    default: return 4;
  }
}

void print_rec(std::string& out, const ExprPtr& e, int min_prec, bool display, const std::string_view var_name) {
  const int prec = precedence(e->op);
  const bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (e->op) {
    case Op::Const:
      if (display) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.4g", e->value);
        out += buf;
      } else {
        print_number(out, e->value);
      }
      break;
    case Op::Var: out += var_name; break;
    case Op::Add:
      print_rec(out, e->left, 1, display, var_name);
      out += " + ";
      print_rec(out, e->right, 2, display, var_name);
      break;
    case Op::Mul:
      print_rec(out, e->left, 2, display, var_name);
      out += " * ";
      print_rec(out, e->right, 3, display, var_name);
      break;
    case Op::Div:
      print_rec(out, e->left, 2, display, var_name);
      out += " / ";
      print_rec(out, e->right, 3, display, var_name);
      break;
    case Op::Neg:
      out += '-';
      print_rec(out, e->left, 4, display, var_name);
      break;
    case Op::Exp:
      out += "exp(";
      print_rec(out, e->left, 1, display, var_name);
      out += ')';
      break;
    case Op::Ln:
      out += "ln(";
      print_rec(out, e->left, 1, display, var_name);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string print_canonical(const ExprPtr& e) {
  std::string out;
  print_rec(out, e, 1, false, "x");
  return out;
}

std::string print_display(const ExprPtr& e, std::string_view var_name) {
  std::string out;
  print_rec(out, e, 1, true, var_name);
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const char* what) {
    throw std::invalid_argument(std::string("parse_expression: ") + what + " at offset " +
                                std::to_string(pos_));
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

  bool peek_is(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  ExprPtr parse_sum() {
    ExprPtr e = parse_product();
    while (eat('+')) e = add(e, parse_product());
    return e;
  }

  ExprPtr parse_product() {
    ExprPtr e = parse_factor();
    for (;;) {
      if (eat('*')) e = mul(e, parse_factor());
      else if (eat('/')) e = div(e, parse_factor());
      else break;
    }
    return e;
  }

  ExprPtr parse_factor() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '-') {
      // A minus directly before a digit is a negative literal; anything
      // else is a Neg node. Mirrors the printer exactly.
      if (pos_ + 1 < text_.size() &&
          (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '.')) {
        return parse_number();
      }
      ++pos_;
      return neg(parse_factor());
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (text_.substr(pos_).starts_with("exp")) {
      pos_ += 3;
      if (!eat('(')) fail("expected '(' after exp");
      ExprPtr e = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return exp_of(e);
    }
    if (text_.substr(pos_).starts_with("ln")) {
      pos_ += 2;
      if (!eat('(')) fail("expected '(' after ln");
      ExprPtr e = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return ln_of(e);
    }
    if (c == 'x') {
      ++pos_;
      return var();
    }
    fail("unexpected character");
  }

  ExprPtr parse_number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return constant(v);
  }
};

}  // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).parse(); }

int count_constants(const ExprPtr& e) {
  if (!e) return 0;
  return (e->op == Op::Const ? 1 : 0) + count_constants(e->left) + count_constants(e->right);
}

namespace {

void collect_constants(const ExprPtr& e, std::vector<double>& out) {
  if (!e) return;
  if (e->op == Op::Const) out.push_back(e->value);
  collect_constants(e->left, out);
  collect_constants(e->right, out);
}

ExprPtr rebuild_with_constants(const ExprPtr& e, std::span<const double> values, int& next) {
  if (e->op == Op::Const) return constant(values[static_cast<std::size_t>(next++)]);
  if (!e->left) return e;
  ExprPtr l = rebuild_with_constants(e->left, values, next);
  ExprPtr r = e->right ? rebuild_with_constants(e->right, values, next) : nullptr;
  if (l == e->left && r == e->right) return e;
  return make(e->op, e->value, std::move(l), std::move(r));
}

// Derivative of e with respect to its `target`-th constant; `next` counts
// Const nodes encountered so far in depth-first order.
ExprPtr diff_const_raw(const ExprPtr& e, int target, int& next) {
  switch (e->op) {
    case Op::Const: return constant(next++ == target ? 1.0 : 0.0);
    case Op::Var: return constant(0.0);
    case Op::Add: {
      ExprPtr dl = diff_const_raw(e->left, target, next);
      ExprPtr dr = diff_const_raw(e->right, target, next);
      return add(std::move(dl), std::move(dr));
    }
    case Op::Mul: {
      ExprPtr dl = diff_const_raw(e->left, target, next);
      ExprPtr dr = diff_const_raw(e->right, target, next);
      return add(mul(std::move(dl), e->right), mul(e->left, std::move(dr)));
    }
    case Op::Div: {
      ExprPtr dl = diff_const_raw(e->left, target, next);
      ExprPtr dr = diff_const_raw(e->right, target, next);
      return div(add(mul(std::move(dl), e->right), neg(mul(e->left, std::move(dr)))),
                 mul(e->right, e->right));
    }
    case Op::Exp: return mul(diff_const_raw(e->left, target, next), e);
    case Op::Ln: {
      ExprPtr dl = diff_const_raw(e->left, target, next);
      return div(std::move(dl), e->left);
    }
    case Op::Neg: return neg(diff_const_raw(e->left, target, next));
  }
  throw std::logic_error("diff_const_raw: unknown op");
}

bool nested_unary_rec(const ExprPtr& e, bool inside_unary) {
  if (!e) return false;
  const bool u = e->op == Op::Exp || e->op == Op::Ln;
  if (u && inside_unary) return true;
  return nested_unary_rec(e->left, inside_unary || u) || nested_unary_rec(e->right, inside_unary || u);
}

}  // namespace

std::vector<double> get_constants(const ExprPtr& e) {
  std::vector<double> out;
  collect_constants(e, out);
  return out;
}

ExprPtr with_constants(const ExprPtr& e, std::span<const double> values) {
  int next = 0;
  return rebuild_with_constants(e, values, next);
}

ExprPtr diff_wrt_constant(const ExprPtr& e, int index) {
  int next = 0;
  return simplify(diff_const_raw(e, index, next));
}

bool has_nested_unary(const ExprPtr& e) { return nested_unary_rec(e, false); }

void collect_nodes(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (!e) return;
  out.push_back(e);
  collect_nodes(e->left, out);
  collect_nodes(e->right, out);
}

ExprPtr replace_node(const ExprPtr& e, int index, const ExprPtr& replacement) {
  int next = 0;
  struct Impl {
    const ExprPtr& replacement;
    ExprPtr walk(const ExprPtr& node, int target, int& counter) {
      if (counter++ == target) return replacement;
      if (!node->left) return node;
      ExprPtr l = walk(node->left, target, counter);
      ExprPtr r;
      if (node->right) {
        r = walk(node->right, target, counter);
      }
      if (l == node->left && r == node->right) return node;
      return make(node->op, node->value, std::move(l), std::move(r));
    }
  } impl{replacement};
  return impl.walk(e, index, next);
}

}  // namespace hyperfit::symreg
