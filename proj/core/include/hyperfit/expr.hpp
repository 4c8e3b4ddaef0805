#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hyperfit::symreg {

/// Node kinds of a univariate expression tree. Add/Mul/Exp/Ln span the
/// search space; Div and Neg only ever appear in symbolic derivatives.
enum class Op : std::uint8_t { Const, Var, Add, Mul, Exp, Ln, Div, Neg };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable node; subtrees are shared freely between expressions, which
/// keeps genetic operators cheap (path copy instead of deep copy).
struct Expr {
  Op op = Op::Const;
  double value = 0.0;  // Const payload only
  ExprPtr left;
  ExprPtr right;
};

ExprPtr constant(double v);
ExprPtr var();
ExprPtr add(ExprPtr l, ExprPtr r);
ExprPtr mul(ExprPtr l, ExprPtr r);
ExprPtr exp_of(ExprPtr c);
ExprPtr ln_of(ExprPtr c);
ExprPtr div(ExprPtr l, ExprPtr r);
ExprPtr neg(ExprPtr c);

bool is_unary(Op op);
bool is_binary(Op op);

/// Domain guards. An evaluation that trips a guard yields "invalid", which
/// is a value (empty optional), not a fault, and propagates upward.
inline constexpr double kLnMinArg = 1e-12;
inline constexpr double kExpMaxArg = 700.0;

std::optional<double> eval_expr(const ExprPtr& e, double x);

/// Node count; the complexity score used on the Pareto front.
int complexity(const ExprPtr& e);

/// Depth of the tree; a single node has depth 0.
int tree_depth(const ExprPtr& e);

/// Symbolic derivative with light simplification (constant folding and
/// 0/1 identities). May contain Div/Neg nodes.
ExprPtr diff_expr(const ExprPtr& e);

ExprPtr simplify(const ExprPtr& e);

/// Canonical printing: deterministic infix, constants at 17 significant
/// digits, parseable back exactly (same tree, same bits).
std::string print_canonical(const ExprPtr& e);

/// Human-oriented form with 4-significant-digit constants and an optional
/// variable label (e.g. "I1").
std::string print_display(const ExprPtr& e, std::string_view var_name = "x");

/// Parses the canonical grammar. Throws std::invalid_argument on bad input.
ExprPtr parse_expression(std::string_view text);

// Constant access, used by the constant-refinement step: constants are
// indexed by depth-first order of Const nodes.
int count_constants(const ExprPtr& e);
std::vector<double> get_constants(const ExprPtr& e);
ExprPtr with_constants(const ExprPtr& e, std::span<const double> values);

/// Derivative with respect to the index-th constant.
ExprPtr diff_wrt_constant(const ExprPtr& e, int index);

/// True if some unary node (Exp or Ln) contains another unary node
/// anywhere in its subtree.
bool has_nested_unary(const ExprPtr& e);

/// Collects all nodes in depth-first order (parents before children).
void collect_nodes(const ExprPtr& e, std::vector<ExprPtr>& out);

/// Returns a copy of `e` where the node at depth-first index `index` is
/// replaced by `replacement`.
ExprPtr replace_node(const ExprPtr& e, int index, const ExprPtr& replacement);

}  // namespace hyperfit::symreg
