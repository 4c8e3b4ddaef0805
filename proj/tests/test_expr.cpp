#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hyperfit/expr.hpp"
#include "hyperfit/rng.hpp"
#include "testutil.hpp"

using namespace hyperfit::symreg;
using hyperfit::rng::Stream;

namespace {

// Random valid tree over the full GP operator set, for property tests.
ExprPtr random_tree_basic(Stream& stream, int depth) {
  if (depth <= 0 || stream.chance(0.3))
    return stream.chance(0.5) ? var() : constant(stream.normal(0.0, 1.5));
  switch (stream.index(4)) {
    case 0: return add(random_tree_basic(stream, depth - 1), random_tree_basic(stream, depth - 1));
    case 1: return mul(random_tree_basic(stream, depth - 1), random_tree_basic(stream, depth - 1));
    case 2: return exp_of(random_tree_basic(stream, depth - 1));
    default: return ln_of(random_tree_basic(stream, depth - 1));
  }
}

}  // namespace

TEST_CASE("basic evaluation") {
  const ExprPtr e = add(mul(constant(2.0), var()), constant(1.0));
  CHECK(eval_expr(e, 3.0) == 7.0);
}

TEST_CASE("domain guards yield Invalid, not faults") {
  CHECK(!eval_expr(ln_of(constant(-1.0)), 0.0).has_value());
  CHECK(!eval_expr(ln_of(constant(0.0)), 0.0).has_value());
  CHECK(!eval_expr(exp_of(constant(701.0)), 0.0).has_value());
  CHECK(eval_expr(exp_of(constant(699.0)), 0.0).has_value());
  // Invalid propagates through parents.
  CHECK(!eval_expr(add(var(), ln_of(constant(-2.0))), 1.0).has_value());
  // Division guard (derivative-only node).
  CHECK(!eval_expr(div(constant(1.0), constant(0.0)), 0.0).has_value());
}

TEST_CASE("Treloar-fit psi1 value by hand") {
  // 0.1502 x + 0.0771 exp(0.0665 x) at x = 5
  const ExprPtr e = add(mul(constant(0.1502), var()),
                        mul(constant(0.0771), exp_of(mul(constant(0.0665), var()))));
  const double expected = 0.1502 * 5.0 + 0.0771 * std::exp(0.0665 * 5.0);
  CHECK(*eval_expr(e, 5.0) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(complexity(e) == 10);
}

TEST_CASE("complexity is the node count") {
  CHECK(complexity(constant(4.2)) == 1);
  // ln(x) + (-1.2)/x + 0.1 in the depth-3, size-8 layout
  const ExprPtr fig3 = add(add(ln_of(var()), div(constant(-1.2), var())), constant(0.1));
  CHECK(complexity(fig3) == 8);
  CHECK(tree_depth(fig3) == 3);
}

TEST_CASE("symbolic differentiation rules") {
  // d/dx [c exp(kx)] = c k exp(kx)
  const double c = 1.7, k = -0.4;
  const ExprPtr e = mul(constant(c), exp_of(mul(constant(k), var())));
  const ExprPtr d = diff_expr(e);
  for (double x : {-2.0, -0.5, 0.0, 1.0, 3.0})
    CHECK(*eval_expr(d, x) == doctest::Approx(c * k * std::exp(k * x)).epsilon(1e-12));

  // d/dx [x x] = 2x
  const ExprPtr sq = mul(var(), var());
  const ExprPtr dsq = diff_expr(sq);
  for (double x : {-1.0, 0.0, 2.5}) CHECK(*eval_expr(dsq, x) == doctest::Approx(2.0 * x));
}

TEST_CASE("derivatives of random trees match finite differences") {
  Stream stream(99);
  int checked = 0;
  for (int trial = 0; trial < 5000 && checked < 1000; ++trial) {
    const ExprPtr e = random_tree_basic(stream, 4);
    const ExprPtr d = diff_expr(e);
    const double x = stream.uniform(0.5, 3.0);
    // stay away from guard regions: require validity on the whole stencil
    const auto at = [&](double xx) { return eval_expr(e, xx); };
    if (!at(x - 2e-5) || !at(x + 2e-5) || !at(x)) continue;
    const auto a = eval_expr(d, x);
    if (!a) continue;
    if (std::abs(*eval_expr(e, x)) > 1e6) continue;  // FD unreliable at extreme magnitudes
    const double fd = testutil::central_diff([&](double xx) { return at(xx).value(); }, x, 1e-6);
    if (std::abs(fd) < 1e-4 && std::abs(*a) < 1e-4) { ++checked; continue; }
    CHECK(testutil::rel_err(*a, fd, 1e-6) < 1e-5);
    ++checked;
  }
  CHECK(checked >= 1000);
}

TEST_CASE("canonical printing round-trips exactly") {
  Stream stream(123);
  for (int trial = 0; trial < 2000; ++trial) {
    const ExprPtr e = random_tree_basic(stream, 4);
    const std::string s1 = print_canonical(e);
    const ExprPtr parsed = parse_expression(s1);
    CHECK(print_canonical(parsed) == s1);
    // also identical structure and payloads via a fresh print of a deep value probe
    CHECK(complexity(parsed) == complexity(e));
    const double x = 1.37;
    const auto v1 = eval_expr(e, x);
    const auto v2 = eval_expr(parsed, x);
    CHECK(v1.has_value() == v2.has_value());
    if (v1 && v2) CHECK(*v1 == *v2);  // bit-exact constants
  }
  // derivative-only nodes print and parse too
  const ExprPtr d = neg(div(constant(-1.25), add(var(), constant(3.0))));
  CHECK(print_canonical(parse_expression(print_canonical(d))) == print_canonical(d));
  CHECK_THROWS_AS(parse_expression("2 +"), std::invalid_argument);
  CHECK_THROWS_AS(parse_expression("foo(x)"), std::invalid_argument);
}

TEST_CASE("display printing uses 4 significant digits") {
  const ExprPtr e = add(mul(constant(0.15023456), var()), constant(261.5397));
  CHECK(print_display(e, "I1") == "0.1502 * I1 + 261.5");
}

TEST_CASE("constants access and derivative with respect to a constant") {
  const ExprPtr e = add(mul(constant(2.0), var()), mul(constant(5.0), exp_of(mul(constant(0.5), var()))));
  CHECK(count_constants(e) == 3);
  const auto c = get_constants(e);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == 2.0);
  CHECK(c[1] == 5.0);
  CHECK(c[2] == 0.5);
  const ExprPtr shifted = with_constants(e, std::vector<double>{3.0, 4.0, 0.25});
  CHECK(*eval_expr(shifted, 2.0) == doctest::Approx(3.0 * 2.0 + 4.0 * std::exp(0.5)));

  // d/dc of each constant vs finite differences
  for (int k = 0; k < 3; ++k) {
    const ExprPtr dk = diff_wrt_constant(e, k);
    const double x = 1.3;
    const double fd = testutil::central_diff(
        [&](double t) {
          auto vals = get_constants(e);
          vals[static_cast<std::size_t>(k)] = t;
          return eval_expr(with_constants(e, vals), x).value();
        },
        c[static_cast<std::size_t>(k)], 1e-6);
    CHECK(testutil::rel_err(*eval_expr(dk, x), fd, 1e-9) < 1e-6);
  }
}

TEST_CASE("nested unary detection") {
  CHECK(!has_nested_unary(exp_of(mul(constant(2.0), var()))));
  CHECK(has_nested_unary(exp_of(ln_of(var()))));
  CHECK(has_nested_unary(ln_of(add(var(), exp_of(var())))));
  CHECK(!has_nested_unary(add(exp_of(var()), ln_of(var()))));
}

TEST_CASE("simplify folds constants and identities") {
  CHECK(print_canonical(simplify(add(constant(0.0), var()))) == "x");
  CHECK(print_canonical(simplify(mul(constant(1.0), var()))) == "x");
  CHECK(print_canonical(simplify(mul(constant(0.0), exp_of(var())))) == "0");
  CHECK(*eval_expr(simplify(add(constant(2.0), constant(3.0))), 0.0) == 5.0);
}
