#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "hyperfit/gp.hpp"
#include "testutil.hpp"

using namespace hyperfit;
using namespace hyperfit::symreg;

namespace {

std::vector<std::pair<double, double>> sample_fn(const std::function<double(double)>& f, double lo,
                                                 double hi, int n) {
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * double(i) / double(n - 1);
    out.emplace_back(x, f(x));
  }
  return out;
}

GpConfig small_config() {
  GpConfig cfg;
  cfg.population = 120;
  cfg.max_iterations = 25;
  cfg.time_budget_sec = 0.0;
  cfg.refine_top = 20;
  return cfg;
}

}  // namespace

TEST_CASE("pareto front keeps only undominated entries, strictly monotone") {
  ParetoFront front;
  const ExprPtr c1 = constant(1.0);                                  // complexity 1
  const ExprPtr c3 = add(var(), constant(1.0));                      // complexity 3
  const ExprPtr c5 = add(mul(constant(1.0), var()), constant(0.5));  // complexity 5
  front.offer(c1, 1.0);
  front.offer(c3, 0.5);
  front.offer(c5, 0.25);
  CHECK(front.entries().size() == 3);
  // dominated: worse mse at the same complexity
  front.offer(c5, 0.5);
  CHECK(front.entries().at(5).mse == 0.25);
  // a better simple entry evicts now-dominated complex ones
  front.offer(c1, 0.2);
  CHECK(front.entries().size() == 1);
  CHECK(front.entries().at(1).mse == 0.2);
  // non-finite fitness never enters
  front.offer(c3, std::numeric_limits<double>::infinity());
  CHECK(front.entries().size() == 1);
  CHECK(front.best_mse() == 0.2);

  front.offer(c3, 0.1);
  front.offer(c5, 0.05);
  double prev_mse = std::numeric_limits<double>::infinity();
  int prev_c = 0;
  for (const auto& [c, entry] : front.entries()) {
    CHECK(c > prev_c);
    CHECK(entry.mse < prev_mse);
    prev_c = c;
    prev_mse = entry.mse;
  }
}

TEST_CASE("expr_mse is +infinity when any sample is invalid") {
  const auto samples = sample_fn([](double x) { return x; }, -2.0, 2.0, 11);
  CHECK(std::isinf(expr_mse(ln_of(var()), samples)));  // ln of negative x
  CHECK(expr_mse(var(), samples) == 0.0);
}

TEST_CASE("genetic operators respect caps and the nested-unary ban") {
  GpConfig cfg;
  cfg.max_size = 12;
  cfg.max_depth = 5;
  cfg.nested_unary_ban = true;
  cfg.unary_ops = {Op::Exp, Op::Ln};
  rng::Stream stream(404);
  std::vector<ExprPtr> pool;
  for (int i = 0; i < 50; ++i) pool.push_back(random_tree(stream, cfg, 5));
  for (const ExprPtr& t : pool) {
    CHECK(complexity(t) <= cfg.max_size);
    CHECK(tree_depth(t) <= cfg.max_depth);
    CHECK(!has_nested_unary(t));
  }
  for (int offspring = 0; offspring < 100000; ++offspring) {
    const ExprPtr& a = pool[stream.index(pool.size())];
    const ExprPtr& b = pool[stream.index(pool.size())];
    const ExprPtr child = stream.chance(0.5) ? crossover(a, b, stream, cfg) : mutate(a, stream, cfg);
    CHECK(complexity(child) <= cfg.max_size);
    CHECK(tree_depth(child) <= cfg.max_depth);
    CHECK(!has_nested_unary(child));
    if (offspring % 997 == 0) pool[stream.index(pool.size())] = child;
  }
}

TEST_CASE("fit_constants solves the linear case exactly") {
  const auto samples = sample_fn([](double x) { return 3.0 * x; }, 0.0, 5.0, 40);
  rng::Stream stream(5);
  const ExprPtr start = mul(constant(1.0), var());
  const ExprPtr refined = fit_constants(start, samples, stream);
  CHECK(get_constants(refined)[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(expr_mse(refined, samples) < 1e-20);

  // no constants: unchanged
  const ExprPtr bare = mul(var(), var());
  CHECK(fit_constants(bare, samples, stream) == bare);

  // all-invalid evaluation: unchanged
  const ExprPtr invalid = ln_of(mul(constant(-1.0), exp_of(var())));
  const ExprPtr untouched = fit_constants(invalid, samples, stream);
  CHECK(get_constants(untouched)[0] == -1.0);
}

TEST_CASE("fit_constants recovers c exp(k x) from a cold start") {
  const auto samples = sample_fn([](double x) { return 2.0 * std::exp(0.5 * x); }, 0.0, 4.0, 60);
  rng::Stream stream(6);
  const ExprPtr start = mul(constant(1.0), exp_of(mul(constant(1.0), var())));
  const ExprPtr refined = fit_constants(start, samples, stream, 60);
  const auto c = get_constants(refined);
  CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(c[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("fit_constants never returns a worse fit") {
  rng::Stream stream(7);
  const auto samples = sample_fn([](double x) { return std::exp(0.3 * x) + x; }, 0.5, 3.0, 30);
  GpConfig cfg;
  cfg.unary_ops = {Op::Exp};
  for (int trial = 0; trial < 200; ++trial) {
    const ExprPtr e = random_tree(stream, cfg, 4);
    const double before = expr_mse(e, samples);
    const double after = expr_mse(fit_constants(e, samples, stream, 8), samples);
    if (std::isfinite(before)) CHECK(after <= before + 1e-15);
  }
}

TEST_CASE("gp_search finds a constant target immediately") {
  const auto samples = sample_fn([](double) { return 2.5; }, 0.0, 1.0, 20);
  GpConfig cfg = small_config();
  cfg.max_iterations = 5;
  const ParetoFront front = gp_search(samples, cfg);
  REQUIRE(front.entries().count(1) == 1);
  CHECK(front.entries().at(1).mse < 1e-20);
  const auto c = get_constants(front.entries().at(1).expr);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("gp_search input validation") {
  const auto samples = sample_fn([](double x) { return x; }, 0.0, 1.0, 5);
  CHECK_THROWS_AS(gp_search(samples, small_config()), std::invalid_argument);  // < 10 samples
  GpConfig bad = small_config();
  bad.p_crossover = 1.5;
  const auto ok = sample_fn([](double x) { return x; }, 0.0, 1.0, 20);
  CHECK_THROWS_AS(gp_search(ok, bad), std::invalid_argument);
}

TEST_CASE("gp_search is deterministic with the time budget off") {
  const auto samples = sample_fn([](double x) { return 0.7 * x + std::exp(0.4 * x); }, 0.0, 3.0, 50);
  GpConfig cfg = small_config();
  cfg.unary_ops = {Op::Exp};
  cfg.max_iterations = 10;
  cfg.seed = 99;
  const ParetoFront a = gp_search(samples, cfg);
  const ParetoFront b = gp_search(samples, cfg);
  REQUIRE(a.entries().size() == b.entries().size());
  auto ita = a.entries().begin();
  auto itb = b.entries().begin();
  for (; ita != a.entries().end(); ++ita, ++itb) {
    CHECK(ita->first == itb->first);
    CHECK(ita->second.mse == itb->second.mse);
    CHECK(print_canonical(ita->second.expr) == print_canonical(itb->second.expr));
  }
}

TEST_CASE("archived mse values reproduce under re-evaluation") {
  const auto samples = sample_fn([](double x) { return x * x + 1.0; }, 0.0, 2.0, 30);
  GpConfig cfg = small_config();
  cfg.max_iterations = 8;
  const ParetoFront front = gp_search(samples, cfg);
  for (const auto& [c, entry] : front.entries())
    CHECK(expr_mse(entry.expr, samples) == doctest::Approx(entry.mse).epsilon(1e-12));
}

TEST_CASE("select_model picks the smallest complexity inside the tolerance") {
  // staged front: {3: 0.1, 5: 0.09, 9: 1e-6, 14: 8e-7}; the first entry
  // within 1.5x of the best is complexity 9
  ParetoFront front;
  front.offer(add(var(), constant(0.0)), 0.1);                                               // c = 3
  front.offer(add(mul(constant(1.0), var()), constant(0.0)), 0.09);                          // c = 5
  front.offer(add(mul(constant(1.0), var()), mul(constant(1.0), mul(var(), var()))), 1e-6);  // c = 9
  front.offer(add(add(mul(constant(1.0), var()), mul(constant(1.0), mul(var(), var()))),
                  mul(constant(0.0), mul(var(), mul(var(), var())))),
              8e-7);  // c = 14
  REQUIRE(front.entries().size() == 4);
  // empty grad samples make the derivative criterion non-binding
  const Selection sel = select_model(front, {}, 1.5);
  CHECK(sel.complexity == 9);
  REQUIRE(sel.table.size() == 4);
  CHECK(sel.table[2].chosen);
}

TEST_CASE("single-entry front selects that entry") {
  ParetoFront front;
  front.offer(constant(4.0), 0.5);
  const Selection sel = select_model(front, {}, 1.5);
  CHECK(sel.complexity == 1);
}

TEST_CASE("derivative criterion can veto a value-accurate candidate") {
  // Two candidates nearly tied on values; the cheaper one has the wrong
  // derivative shape and must be skipped.
  const ExprPtr quad = mul(constant(7.389), mul(var(), var()));                             // c = 5
  const ExprPtr exact = add(exp_of(mul(constant(2.0), var())), mul(constant(0.0), var()));  // c = 8
  ParetoFront front;
  front.offer(quad, 1.3e-6);  // staged: within 1.5x of best
  front.offer(exact, 1.0e-6);
  REQUIRE(front.entries().size() == 2);
  // true derivative samples of e^{2x}
  const auto grad_samples = sample_fn([](double x) { return 2.0 * std::exp(2.0 * x); }, 0.5, 1.5, 50);
  const Selection sel = select_model(front, grad_samples, 1.5);
  CHECK(sel.complexity == 8);
  // without the derivative screen the cheap one would have been chosen
  const Selection loose = select_model(front, {}, 1.5);
  CHECK(loose.complexity == 5);
}

TEST_CASE("gp_search recovers the Treloar psi1 target within budget") {
  // 0.1502 x + 0.0771 exp(0.0665 x) on x in [3, 12]
  const auto samples =
      sample_fn([](double x) { return 0.1502 * x + 0.0771 * std::exp(0.0665 * x); }, 3.0, 12.0, 500);
  GpConfig cfg;  // production defaults
  cfg.unary_ops = {Op::Exp};
  cfg.max_size = 30;
  cfg.max_depth = 30;
  cfg.seed = 2024;
  cfg.time_budget_sec = 360.0;
  const ParetoFront front = gp_search(samples, cfg);
  bool found = false;
  for (const auto& [c, entry] : front.entries())
    if (c <= 12 && entry.mse <= 1e-6) found = true;
  CHECK(found);
}
