#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hyperfit/icnn.hpp"
#include "hyperfit/rng.hpp"
#include "testutil.hpp"

using namespace hyperfit;
using icnn::IcnnParams;

TEST_CASE("initialization is deterministic, non-negative, correctly shaped") {
  const IcnnParams a = icnn::icnn_init(7, 50);
  const IcnnParams b = icnn::icnn_init(7, 50);
  CHECK(a.v0_raw == b.v0_raw);
  CHECK(a.b0 == b.b0);
  CHECK(a.w1_raw == b.w1_raw);
  CHECK(a.v1_raw == b.v1_raw);
  CHECK(a.b1 == b.b1);
  for (double w : a.v0_raw) CHECK(w >= 0.0);
  for (double w : a.w1_raw) CHECK(w >= 0.0);
  CHECK(a.v1_raw >= 0.0);

  const IcnnParams tiny = icnn::icnn_init(7, 1);
  CHECK(tiny.width() == 1);
  CHECK(tiny.v0_raw.size() == 1);
  CHECK(icnn::param_count(tiny) == 5);
  CHECK_THROWS_AS(icnn::icnn_init(0, 0), std::invalid_argument);
}

TEST_CASE("forward closed forms") {
  IcnnParams zeros;
  zeros.v0_raw.assign(50, 0.0);
  zeros.b0.assign(50, 0.0);
  zeros.w1_raw.assign(50, 0.0);
  const double ln2 = std::log(2.0);
  for (double x : {-3.0, 0.0, 5.0})
    CHECK(icnn::icnn_forward(zeros, x) == doctest::Approx(ln2 * ln2).epsilon(1e-15));
  CHECK(ln2 * ln2 == doctest::Approx(0.480453).epsilon(1e-6));

  IcnnParams unit;
  unit.v0_raw = {1.0};
  unit.b0 = {0.0};
  unit.w1_raw = {1.0};
  unit.v1_raw = 0.0;
  unit.b1 = 0.0;
  const double ln3 = std::log(3.0);
  CHECK(icnn::icnn_forward(unit, 0.0) == doctest::Approx(ln3 * ln3).epsilon(1e-15));
  CHECK(ln3 * ln3 == doctest::Approx(1.206949).epsilon(1e-6));
  CHECK(icnn::icnn_forward(unit, 1.0) >= icnn::icnn_forward(unit, 0.0));
}

TEST_CASE("softplus stays finite far out") {
  CHECK(icnn::softplus(1000.0) == doctest::Approx(1000.0));
  CHECK(icnn::softplus(-1000.0) == doctest::Approx(0.0));
  IcnnParams p = icnn::icnn_init(3, 4);
  CHECK(std::isfinite(icnn::icnn_forward(p, 500.0)));
  CHECK(std::isfinite(icnn::icnn_input_grad(p, 500.0)));
}

TEST_CASE("input gradient: zero-parameter net and finite differences") {
  IcnnParams zeros;
  zeros.v0_raw.assign(8, 0.0);
  zeros.b0.assign(8, 0.0);
  zeros.w1_raw.assign(8, 0.0);
  CHECK(icnn::icnn_input_grad(zeros, 2.0) == 0.0);

  rng::Stream stream(42);
  for (int trial = 0; trial < 200; ++trial) {
    const IcnnParams p = testutil::random_icnn(stream, 10);
    const double x = trial < 100 ? 4.0 : stream.uniform(-2.0, 6.0);
    const double analytic = icnn::icnn_input_grad(p, x);
    const double fd =
        testutil::central_diff([&](double xx) { return icnn::icnn_forward(p, xx); }, x, 1e-5);
    CHECK(testutil::rel_err(analytic, fd, 1e-9) < 1e-6);
    CHECK(analytic >= 0.0);
  }
}

TEST_CASE("parameter tangents match finite differences") {
  rng::Stream stream(1234);
  for (int trial = 0; trial < 30; ++trial) {
    const IcnnParams p = testutil::random_icnn(stream, 6);
    const double x = stream.uniform(-1.0, 4.0);
    const auto tangent = icnn::icnn_param_tangent(p, x);
    const std::size_t n = icnn::param_count(p);
    std::vector<double> theta(n), dvalue(n), dslope(n);
    icnn::flatten(p, theta);
    icnn::flatten(tangent.value, dvalue);
    icnn::flatten(tangent.slope, dslope);

    // direct chain-rule value: d psi / d b1 = softplus2'(z2)
    CHECK(dvalue[n - 1] > 0.0);

    for (std::size_t i = 0; i < n; ++i) {
      auto perturbed = [&](double t) {
        std::vector<double> th = theta;
        th[i] = t;
        IcnnParams q = p;
        icnn::unflatten(th, q);
        return q;
      };
      const double fd_value = testutil::central_diff(
          [&](double t) { return icnn::icnn_forward(perturbed(t), x); }, theta[i], 1e-6);
      CHECK(testutil::rel_err(dvalue[i], fd_value, 1e-7) < 1e-5);
      const double fd_slope = testutil::central_diff(
          [&](double t) { return icnn::icnn_input_grad(perturbed(t), x); }, theta[i], 1e-6);
      CHECK(testutil::rel_err(dslope[i], fd_slope, 1e-6) < 1e-4);
    }
  }
}

TEST_CASE("projection subgradient is zero below the kink") {
  IcnnParams p;
  p.v0_raw = {-0.5};
  p.b0 = {0.3};
  p.w1_raw = {-0.2};
  p.v1_raw = -1.0;
  p.b1 = 0.1;
  const auto t = icnn::icnn_param_tangent(p, 2.0);
  CHECK(t.value.v0_raw[0] == 0.0);
  CHECK(t.value.w1_raw[0] == 0.0);
  CHECK(t.value.v1_raw == 0.0);
  CHECK(t.slope.v0_raw[0] == 0.0);
  // bias tangents stay live
  CHECK(t.value.b1 != 0.0);
}

TEST_CASE("convexity, monotonicity, non-negativity sampling") {
  rng::Stream stream(5150);
  for (int trial = 0; trial < 10000; ++trial) {
    const IcnnParams p = testutil::random_icnn(stream, 4);
    const double a = stream.uniform(-5.0, 5.0);
    const double b = stream.uniform(-5.0, 5.0);
    const double mid = icnn::icnn_forward(p, 0.5 * (a + b));
    const double fa = icnn::icnn_forward(p, a);
    const double fb = icnn::icnn_forward(p, b);
    CHECK(mid <= 0.5 * (fa + fb) + 1e-12);
    CHECK(icnn::icnn_forward(p, std::min(a, b)) <= icnn::icnn_forward(p, std::max(a, b)) + 1e-12);
    CHECK(fa >= 0.0);
  }
}

TEST_CASE("sampled second derivative is non-negative") {
  rng::Stream stream(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const IcnnParams p = testutil::random_icnn(stream, 8);
    for (double x = 0.0; x <= 20.0; x += 0.5) {
      const double second = testutil::central_diff(
          [&](double xx) { return icnn::icnn_input_grad(p, xx); }, x, 1e-4);
      CHECK(second >= -1e-8);
    }
  }
}

TEST_CASE("flatten and unflatten are inverse") {
  rng::Stream stream(2);
  const IcnnParams p = testutil::random_icnn(stream, 5);
  std::vector<double> buf(icnn::param_count(p));
  icnn::flatten(p, buf);
  IcnnParams q = icnn::icnn_init(0, 5);
  icnn::unflatten(buf, q);
  CHECK(q.v0_raw == p.v0_raw);
  CHECK(q.b0 == p.b0);
  CHECK(q.w1_raw == p.w1_raw);
  CHECK(q.v1_raw == p.v1_raw);
  CHECK(q.b1 == p.b1);
}
