#include "hyperfit/icnn.hpp"

#include <stdexcept>

#include "hyperfit/rng.hpp"

namespace hyperfit::icnn {

namespace {

inline double relu(double raw) { return raw > 0.0 ? raw : 0.0; }
inline double relu_sub(double raw) { return raw >= 0.0 ? 1.0 : 0.0; }

}  // namespace

IcnnParams icnn_init(std::uint64_t seed, int hidden) {
  if (hidden < 1) throw std::invalid_argument("icnn_init: hidden width must be >= 1");
  rng::Stream stream(seed);
  IcnnParams p;
  p.v0_raw.resize(static_cast<std::size_t>(hidden));
  p.b0.assign(static_cast<std::size_t>(hidden), 0.0);
  p.w1_raw.resize(static_cast<std::size_t>(hidden));
  const double sd_in = 1.0;                                   // fan_in = 1
  const double sd_hidden = 1.0 / std::sqrt(double(hidden));   // fan_in = hidden
  for (auto& w : p.v0_raw) w = std::abs(stream.normal(0.0, sd_in));
  for (auto& w : p.w1_raw) w = std::abs(stream.normal(0.0, sd_hidden));
  p.v1_raw = std::abs(stream.normal(0.0, sd_in));
  p.b1 = 0.0;
  return p;
}

double icnn_forward(const IcnnParams& p, double x) {
  double z2 = x * relu(p.v1_raw) + p.b1;
  const int h = p.width();
  for (int i = 0; i < h; ++i) {
    z2 += relu(p.w1_raw[i]) * softplus(x * relu(p.v0_raw[i]) + p.b0[i]);
  }
  return softplus2(z2);
}

double icnn_input_grad(const IcnnParams& p, double x) {
  double z2 = x * relu(p.v1_raw) + p.b1;
  double slope_in = relu(p.v1_raw);
  const int h = p.width();
  for (int i = 0; i < h; ++i) {
    const double v0 = relu(p.v0_raw[i]);
    const double w1 = relu(p.w1_raw[i]);
    const double z1 = x * v0 + p.b0[i];
    z2 += w1 * softplus(z1);
    slope_in += w1 * sigmoid(z1) * v0;
  }
  return softplus2_prime(z2) * slope_in;
}

IcnnTangent icnn_param_tangent(const IcnnParams& p, double x) {
  const int h = p.width();
  IcnnTangent t;
  t.value.v0_raw.resize(static_cast<std::size_t>(h));
  t.value.b0.resize(static_cast<std::size_t>(h));
  t.value.w1_raw.resize(static_cast<std::size_t>(h));
  t.slope.v0_raw.resize(static_cast<std::size_t>(h));
  t.slope.b0.resize(static_cast<std::size_t>(h));
  t.slope.w1_raw.resize(static_cast<std::size_t>(h));

  const double v1 = relu(p.v1_raw);
  const double pv1 = relu_sub(p.v1_raw);

  double z2 = x * v1 + p.b1;
  double trend = v1;  // d z2 / d x
  for (int i = 0; i < h; ++i) {
    const double v0 = relu(p.v0_raw[i]);
    const double w1 = relu(p.w1_raw[i]);
    const double z1 = x * v0 + p.b0[i];
    z2 += w1 * softplus(z1);
    trend += w1 * sigmoid(z1) * v0;
  }

  const double sp2 = softplus(z2);
  const double sg2 = sigmoid(z2);
  const double s = 2.0 * sp2 * sg2;                       // softplus2'(z2)
  const double s_prime = 2.0 * (sg2 * sg2 + sp2 * sg2 * (1.0 - sg2));  // softplus2''(z2)

  // value: d psi / d theta = s * d z2 / d theta
  // slope: d (s(z2) * trend) / d theta = s' * dz2 * trend + s * dtrend
  t.value.b1 = s;
  t.slope.b1 = s_prime * trend;
  t.value.v1_raw = s * x * pv1;
  t.slope.v1_raw = (s_prime * x * trend + s) * pv1;

  for (int i = 0; i < h; ++i) {
    const double v0 = relu(p.v0_raw[i]);
    const double pv0 = relu_sub(p.v0_raw[i]);
    const double w1 = relu(p.w1_raw[i]);
    const double pw1 = relu_sub(p.w1_raw[i]);
    const double z1 = x * v0 + p.b0[i];
    const double h1 = softplus(z1);
    const double sg1 = sigmoid(z1);
    const double sg1_prime = sg1 * (1.0 - sg1);

    // w1_raw: z2 via w1*h1, trend via w1*sg1*v0
    t.value.w1_raw[i] = s * h1 * pw1;
    t.slope.w1_raw[i] = (s_prime * h1 * trend + s * sg1 * v0) * pw1;

    // b0: z1 shift
    const double dz2_db0 = w1 * sg1;
    const double dtrend_db0 = w1 * sg1_prime * v0;
    t.value.b0[i] = s * dz2_db0;
    t.slope.b0[i] = s_prime * dz2_db0 * trend + s * dtrend_db0;

    // v0_raw: z1 = x*v0 + b0 and the direct v0 factor in trend
    const double dz2_dv0 = w1 * sg1 * x;
    const double dtrend_dv0 = w1 * (sg1_prime * x * v0 + sg1);
    t.value.v0_raw[i] = s * dz2_dv0 * pv0;
    t.slope.v0_raw[i] = (s_prime * dz2_dv0 * trend + s * dtrend_dv0) * pv0;
  }
  return t;
}

std::size_t param_count(const IcnnParams& p) {
  return 3 * static_cast<std::size_t>(p.width()) + 2;
}

void flatten(const IcnnParams& p, std::span<double> out) {
  const std::size_t h = static_cast<std::size_t>(p.width());
  std::size_t k = 0;
  for (std::size_t i = 0; i < h; ++i) out[k++] = p.v0_raw[i];
  for (std::size_t i = 0; i < h; ++i) out[k++] = p.b0[i];
  for (std::size_t i = 0; i < h; ++i) out[k++] = p.w1_raw[i];
  out[k++] = p.v1_raw;
  out[k++] = p.b1;
}

void unflatten(std::span<const double> in, IcnnParams& p) {
  const std::size_t h = static_cast<std::size_t>(p.width());
  std::size_t k = 0;
  for (std::size_t i = 0; i < h; ++i) p.v0_raw[i] = in[k++];
  for (std::size_t i = 0; i < h; ++i) p.b0[i] = in[k++];
  for (std::size_t i = 0; i < h; ++i) p.w1_raw[i] = in[k++];
  p.v1_raw = in[k++];
  p.b1 = in[k++];
}

void flatten(const IcnnGrad& g, std::span<double> out) {
  const std::size_t h = g.v0_raw.size();
  std::size_t k = 0;
  for (std::size_t i = 0; i < h; ++i) out[k++] = g.v0_raw[i];
  for (std::size_t i = 0; i < h; ++i) out[k++] = g.b0[i];
  for (std::size_t i = 0; i < h; ++i) out[k++] = g.w1_raw[i];
  out[k++] = g.v1_raw;
  out[k++] = g.b1;
}

}  // namespace hyperfit::icnn
