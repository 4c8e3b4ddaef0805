#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace hyperfit::icnn {

inline constexpr int kDefaultHidden = 50;

/// Convex, smooth, non-decreasing activations.
inline double softplus(double x) {
  // softplus(x) = x + softplus(-x) for large x keeps exp() in range.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}
inline double sigmoid(double x) {
  return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
inline double softplus2(double x) {
  const double s = softplus(x);
  return s * s;
}
inline double softplus2_prime(double x) { return 2.0 * softplus(x) * sigmoid(x); }

/// Raw trainable parameters of one univariate input-convex network with a
/// single hidden layer:
///
///   h1  = softplus(x * v0 + b0)
///   psi = softplus2(w1 . h1 + x * v1 + b1)
///
/// Effective weights are the ReLU projections max(raw, 0); with non-negative
/// w1, v0, v1 and convex non-decreasing activations the map x -> psi is
/// convex, non-decreasing, and non-negative.
struct IcnnParams {
  std::vector<double> v0_raw;  // passthrough weights, layer 0
  std::vector<double> b0;
  std::vector<double> w1_raw;  // hidden -> output weights
  double v1_raw = 0.0;         // passthrough, layer 1
  double b1 = 0.0;

  int width() const { return static_cast<int>(v0_raw.size()); }
};

/// Gradient record congruent to IcnnParams (one entry per raw parameter).
struct IcnnGrad {
  std::vector<double> v0_raw;
  std::vector<double> b0;
  std::vector<double> w1_raw;
  double v1_raw = 0.0;
  double b1 = 0.0;
};

/// d(value)/d(theta) and d(slope)/d(theta), where slope = d psi / d x.
/// The ReLU projection contributes subgradient 0 for raw < 0 and 1 otherwise.
struct IcnnTangent {
  IcnnGrad value;
  IcnnGrad slope;
};

/// Deterministic initialization: raw weights |N(0, 1/sqrt(fan_in))| (kept
/// non-negative so the projection starts with no dead zero-gradient region),
/// biases zero.
IcnnParams icnn_init(std::uint64_t seed, int hidden = kDefaultHidden);

double icnn_forward(const IcnnParams& p, double x);
double icnn_input_grad(const IcnnParams& p, double x);
IcnnTangent icnn_param_tangent(const IcnnParams& p, double x);

// Flat views for the optimizer. Order: v0_raw, b0, w1_raw, v1_raw, b1.
std::size_t param_count(const IcnnParams& p);
void flatten(const IcnnParams& p, std::span<double> out);
void unflatten(std::span<const double> in, IcnnParams& p);
void flatten(const IcnnGrad& g, std::span<double> out);

}  // namespace hyperfit::icnn
