#include "hyperfit/pnam.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "hyperfit/rng.hpp"

namespace hyperfit::pnam {

std::pair<AffineScaler, AffineScaler> fit_scalers(std::span<const kinematics::Invariants> train) {
  if (train.size() < 2) throw std::invalid_argument("fit_scalers: need at least 2 training states");
  double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1;
  double lo2 = lo1, hi2 = -lo1;
  for (const auto& inv : train) {
    lo1 = std::min(lo1, inv.i1);
    hi1 = std::max(hi1, inv.i1);
    lo2 = std::min(lo2, inv.i2);
    hi2 = std::max(hi2, inv.i2);
  }
  if (!(hi1 > lo1) || !(hi2 > lo2))
    throw std::invalid_argument("fit_scalers: degenerate invariant range (min == max)");
  return {AffineScaler{lo1, hi1}, AffineScaler{lo2, hi2}};
}

PnamModel make_model(std::uint64_t seed, int hidden,
                     std::span<const kinematics::Invariants> train_invariants,
                     double stress_scale) {
  PnamModel model;
  rng::Stream stream(seed);
  model.net1 = icnn::icnn_init(stream.next_u64(), hidden);
  model.net2 = icnn::icnn_init(stream.next_u64(), hidden);
  auto [s1, s2] = fit_scalers(train_invariants);
  model.scaler1 = s1;
  model.scaler2 = s2;
  model.stress_scale = stress_scale;
  return model;
}

kinematics::ShapeGradients pnam_grads_scaled(const PnamModel& model, const kinematics::Invariants& inv) {
  const double d1 = icnn::icnn_input_grad(model.net1, model.scaler1.scale(inv.i1)) * model.scaler1.slope();
  const double d2 = icnn::icnn_input_grad(model.net2, model.scaler2.scale(inv.i2)) * model.scaler2.slope();
  return {d1, d2};
}

kinematics::ShapeGradients pnam_grads(const PnamModel& model, const kinematics::Invariants& inv) {
  auto g = pnam_grads_scaled(model, inv);
  return {g.d1 / model.stress_scale, g.d2 / model.stress_scale};
}

double pnam_energy(const PnamModel& model, const kinematics::Invariants& inv) {
  const double psi = icnn::icnn_forward(model.net1, model.scaler1.scale(inv.i1)) +
                     icnn::icnn_forward(model.net2, model.scaler2.scale(inv.i2));
  const double psi0 = icnn::icnn_forward(model.net1, model.scaler1.scale(3.0)) +
                      icnn::icnn_forward(model.net2, model.scaler2.scale(3.0));
  return (psi - psi0) / model.stress_scale;
}

double shape_value(const PnamModel& model, int which, double invariant) {
  if (which == 1) return icnn::icnn_forward(model.net1, model.scaler1.scale(invariant)) / model.stress_scale;
  if (which == 2) return icnn::icnn_forward(model.net2, model.scaler2.scale(invariant)) / model.stress_scale;
  throw std::invalid_argument("shape_value: which must be 1 or 2");
}

double shape_slope(const PnamModel& model, int which, double invariant) {
  if (which == 1)
    return icnn::icnn_input_grad(model.net1, model.scaler1.scale(invariant)) * model.scaler1.slope() /
           model.stress_scale;
  if (which == 2)
    return icnn::icnn_input_grad(model.net2, model.scaler2.scale(invariant)) * model.scaler2.slope() /
           model.stress_scale;
  throw std::invalid_argument("shape_slope: which must be 1 or 2");
}

BaselineMlp baseline_init(std::uint64_t seed, int hidden, const AffineScaler& s1,
                          const AffineScaler& s2, double stress_scale) {
  if (hidden < 1) throw std::invalid_argument("baseline_init: hidden width must be >= 1");
  rng::Stream stream(seed);
  BaselineMlp mlp;
  mlp.w_in.resize(2 * static_cast<std::size_t>(hidden));
  mlp.b_in.assign(static_cast<std::size_t>(hidden), 0.0);
  mlp.w_out.resize(static_cast<std::size_t>(hidden));
  const double sd_in = 1.0 / std::sqrt(2.0);
  const double sd_out = 1.0 / std::sqrt(double(hidden));
  for (auto& w : mlp.w_in) w = stream.normal(0.0, sd_in);
  for (auto& w : mlp.w_out) w = stream.normal(0.0, sd_out);
  mlp.b_out = 0.0;
  mlp.scaler1 = s1;
  mlp.scaler2 = s2;
  mlp.stress_scale = stress_scale;
  return mlp;
}

BaselineEval baseline_forward_and_grads_scaled(const BaselineMlp& mlp, const kinematics::Invariants& inv) {
  const double x1 = mlp.scaler1.scale(inv.i1);
  const double x2 = mlp.scaler2.scale(inv.i2);
  const int h = mlp.width();
  double value = mlp.b_out;
  double g1 = 0.0, g2 = 0.0;
  for (int j = 0; j < h; ++j) {
    const double z = mlp.w_in[2 * j] * x1 + mlp.w_in[2 * j + 1] * x2 + mlp.b_in[j];
    const double a = elu(z);
    const double ap = elu_prime(z);
    value += mlp.w_out[j] * a;
    g1 += mlp.w_out[j] * ap * mlp.w_in[2 * j];
    g2 += mlp.w_out[j] * ap * mlp.w_in[2 * j + 1];
  }
  return {value, {g1 * mlp.scaler1.slope(), g2 * mlp.scaler2.slope()}};
}

BaselineEval baseline_forward_and_grads(const BaselineMlp& mlp, const kinematics::Invariants& inv) {
  auto e = baseline_forward_and_grads_scaled(mlp, inv);
  return {e.value / mlp.stress_scale,
          {e.grads.d1 / mlp.stress_scale, e.grads.d2 / mlp.stress_scale}};
}

BaselineTangent baseline_param_tangent(const BaselineMlp& mlp, const kinematics::Invariants& inv) {
  const double x1 = mlp.scaler1.scale(inv.i1);
  const double x2 = mlp.scaler2.scale(inv.i2);
  const double sl1 = mlp.scaler1.slope();
  const double sl2 = mlp.scaler2.slope();
  const int h = mlp.width();
  const std::size_t n = baseline_param_count(mlp);
  BaselineTangent t;
  t.value.assign(n, 0.0);
  t.d1.assign(n, 0.0);
  t.d2.assign(n, 0.0);
  // layout: w_in (2h), b_in (h), w_out (h), b_out
  const std::size_t off_bin = 2 * static_cast<std::size_t>(h);
  const std::size_t off_wout = off_bin + static_cast<std::size_t>(h);
  const std::size_t off_bout = off_wout + static_cast<std::size_t>(h);
  for (int j = 0; j < h; ++j) {
    const double wj1 = mlp.w_in[2 * j];
    const double wj2 = mlp.w_in[2 * j + 1];
    const double z = wj1 * x1 + wj2 * x2 + mlp.b_in[j];
    const double a = elu(z);
    const double ap = elu_prime(z);
    const double app = elu_second(z);
    const double wo = mlp.w_out[j];

    // value sensitivities
    t.value[2 * j] = wo * ap * x1;
    t.value[2 * j + 1] = wo * ap * x2;
    t.value[off_bin + j] = wo * ap;
    t.value[off_wout + j] = a;

    // gradient sensitivities; g_i = sum_j wo * ap(z_j) * w_in[j,i] * sl_i
    t.d1[2 * j] = wo * (app * x1 * wj1 + ap) * sl1;
    t.d1[2 * j + 1] = wo * app * x2 * wj1 * sl1;
    t.d1[off_bin + j] = wo * app * wj1 * sl1;
    t.d1[off_wout + j] = ap * wj1 * sl1;

    t.d2[2 * j] = wo * app * x1 * wj2 * sl2;
    t.d2[2 * j + 1] = wo * (app * x2 * wj2 + ap) * sl2;
    t.d2[off_bin + j] = wo * app * wj2 * sl2;
    t.d2[off_wout + j] = ap * wj2 * sl2;
  }
  t.value[off_bout] = 1.0;
  return t;
}

std::size_t baseline_param_count(const BaselineMlp& mlp) {
  return 4 * static_cast<std::size_t>(mlp.width()) + 1;
}

void baseline_flatten(const BaselineMlp& mlp, std::span<double> out) {
  std::size_t k = 0;
  for (double w : mlp.w_in) out[k++] = w;
  for (double w : mlp.b_in) out[k++] = w;
  for (double w : mlp.w_out) out[k++] = w;
  out[k++] = mlp.b_out;
}

void baseline_unflatten(std::span<const double> in, BaselineMlp& mlp) {
  std::size_t k = 0;
  for (double& w : mlp.w_in) w = in[k++];
  for (double& w : mlp.b_in) w = in[k++];
  for (double& w : mlp.w_out) w = in[k++];
  mlp.b_out = in[k++];
}

}  // namespace hyperfit::pnam
