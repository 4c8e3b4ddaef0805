#include "hyperfit/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "hyperfit/rng.hpp"

namespace hyperfit::training {

using kinematics::Invariants;
using kinematics::ShapeGradients;
using kinematics::StressCoefficients;

SplitData split_dataset(std::span<const StressSample> data, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split_dataset: fraction must lie in (0, 1)");
  std::map<LoadingMode, std::vector<StressSample>> by_mode;
  for (const auto& s : data) by_mode[s.mode].push_back(s);
  SplitData out;
  for (auto& [mode, samples] : by_mode) {
    if (samples.size() < 2)
      throw std::invalid_argument("split_dataset: need at least 2 samples per mode");
    std::stable_sort(samples.begin(), samples.end(),
                     [](const StressSample& a, const StressSample& b) { return a.lambda < b.lambda; });
    auto n_train = static_cast<std::size_t>(std::floor(double(samples.size()) * fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, samples.size() - 1);
    out.train.insert(out.train.end(), samples.begin(), samples.begin() + long(n_train));
    out.validation.insert(out.validation.end(), samples.begin() + long(n_train), samples.end());
  }
  return out;
}

namespace {

struct ResidualTerm {
  double residual;  // prediction - scaled target
  double k1, k2;    // d residual / d d1, d d2 (scaled gradients)
};

// Collects the residuals of every provided component of one sample.
template <typename Fn>
void for_each_residual(const pnam::PnamModel& model, const StressSample& s, Fn&& fn) {
  const Invariants inv = kinematics::mode_invariants(s.mode, s.lambda);
  const ShapeGradients g = pnam::pnam_grads_scaled(model, inv);
  const StressCoefficients k = kinematics::stress_coefficients(s.mode, s.lambda);
  fn(inv, ResidualTerm{k.k1_p1 * g.d1 + k.k2_p1 * g.d2 - s.p1 * model.stress_scale, k.k1_p1, k.k2_p1});
  if (s.p3 && k.has_p3)
    fn(inv, ResidualTerm{k.k1_p3 * g.d1 + k.k2_p3 * g.d2 - *s.p3 * model.stress_scale, k.k1_p3, k.k2_p3});
}

}  // namespace

double loss(const pnam::PnamModel& model, std::span<const StressSample> batch) {
  double total = 0.0;
  for (const auto& s : batch) {
    for_each_residual(model, s, [&](const Invariants&, const ResidualTerm& t) {
      total += t.residual * t.residual;
    });
  }
  return total;
}

std::vector<double> loss_gradients(const pnam::PnamModel& model, std::span<const StressSample> batch) {
  const std::size_t n1 = icnn::param_count(model.net1);
  const std::size_t n2 = icnn::param_count(model.net2);
  std::vector<double> grad(n1 + n2, 0.0);
  std::vector<double> tangent1(n1), tangent2(n2);
  for (const auto& s : batch) {
    const Invariants inv = kinematics::mode_invariants(s.mode, s.lambda);
    const double x1 = model.scaler1.scale(inv.i1);
    const double x2 = model.scaler2.scale(inv.i2);
    const auto t1 = icnn::icnn_param_tangent(model.net1, x1);
    const auto t2 = icnn::icnn_param_tangent(model.net2, x2);
    icnn::flatten(t1.slope, tangent1);
    icnn::flatten(t2.slope, tangent2);
    const double sl1 = model.scaler1.slope();
    const double sl2 = model.scaler2.slope();
    for_each_residual(model, s, [&](const Invariants&, const ResidualTerm& t) {
      // d residual / d theta1 = k1 * sl1 * d(slope1)/d theta1, etc.
      const double c1 = 2.0 * t.residual * t.k1 * sl1;
      const double c2 = 2.0 * t.residual * t.k2 * sl2;
      for (std::size_t i = 0; i < n1; ++i) grad[i] += c1 * tangent1[i];
      for (std::size_t i = 0; i < n2; ++i) grad[n1 + i] += c2 * tangent2[i];
    });
  }
  return grad;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: incongruent shapes");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

TrainResult train(pnam::PnamModel model, std::span<const StressSample> data, const TrainConfig& config) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  const SplitData split = split_dataset(data, config.split_fraction);

  std::vector<Invariants> train_inv;
  train_inv.reserve(split.train.size());
  for (const auto& s : split.train) train_inv.push_back(kinematics::mode_invariants(s.mode, s.lambda));
  auto [s1, s2] = pnam::fit_scalers(train_inv);
  model.scaler1 = s1;
  model.scaler2 = s2;
  model.stress_scale = config.stress_scale;

  const std::size_t n1 = icnn::param_count(model.net1);
  const std::size_t n2 = icnn::param_count(model.net2);
  std::vector<double> theta(n1 + n2);
  icnn::flatten(model.net1, std::span(theta).subspan(0, n1));
  icnn::flatten(model.net2, std::span(theta).subspan(n1, n2));

  AdamState adam(theta.size());
  TrainResult result;
  result.model = model;
  result.history.reserve(static_cast<std::size_t>(std::max(config.epochs, 0)));
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<double> grad = loss_gradients(model, split.train);
    adam_step(adam, theta, grad, config.learning_rate);
    icnn::unflatten(std::span<const double>(theta).subspan(0, n1), model.net1);
    icnn::unflatten(std::span<const double>(theta).subspan(n1, n2), model.net2);

    const double train_loss = loss(model, split.train);
    const double val_loss = split.validation.empty() ? train_loss : loss(model, split.validation);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw TrainError("train: loss diverged at epoch " + std::to_string(epoch));
    result.history.push_back({train_loss, val_loss});
    if (val_loss < best_val) {
      best_val = val_loss;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

double r2_score(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("r2_score: length mismatch");
  if (truth.size() < 2) throw std::invalid_argument("r2_score: need at least 2 points");
  double mean = 0.0;
  for (double y : truth) mean += y;
  mean /= double(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) throw std::invalid_argument("r2_score: truth is constant, score undefined");
  return 1.0 - ss_res / ss_tot;
}

EnergyModel neo_hookean(double mu) {
  return {"neo-hookean", [mu](double, double) { return ShapeGradients{0.5 * mu, 0.0}; }};
}

EnergyModel mooney_rivlin(double c1, double c2) {
  return {"mooney-rivlin", [c1, c2](double, double) { return ShapeGradients{c1, c2}; }};
}

EnergyModel exp_log(double big_a, double a, double b) {
  return {"exp-log", [big_a, a, b](double i1, double) {
            if (i1 <= 2.0) throw std::domain_error("exp_log: requires I1 > 2");
            const double d1 = big_a * (std::exp(a * (i1 - 3.0)) + b * (1.0 - std::log(i1 - 2.0)) -
                                       b * (i1 - 1.0) / (i1 - 2.0));
            return ShapeGradients{d1, 0.0};
          }};
}

EnergyModel from_expressions(const symreg::ExprPtr& psi1, const symreg::ExprPtr& psi2) {
  const symreg::ExprPtr d1 = symreg::diff_expr(psi1);
  const symreg::ExprPtr d2 = symreg::diff_expr(psi2);
  return {"symbolic", [d1, d2](double i1, double i2) {
            const auto g1 = symreg::eval_expr(d1, i1);
            const auto g2 = symreg::eval_expr(d2, i2);
            if (!g1 || !g2) throw std::domain_error("symbolic energy gradient undefined at invariant");
            return ShapeGradients{*g1, *g2};
          }};
}

std::vector<StressSample> generate_synthetic(const EnergyModel& energy,
                                             std::span<const LoadingMode> modes,
                                             std::span<const double> lambda_grid,
                                             double noise_sd, std::uint64_t seed) {
  rng::Stream stream(seed);
  std::vector<StressSample> out;
  out.reserve(modes.size() * lambda_grid.size());
  for (LoadingMode mode : modes) {
    for (double lambda : lambda_grid) {
      const auto stress = kinematics::reduced_stress(energy.grads_at, mode, lambda);
      StressSample s;
      s.mode = mode;
      s.lambda = lambda;
      s.p1 = stress.p1 + (noise_sd > 0.0 ? stream.normal(0.0, noise_sd) : 0.0);
      if (stress.p3) s.p3 = *stress.p3 + (noise_sd > 0.0 ? stream.normal(0.0, noise_sd) : 0.0);
      out.push_back(s);
    }
  }
  return out;
}

double baseline_loss(const pnam::BaselineMlp& mlp, std::span<const StressSample> batch) {
  double total = 0.0;
  for (const auto& s : batch) {
    const Invariants inv = kinematics::mode_invariants(s.mode, s.lambda);
    const auto eval = pnam::baseline_forward_and_grads_scaled(mlp, inv);
    const StressCoefficients k = kinematics::stress_coefficients(s.mode, s.lambda);
    const double r1 = k.k1_p1 * eval.grads.d1 + k.k2_p1 * eval.grads.d2 - s.p1 * mlp.stress_scale;
    total += r1 * r1;
    if (s.p3 && k.has_p3) {
      const double r3 = k.k1_p3 * eval.grads.d1 + k.k2_p3 * eval.grads.d2 - *s.p3 * mlp.stress_scale;
      total += r3 * r3;
    }
  }
  return total;
}

namespace {

std::vector<double> baseline_loss_gradients(const pnam::BaselineMlp& mlp,
                                            std::span<const StressSample> batch) {
  const std::size_t n = pnam::baseline_param_count(mlp);
  std::vector<double> grad(n, 0.0);
  for (const auto& s : batch) {
    const Invariants inv = kinematics::mode_invariants(s.mode, s.lambda);
    const auto eval = pnam::baseline_forward_and_grads_scaled(mlp, inv);
    const auto tangent = pnam::baseline_param_tangent(mlp, inv);
    const StressCoefficients k = kinematics::stress_coefficients(s.mode, s.lambda);
    const double r1 = k.k1_p1 * eval.grads.d1 + k.k2_p1 * eval.grads.d2 - s.p1 * mlp.stress_scale;
    for (std::size_t i = 0; i < n; ++i)
      grad[i] += 2.0 * r1 * (k.k1_p1 * tangent.d1[i] + k.k2_p1 * tangent.d2[i]);
    if (s.p3 && k.has_p3) {
      const double r3 = k.k1_p3 * eval.grads.d1 + k.k2_p3 * eval.grads.d2 - *s.p3 * mlp.stress_scale;
      for (std::size_t i = 0; i < n; ++i)
        grad[i] += 2.0 * r3 * (k.k1_p3 * tangent.d1[i] + k.k2_p3 * tangent.d2[i]);
    }
  }
  return grad;
}

}  // namespace

BaselineTrainResult train_baseline(pnam::BaselineMlp mlp, std::span<const StressSample> data,
                                   const TrainConfig& config) {
  if (data.empty()) throw std::invalid_argument("train_baseline: empty dataset");
  const SplitData split = split_dataset(data, config.split_fraction);
  std::vector<Invariants> train_inv;
  for (const auto& s : split.train) train_inv.push_back(kinematics::mode_invariants(s.mode, s.lambda));
  auto [s1, s2] = pnam::fit_scalers(train_inv);
  mlp.scaler1 = s1;
  mlp.scaler2 = s2;
  mlp.stress_scale = config.stress_scale;

  std::vector<double> theta(pnam::baseline_param_count(mlp));
  pnam::baseline_flatten(mlp, theta);
  AdamState adam(theta.size());
  BaselineTrainResult result;
  result.mlp = mlp;
  double best_val = std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<double> grad = baseline_loss_gradients(mlp, split.train);
    adam_step(adam, theta, grad, config.learning_rate);
    pnam::baseline_unflatten(theta, mlp);
    const double train_loss = baseline_loss(mlp, split.train);
    const double val_loss = split.validation.empty() ? train_loss : baseline_loss(mlp, split.validation);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw TrainError("train_baseline: loss diverged at epoch " + std::to_string(epoch));
    result.history.push_back({train_loss, val_loss});
    if (val_loss < best_val) {
      best_val = val_loss;
      result.mlp = mlp;
      result.best_epoch = epoch;
    }
  }
  return result;
}

kinematics::ReducedStress predict_stress(const kinematics::GradsFn& grads, LoadingMode mode, double lambda) {
  return kinematics::reduced_stress(grads, mode, lambda);
}

}  // namespace hyperfit::training
