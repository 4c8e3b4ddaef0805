#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperfit/expr.hpp"
#include "hyperfit/kinematics.hpp"
#include "hyperfit/pnam.hpp"

namespace hyperfit::training {

using kinematics::LoadingMode;

/// One strain-stress measurement. p1 is the first Piola-Kirchhoff component
/// in MPa; p3 exists only for pure shear rigs that record the clamped face.
struct StressSample {
  LoadingMode mode = LoadingMode::UE;
  double lambda = 1.0;
  double p1 = 0.0;
  std::optional<double> p3;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 20000;            // full batch
  double split_fraction = 0.9;   // share of each mode kept for training
  double stress_scale = 1.0;     // preprocessing factor (0.05 for Treloar)
  std::uint64_t seed = 0;
  int hidden = 50;
};

struct SplitData {
  std::vector<StressSample> train;
  std::vector<StressSample> validation;
};

/// Extrapolative split: per mode, samples sorted by stretch; the largest
/// stretches go to validation. Throws std::invalid_argument for a fraction
/// outside (0, 1).
SplitData split_dataset(std::span<const StressSample> data, double fraction);

/// Sum of squared residuals of all provided stress components, computed in
/// preprocessed units (data stresses multiplied by stress_scale).
double loss(const pnam::PnamModel& model, std::span<const StressSample> batch);

/// Exact gradient of `loss` with respect to every raw parameter of both
/// nets, flattened as [net1 | net2] in icnn::flatten order.
std::vector<double> loss_gradients(const pnam::PnamModel& model, std::span<const StressSample> batch);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Standard bias-corrected ADAM update, in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr);

struct EpochLoss {
  double train = 0.0;
  double validation = 0.0;
};

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  pnam::PnamModel model;  // parameters with the lowest validation loss seen
  std::vector<EpochLoss> history;
  int best_epoch = 0;
};

/// Full-batch ADAM training with best-validation selection. Scalers are
/// (re)fitted on the training split before the first step. Throws TrainError
/// naming the epoch if the loss turns non-finite.
TrainResult train(pnam::PnamModel model, std::span<const StressSample> data, const TrainConfig& config);

/// Coefficient of determination. Throws std::invalid_argument for length
/// mismatch, fewer than 2 points, or constant truth.
double r2_score(std::span<const double> pred, std::span<const double> truth);

/// Closed-form energy for data generation and oracles.
struct EnergyModel {
  std::string name;
  kinematics::GradsFn grads_at;
};

EnergyModel neo_hookean(double mu);
EnergyModel mooney_rivlin(double c1, double c2);
EnergyModel exp_log(double big_a, double a, double b);
/// Energy from a symbolic pair (gradients via symbolic differentiation).
EnergyModel from_expressions(const symreg::ExprPtr& psi1, const symreg::ExprPtr& psi2);

/// Reduced-form stresses of `energy` on a stretch grid, optionally with
/// additive Gaussian noise. PS samples carry both p1 and p3. Throws
/// std::domain_error if the energy is undefined somewhere on the grid.
std::vector<StressSample> generate_synthetic(const EnergyModel& energy,
                                             std::span<const LoadingMode> modes,
                                             std::span<const double> lambda_grid,
                                             double noise_sd, std::uint64_t seed);

// Baseline MLP training (same protocol, same loss restricted to provided
// components); reported for the overfitting comparison, never asserted.
struct BaselineTrainResult {
  pnam::BaselineMlp mlp;
  std::vector<EpochLoss> history;
  int best_epoch = 0;
};

double baseline_loss(const pnam::BaselineMlp& mlp, std::span<const StressSample> batch);
BaselineTrainResult train_baseline(pnam::BaselineMlp mlp, std::span<const StressSample> data,
                                   const TrainConfig& config);

/// Predicted p1 (and p3 for PS) in data units, for any gradient source.
kinematics::ReducedStress predict_stress(const kinematics::GradsFn& grads, LoadingMode mode, double lambda);

}  // namespace hyperfit::training
