#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hyperfit/icnn.hpp"
#include "hyperfit/kinematics.hpp"

namespace hyperfit::pnam {

/// Min-max normalization of one invariant, fitted on the training split.
/// The slope is positive, so composing with a convex function preserves
/// convexity (affine reparametrization).
struct AffineScaler {
  double m = 0.0;
  double M = 1.0;

  double scale(double x) const { return (x - m) / (M - m); }
  double unscale(double u) const { return m + u * (M - m); }
  double slope() const { return 1.0 / (M - m); }
};

/// Two ICNN shape functions plus input scalers forming the additive energy
///   psi(I1, I2) = psi1(I1) + psi2(I2)
/// in preprocessed units. stress_scale is the factor applied to the stress
/// data before training (0.05 for Treloar); predictions divide it back out
/// so the public surface speaks data units (MPa).
struct PnamModel {
  icnn::IcnnParams net1;
  icnn::IcnnParams net2;
  AffineScaler scaler1;
  AffineScaler scaler2;
  double stress_scale = 1.0;
};

/// Per-invariant min/max from the training split. Throws
/// std::invalid_argument on fewer than 2 points or a degenerate range.
std::pair<AffineScaler, AffineScaler> fit_scalers(std::span<const kinematics::Invariants> train);

PnamModel make_model(std::uint64_t seed, int hidden,
                     std::span<const kinematics::Invariants> train_invariants,
                     double stress_scale);

/// Energy gradients in preprocessed (training) units:
///   d_k = icnn_input_grad(net_k, scale_k(I_k)) * slope_k.
kinematics::ShapeGradients pnam_grads_scaled(const PnamModel& model, const kinematics::Invariants& inv);

/// Energy gradients in data units (preprocessing factor divided out).
kinematics::ShapeGradients pnam_grads(const PnamModel& model, const kinematics::Invariants& inv);

/// Energy in data units with the zero-energy correction applied:
/// psi(3, 3) = 0 exactly.
double pnam_energy(const PnamModel& model, const kinematics::Invariants& inv);

/// One shape function psi_k (k = 1 or 2) at a raw invariant value, in data
/// units. This is the step-1 -> step-2 bridge sampled for symbolic
/// regression; no zero-energy subtraction (constants are the SR's business).
double shape_value(const PnamModel& model, int which, double invariant);
double shape_slope(const PnamModel& model, int which, double invariant);

// ---------------------------------------------------------------------------
// Unconstrained baseline: a conventional MLP psi(I1, I2) used only for the
// overfitting comparison. One hidden layer, ELU, no weight constraints.

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_prime(double x) { return x > 0.0 ? 1.0 : std::exp(x); }
inline double elu_second(double x) { return x > 0.0 ? 0.0 : std::exp(x); }

struct BaselineMlp {
  std::vector<double> w_in;   // hidden x 2, row-major
  std::vector<double> b_in;   // hidden
  std::vector<double> w_out;  // hidden
  double b_out = 0.0;
  AffineScaler scaler1;
  AffineScaler scaler2;
  double stress_scale = 1.0;

  int width() const { return static_cast<int>(b_in.size()); }
};

BaselineMlp baseline_init(std::uint64_t seed, int hidden, const AffineScaler& s1,
                          const AffineScaler& s2, double stress_scale);

struct BaselineEval {
  double value = 0.0;
  kinematics::ShapeGradients grads;
};

BaselineEval baseline_forward_and_grads_scaled(const BaselineMlp& mlp, const kinematics::Invariants& inv);
BaselineEval baseline_forward_and_grads(const BaselineMlp& mlp, const kinematics::Invariants& inv);

/// Tangents of value and both input-gradients with respect to every weight,
/// flattened in the order w_in, b_in, w_out, b_out.
struct BaselineTangent {
  std::vector<double> value;
  std::vector<double> d1;
  std::vector<double> d2;
};

BaselineTangent baseline_param_tangent(const BaselineMlp& mlp, const kinematics::Invariants& inv);

std::size_t baseline_param_count(const BaselineMlp& mlp);
void baseline_flatten(const BaselineMlp& mlp, std::span<double> out);
void baseline_unflatten(std::span<const double> in, BaselineMlp& mlp);

}  // namespace hyperfit::pnam
