#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string_view>

namespace hyperfit::kinematics {

/// Loading modes realizable in standard rubber testing rigs. Every dataset
/// row carries exactly one of these.
enum class LoadingMode { UE, EBE, PS };

std::string_view to_string(LoadingMode mode);
std::optional<LoadingMode> parse_mode(std::string_view text);

/// Principal invariants of the right Cauchy-Green tensor C = F^T F.
struct Invariants {
  double i1 = 3.0;
  double i2 = 3.0;
  double i3 = 1.0;
};

/// Partial derivatives of an isochoric energy psi(I1, I2).
struct ShapeGradients {
  double d1 = 0.0;  // d psi / d I1
  double d2 = 0.0;  // d psi / d I2
};

/// Diagonal deformation gradient for a loading mode at stretch lambda:
///   UE:  diag(l, l^-1/2, l^-1/2)
///   EBE: diag(l, l, l^-2)
///   PS:  diag(l, l^-1, 1)
/// All are isochoric (det F = 1). Throws std::domain_error for lambda <= 0.
Eigen::Matrix3d deformation_gradient(LoadingMode mode, double lambda);

/// Invariants of C = F^T F for an arbitrary deformation gradient.
/// Throws std::domain_error if F is singular (det <= 0).
Invariants invariants_of(const Eigen::Matrix3d& f);

/// Closed-form invariants of the mode-constructed diagonal gradients.
Invariants mode_invariants(LoadingMode mode, double lambda);

/// Measurable first Piola-Kirchhoff components of a reduced loading state.
/// p3 is engaged only for pure shear, where the clamped z-faces carry load.
struct ReducedStress {
  double p1 = 0.0;
  std::optional<double> p3;
};

/// Linear coefficients of the reduced stress in the shape gradients:
///   P1 = k1_p1 * d1 + k2_p1 * d2   (and P3 analogously when present).
/// The kinematic factor vanishes identically at lambda = 1, so all
/// coefficients are exactly zero there.
struct StressCoefficients {
  double k1_p1 = 0.0;
  double k2_p1 = 0.0;
  bool has_p3 = false;
  double k1_p3 = 0.0;
  double k2_p3 = 0.0;
};

StressCoefficients stress_coefficients(LoadingMode mode, double lambda);

using GradsFn = std::function<ShapeGradients(double i1, double i2)>;

/// Reduced first Piola-Kirchhoff stress of an incompressible isotropic
/// energy under the given loading mode. The hydrostatic pressure is
/// eliminated analytically by the traction-free faces and never appears.
ReducedStress reduced_stress(const GradsFn& grads_at, LoadingMode mode, double lambda);

/// Second Piola-Kirchhoff stress of the full energy
///   psi = psi1(I1) + psi2(I2) - p/2 (I3 - 1) - alpha0 (I3 - 1) - psi0:
///   S = 2[(d1 + I1 d2) I - d2 C] - (p + 2 alpha0) I3 C^{-1}.
/// Throws std::domain_error if c is not invertible.
Eigen::Matrix3d second_pk_general(const ShapeGradients& grads, const Eigen::Matrix3d& c,
                                  double pressure, double alpha0);

/// Zero-stress coefficient of the I3-linear correction term:
/// alpha0 = d_psi1(3) + 2 d_psi2(3).
double alpha0_of(double d1_at_3, double d2_at_3);

}  // namespace hyperfit::kinematics
