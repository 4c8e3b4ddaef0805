#include "hyperfit/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperfit::kinematics {

std::string_view to_string(LoadingMode mode) {
  switch (mode) {
    case LoadingMode::UE: return "UE";
    case LoadingMode::EBE: return "EBE";
    case LoadingMode::PS: return "PS";
  }
  return "?";
}

std::optional<LoadingMode> parse_mode(std::string_view text) {
  if (text == "UE") return LoadingMode::UE;
  if (text == "EBE") return LoadingMode::EBE;
  if (text == "PS") return LoadingMode::PS;
  return std::nullopt;
}

Eigen::Matrix3d deformation_gradient(LoadingMode mode, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("deformation_gradient: lambda must be positive");
  Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
  switch (mode) {
    case LoadingMode::UE: {
      const double t = 1.0 / std::sqrt(lambda);
      f.diagonal() << lambda, t, t;
      break;
    }
    case LoadingMode::EBE:
      f.diagonal() << lambda, lambda, 1.0 / (lambda * lambda);
      break;
    case LoadingMode::PS:
      f.diagonal() << lambda, 1.0 / lambda, 1.0;
      break;
  }
  return f;
}

Invariants invariants_of(const Eigen::Matrix3d& f) {
  const double det_f = f.determinant();
  if (!(det_f > 0.0)) throw std::domain_error("invariants_of: deformation gradient must have positive determinant");
  const Eigen::Matrix3d c = f.transpose() * f;
  const double i1 = c.trace();
  const double i2 = 0.5 * (i1 * i1 - (c * c).trace());
  const double i3 = c.determinant();
  return {i1, i2, i3};
}

Invariants mode_invariants(LoadingMode mode, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("mode_invariants: lambda must be positive");
  const double l2 = lambda * lambda;
  switch (mode) {
    case LoadingMode::UE:
      return {l2 + 2.0 / lambda, 2.0 * lambda + 1.0 / l2, 1.0};
    case LoadingMode::EBE:
      return {2.0 * l2 + 1.0 / (l2 * l2), l2 * l2 + 2.0 / l2, 1.0};
    case LoadingMode::PS: {
      const double s = l2 + 1.0 / l2 + 1.0;
      return {s, s, 1.0};
    }
  }
  throw std::domain_error("mode_invariants: unknown mode");
}

StressCoefficients stress_coefficients(LoadingMode mode, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("stress_coefficients: lambda must be positive");
  const double l2 = lambda * lambda;
  StressCoefficients k;
  switch (mode) {
    case LoadingMode::UE: {
      const double factor = 2.0 * (lambda - 1.0 / l2);
      k.k1_p1 = factor;
      k.k2_p1 = factor / lambda;
      break;
    }
    case LoadingMode::EBE: {
      const double factor = 2.0 * (lambda - 1.0 / (l2 * l2 * lambda));
      k.k1_p1 = factor;
      k.k2_p1 = factor * l2;
      break;
    }
    case LoadingMode::PS: {
      const double f1 = 2.0 * (lambda - 1.0 / (l2 * lambda));
      k.k1_p1 = f1;
      k.k2_p1 = f1;
      k.has_p3 = true;
      const double f3 = 2.0 * (1.0 - 1.0 / l2);
      k.k1_p3 = f3;
      k.k2_p3 = f3 * l2;
      break;
    }
  }
  return k;
}

ReducedStress reduced_stress(const GradsFn& grads_at, LoadingMode mode, double lambda) {
  const Invariants inv = mode_invariants(mode, lambda);
  const ShapeGradients g = grads_at(inv.i1, inv.i2);
  const StressCoefficients k = stress_coefficients(mode, lambda);
  ReducedStress out;
  out.p1 = k.k1_p1 * g.d1 + k.k2_p1 * g.d2;
  if (k.has_p3) out.p3 = k.k1_p3 * g.d1 + k.k2_p3 * g.d2;
  return out;
}

Eigen::Matrix3d second_pk_general(const ShapeGradients& grads, const Eigen::Matrix3d& c,
                                  double pressure, double alpha0) {
  const double det_c = c.determinant();
  if (std::abs(det_c) < 1e-14) throw std::domain_error("second_pk_general: C is not invertible");
  const double i1 = c.trace();
  const Eigen::Matrix3d c_inv = c.inverse();
  const Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();
  return 2.0 * ((grads.d1 + i1 * grads.d2) * identity - grads.d2 * c) -
         (pressure + 2.0 * alpha0) * det_c * c_inv;
}

double alpha0_of(double d1_at_3, double d2_at_3) { return d1_at_3 + 2.0 * d2_at_3; }

}  // namespace hyperfit::kinematics
