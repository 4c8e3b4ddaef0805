#pragma once

#include <optional>
#include <string>

#include "hyperfit/expr.hpp"

namespace hyperfit::analysis {

/// Structural behavior of an expression as x -> +infinity, produced by
/// recursive dominant-term algebra over Add/Mul/Div/Exp/Ln/Neg trees.
/// "Unknown" is an honest answer for compositions outside the algebra
/// (e.g. exp of a quadratic); it is never a wrong signed claim.
struct DominantTerm {
  enum class Kind { Unknown, Constant, Polynomial, LogPolynomial, Exponential };
  Kind kind = Kind::Unknown;
  double coeff = 0.0;    // sign meaningful for all kinds; magnitude only for polynomials
  double degree = 0.0;   // polynomial degree (x^degree)
  int log_power = 0;     // (ln x)^log_power factor
  double rate = 0.0;     // exp(rate * x); negative rate means the term vanishes

  std::string describe() const;
};

DominantTerm asymptotic_class(const symreg::ExprPtr& e);

/// Grid-sampled convexity / monotonicity certificate over [lo, hi] using
/// symbolic first and second derivatives. lo must be >= 2 (the invariant
/// lower bound under incompressibility). Tolerances scale with the largest
/// sampled magnitude of the respective derivative.
struct IntervalCheck {
  bool convex = false;
  bool nondecreasing = false;
  double min_second = 0.0;  // worst sampled second derivative
  double min_first = 0.0;   // worst sampled slope
  double lo = 0.0, hi = 0.0;
  int n_grid = 0;
  std::optional<double> domain_violation_at;  // Invalid evaluation inside the interval
};

IntervalCheck check_interval(const symreg::ExprPtr& e, double lo, double hi, int n_grid = 2000);

/// Non-decreasing behavior at infinity, judged on the symbolic derivative.
/// Besides the honest dominant term, any additive exponential term of the
/// derivative with negative rate and negative coefficient is flagged: such
/// a term caps the admissible regime regardless of polynomial growth
/// elsewhere (an exp term of the derivative must carry a non-negative
/// coefficient for the growth argument to go through).
struct AsymptoticReport {
  DominantTerm function_dominant;
  DominantTerm derivative_dominant;
  bool nondecreasing = false;
  std::string note;
};

AsymptoticReport asymptotic_nondecreasing(const symreg::ExprPtr& e);

enum class Coercivity { Established, Marginal, NotEstablished };

std::string_view to_string(Coercivity c);

/// Growth-condition verdict for the energy pair:
///   psi >= alpha (I1^p + I2^q) + alpha + beta,  p >= 2, q >= p/(p-1).
/// A positive-rate exponential in psi1 supports any p; the linear-psi2
/// pattern then violates q >= p/(p-1) only marginally (the bound tends to 1
/// from above as p grows).
struct CoercivityVerdict {
  Coercivity status = Coercivity::NotEstablished;
  double alpha = 0.0;
  double p = 0.0;
  double q = 0.0;
  std::string rationale;
};

CoercivityVerdict coercivity_check(const symreg::ExprPtr& psi1, const symreg::ExprPtr& psi2);

/// Evaluates the assembled second Piola-Kirchhoff stress at C = I with the
/// alpha0 correction (or an explicit override) and p = 0. True when the
/// Frobenius norm vanishes to 1e-8 relative to the gradient scale. Throws
/// std::domain_error if a derivative is invalid at I = 3.
struct StressFreeCheck {
  bool stress_free = false;
  double residual = 0.0;
  double alpha0 = 0.0;
};

StressFreeCheck stress_free_check(const symreg::ExprPtr& psi1, const symreg::ExprPtr& psi2,
                                  std::optional<double> alpha0_override = std::nullopt);

/// Per-shape-function verdict block.
struct ShapeVerdict {
  IntervalCheck interval;
  AsymptoticReport asymptotic;
};

struct AnalysisVerdict {
  ShapeVerdict psi1;
  ShapeVerdict psi2;
  CoercivityVerdict coercivity;
  StressFreeCheck stress_free;
  double lo = 2.0, hi = 100.0;
  int n_grid = 2000;
};

AnalysisVerdict analyze_pair(const symreg::ExprPtr& psi1, const symreg::ExprPtr& psi2, double lo,
                             double hi, int n_grid = 2000);

}  // namespace hyperfit::analysis
