#include "hyperfit/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "hyperfit/kinematics.hpp"

namespace hyperfit::analysis {

using symreg::ExprPtr;
using symreg::Op;

namespace {

// Internal normal form: coeff * x^deg * (ln x)^logpow * exp(rate * x).
// Exponential arguments beyond affine-in-x leave the algebra (known=false).
struct Asym {
  bool known = false;
  double coeff = 0.0;
  double deg = 0.0;
  int logpow = 0;
  double rate = 0.0;
};

// Growth ordering: positive-rate exponentials beat polynomials beat
// negative-rate (vanishing) exponentials; ties resolved by rate, degree,
// then log power.
int growth_class(const Asym& a) {
  if (a.rate > 0.0) return 2;
  if (a.rate == 0.0) return 1;
  return 0;
}

bool grows_faster(const Asym& a, const Asym& b) {
  const int ca = growth_class(a), cb = growth_class(b);
  if (ca != cb) return ca > cb;
  if (a.rate != b.rate) return a.rate > b.rate;
  if (a.deg != b.deg) return a.deg > b.deg;
  return a.logpow > b.logpow;
}

bool same_order(const Asym& a, const Asym& b) {
  return a.rate == b.rate && a.deg == b.deg && a.logpow == b.logpow;
}

Asym unknown_asym() { return {}; }

Asym classify(const ExprPtr& e) {
  switch (e->op) {
    case Op::Const: return {true, e->value, 0.0, 0, 0.0};
    case Op::Var: return {true, 1.0, 1.0, 0, 0.0};
    case Op::Neg: {
      Asym c = classify(e->left);
      c.coeff = -c.coeff;
      return c;
    }
    case Op::Add: {
      const Asym l = classify(e->left);
      const Asym r = classify(e->right);
      if (!l.known || !r.known) return unknown_asym();
      if (l.coeff == 0.0) return r;
      if (r.coeff == 0.0) return l;
      if (same_order(l, r)) {
        Asym s = l;
        s.coeff += r.coeff;
        if (s.coeff == 0.0) return unknown_asym();  // exact cancellation: order drops
        return s;
      }
      return grows_faster(l, r) ? l : r;
    }
    case Op::Mul: {
      const Asym l = classify(e->left);
      const Asym r = classify(e->right);
      if (!l.known || !r.known) return unknown_asym();
      return {true, l.coeff * r.coeff, l.deg + r.deg, l.logpow + r.logpow, l.rate + r.rate};
    }
    case Op::Div: {
      const Asym l = classify(e->left);
      const Asym r = classify(e->right);
      if (!l.known || !r.known || r.coeff == 0.0) return unknown_asym();
      return {true, l.coeff / r.coeff, l.deg - r.deg, l.logpow - r.logpow, l.rate - r.rate};
    }
    case Op::Exp: {
      const Asym a = classify(e->left);
      if (!a.known || a.rate != 0.0 || a.logpow != 0) return unknown_asym();
      if (a.deg == 0.0) {
        // exp of a bounded argument
        if (a.coeff > symreg::kExpMaxArg) return unknown_asym();
        return {true, std::exp(a.coeff), 0.0, 0, 0.0};
      }
      if (a.deg < 0.0) return {true, 1.0, 0.0, 0, 0.0};  // argument -> 0
      if (a.deg == 1.0) {
        // exp(c x + lower): lower-order content only rescales the prefactor,
        // so the coefficient carries sign information only.
        return {true, 1.0, 0.0, 0, a.coeff};
      }
      return unknown_asym();  // exp of superlinear growth
    }
    case Op::Ln: {
      const Asym a = classify(e->left);
      if (!a.known) return unknown_asym();
      if (a.rate > 0.0) return {true, a.rate, 1.0, 0, 0.0};  // ln(e^{rx} ...) ~ r x
      if (a.rate < 0.0) return unknown_asym();               // argument -> 0+
      if (a.deg > 0.0) {
        if (a.coeff <= 0.0) return unknown_asym();  // eventually out of domain
        return {true, a.deg, 0.0, 1, 0.0};          // ln(c x^d ...) ~ d ln x
      }
      if (a.deg == 0.0 && a.logpow == 0) {
        if (a.coeff <= symreg::kLnMinArg) return unknown_asym();
        return {true, std::log(a.coeff), 0.0, 0, 0.0};
      }
      return unknown_asym();
    }
  }
  return unknown_asym();
}

DominantTerm to_dominant(const Asym& a) {
  DominantTerm d;
  if (!a.known) return d;
  d.coeff = a.coeff;
  d.degree = a.deg;
  d.log_power = a.logpow;
  d.rate = a.rate;
  if (a.rate != 0.0) d.kind = DominantTerm::Kind::Exponential;
  else if (a.logpow != 0) d.kind = DominantTerm::Kind::LogPolynomial;
  else if (a.deg != 0.0) d.kind = DominantTerm::Kind::Polynomial;
  else d.kind = DominantTerm::Kind::Constant;
  return d;
}

void flatten_terms(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (e->op == Op::Add) {
    flatten_terms(e->left, out);
    flatten_terms(e->right, out);
  } else {
    out.push_back(e);
  }
}

}  // namespace

std::string DominantTerm::describe() const {
  char buf[160];
  switch (kind) {
    case Kind::Unknown:
      return "unclassified";
    case Kind::Constant:
      std::snprintf(buf, sizeof(buf), "constant %.4g", coeff);
      return buf;
    case Kind::Polynomial:
      std::snprintf(buf, sizeof(buf), "polynomial %.4g * x^%g", coeff, degree);
      return buf;
    case Kind::LogPolynomial:
      std::snprintf(buf, sizeof(buf), "log-corrected polynomial %.4g * x^%g * ln(x)^%d", coeff, degree,
                    log_power);
      return buf;
    case Kind::Exponential:
      std::snprintf(buf, sizeof(buf), "exponential with rate %+.4g%s", rate,
                    rate < 0.0 ? " (vanishing)" : "");
      return buf;
  }
  return "unclassified";
}

DominantTerm asymptotic_class(const symreg::ExprPtr& e) { return to_dominant(classify(e)); }

IntervalCheck check_interval(const symreg::ExprPtr& e, double lo, double hi, int n_grid) {
  if (lo < 2.0) throw std::invalid_argument("check_interval: lo must be >= 2 (invariant lower bound)");
  if (!(hi > lo)) throw std::invalid_argument("check_interval: hi must exceed lo");
  if (n_grid < 2) throw std::invalid_argument("check_interval: need at least 2 grid points");

  const ExprPtr d1 = symreg::diff_expr(e);
  const ExprPtr d2 = symreg::diff_expr(d1);

  IntervalCheck out;
  out.lo = lo;
  out.hi = hi;
  out.n_grid = n_grid;
  double min_first = std::numeric_limits<double>::infinity();
  double min_second = min_first;
  double scale_first = 1.0, scale_second = 1.0;
  for (int i = 0; i < n_grid; ++i) {
    const double x = lo + (hi - lo) * double(i) / double(n_grid - 1);
    const auto v = symreg::eval_expr(e, x);
    const auto g = symreg::eval_expr(d1, x);
    const auto h = symreg::eval_expr(d2, x);
    if (!v || !g || !h) {
      out.domain_violation_at = x;
      return out;
    }
    min_first = std::min(min_first, *g);
    min_second = std::min(min_second, *h);
    scale_first = std::max(scale_first, std::abs(*g));
    scale_second = std::max(scale_second, std::abs(*h));
  }
  out.min_first = min_first;
  out.min_second = min_second;
  out.nondecreasing = min_first >= -1e-9 * scale_first;
  out.convex = min_second >= -1e-9 * scale_second;
  return out;
}

AsymptoticReport asymptotic_nondecreasing(const symreg::ExprPtr& e) {
  AsymptoticReport report;
  report.function_dominant = asymptotic_class(e);
  const ExprPtr d = symreg::diff_expr(e);
  report.derivative_dominant = asymptotic_class(d);

  // Conservative screen over the derivative's additive terms: an exp term
  // with negative rate carries its (negative) coefficient into the
  // asymptotic argument, which requires that coefficient to be >= 0.
  std::vector<ExprPtr> terms;
  flatten_terms(d, terms);
  for (const ExprPtr& term : terms) {
    const DominantTerm t = asymptotic_class(term);
    if (t.kind == DominantTerm::Kind::Exponential && t.rate < 0.0 && t.coeff < 0.0) {
      report.nondecreasing = false;
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "derivative has exponential term with negative rate coefficient (rate %.4g)", t.rate);
      report.note = buf;
      return report;
    }
  }

  const DominantTerm& dom = report.derivative_dominant;
  switch (dom.kind) {
    case DominantTerm::Kind::Unknown:
      report.nondecreasing = false;
      report.note = "derivative growth unclassified; no positive certificate";
      break;
    case DominantTerm::Kind::Exponential:
      if (dom.rate > 0.0) {
        report.nondecreasing = dom.coeff >= 0.0;
        report.note = report.nondecreasing ? "derivative dominated by growing exponential, positive"
                                           : "derivative dominated by negative growing exponential";
      } else {
        // All terms vanish at infinity; the derivative tends to zero from
        // the sign of the surviving coefficient.
        report.nondecreasing = dom.coeff >= 0.0;
        report.note = "derivative vanishes at infinity";
      }
      break;
    default:
      report.nondecreasing = dom.coeff >= 0.0;
      report.note = report.nondecreasing ? "derivative dominant term positive at infinity"
                                         : "derivative dominant term negative at infinity";
      break;
  }
  return report;
}

std::string_view to_string(Coercivity c) {
  switch (c) {
    case Coercivity::Established: return "established";
    case Coercivity::Marginal: return "marginal";
    case Coercivity::NotEstablished: return "not_established";
  }
  return "?";
}

namespace {

struct GrowthExponent {
  double p = 0.0;        // effective power-law exponent; +inf for growing exponentials
  double lead = 0.0;     // leading coefficient where meaningful
  bool positive = false; // grows to +infinity
};

GrowthExponent growth_exponent(const DominantTerm& d) {
  GrowthExponent g;
  switch (d.kind) {
    case DominantTerm::Kind::Exponential:
      if (d.rate > 0.0 && d.coeff > 0.0) {
        g.p = std::numeric_limits<double>::infinity();
        g.lead = 0.0;
        g.positive = true;
      }
      break;
    case DominantTerm::Kind::Polynomial:
    case DominantTerm::Kind::LogPolynomial:
      // x^d ln(x)^k >= c x^d for large x, so the log factor only helps.
      if (d.coeff > 0.0 && d.degree >= 1.0) {
        g.p = d.degree;
        g.lead = d.coeff;
        g.positive = true;
      }
      break;
    default:
      break;
  }
  return g;
}

}  // namespace

CoercivityVerdict coercivity_check(const symreg::ExprPtr& psi1, const symreg::ExprPtr& psi2) {
  CoercivityVerdict verdict;
  const DominantTerm d1 = asymptotic_class(psi1);
  const DominantTerm d2 = asymptotic_class(psi2);
  const GrowthExponent g1 = growth_exponent(d1);
  const GrowthExponent g2 = growth_exponent(d2);

  if (!g1.positive || !g2.positive) {
    verdict.status = Coercivity::NotEstablished;
    verdict.rationale = "a shape function lacks certified growth (psi1: " + d1.describe() +
                        "; psi2: " + d2.describe() + ")";
    return verdict;
  }
  const bool p_unbounded = std::isinf(g1.p);
  if (!p_unbounded && g1.p < 2.0) {
    verdict.status = Coercivity::NotEstablished;
    verdict.rationale = "psi1 grows slower than quadratically (p = " + std::to_string(g1.p) + " < 2)";
    return verdict;
  }

  if (g2.p == 1.0) {
    if (p_unbounded) {
      // The Taylor trick supports any finite p, but q >= p/(p-1) then fails
      // by a vanishing margin for every choice.
      verdict.status = Coercivity::Marginal;
      verdict.p = std::numeric_limits<double>::infinity();
      verdict.q = 1.0;
      verdict.rationale =
          "exponential psi1 admits any p, but linear psi2 gives q = 1 < p/(p-1); "
          "the growth condition is marginally violated";
      return verdict;
    }
    verdict.status = Coercivity::NotEstablished;
    verdict.rationale = "linear psi2 gives q = 1 < p/(p-1) with finite p";
    return verdict;
  }

  const double p = p_unbounded ? std::max(2.0, g2.p / (g2.p - 1.0)) : g1.p;
  const double q = g2.p;
  char buf[160];
  if (q >= p / (p - 1.0)) {
    verdict.status = Coercivity::Established;
    verdict.p = p;
    verdict.q = q;
    double alpha = std::numeric_limits<double>::infinity();
    if (g1.lead > 0.0) alpha = std::min(alpha, g1.lead);
    if (g2.lead > 0.0) alpha = std::min(alpha, g2.lead);
    verdict.alpha = std::isfinite(alpha) ? alpha : 1.0;
    std::snprintf(buf, sizeof(buf), "witness alpha = %.4g, p = %g, q = %g", verdict.alpha, p, q);
    verdict.rationale = buf;
    return verdict;
  }
  verdict.status = Coercivity::NotEstablished;
  verdict.p = p;
  verdict.q = q;
  std::snprintf(buf, sizeof(buf), "q = %g < p/(p-1) for p = %g", q, p);
  verdict.rationale = buf;
  return verdict;
}

StressFreeCheck stress_free_check(const symreg::ExprPtr& psi1, const symreg::ExprPtr& psi2,
                                  std::optional<double> alpha0_override) {
  const auto d1 = symreg::eval_expr(symreg::diff_expr(psi1), 3.0);
  const auto d2 = symreg::eval_expr(symreg::diff_expr(psi2), 3.0);
  if (!d1 || !d2) throw std::domain_error("stress_free_check: derivative invalid at I = 3");
  StressFreeCheck out;
  out.alpha0 = alpha0_override.value_or(kinematics::alpha0_of(*d1, *d2));
  const Eigen::Matrix3d s =
      kinematics::second_pk_general({*d1, *d2}, Eigen::Matrix3d::Identity(), 0.0, out.alpha0);
  out.residual = s.norm();
  const double scale = std::max(1.0, std::abs(*d1) + 2.0 * std::abs(*d2));
  out.stress_free = out.residual < 1e-8 * scale;
  return out;
}

AnalysisVerdict analyze_pair(const symreg::ExprPtr& psi1, const symreg::ExprPtr& psi2, double lo,
                             double hi, int n_grid) {
  AnalysisVerdict v;
  v.lo = lo;
  v.hi = hi;
  v.n_grid = n_grid;
  v.psi1.interval = check_interval(psi1, lo, hi, n_grid);
  v.psi2.interval = check_interval(psi2, lo, hi, n_grid);
  v.psi1.asymptotic = asymptotic_nondecreasing(psi1);
  v.psi2.asymptotic = asymptotic_nondecreasing(psi2);
  v.coercivity = coercivity_check(psi1, psi2);
  v.stress_free = stress_free_check(psi1, psi2);
  return v;
}

}  // namespace hyperfit::analysis
