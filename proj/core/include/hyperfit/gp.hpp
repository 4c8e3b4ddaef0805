#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hyperfit/expr.hpp"
#include "hyperfit/pnam.hpp"
#include "hyperfit/rng.hpp"

namespace hyperfit::symreg {

struct GpConfig {
  std::vector<Op> binary_ops = {Op::Add, Op::Mul};
  std::vector<Op> unary_ops;       // subset of {Exp, Ln}; empty disables unaries
  int max_size = 30;
  int max_depth = 30;
  int population = 500;
  int tournament = 7;
  double p_crossover = 0.7;
  double p_mutation = 0.25;
  int max_iterations = 100;
  double time_budget_sec = 360.0;  // <= 0 disables the wall-clock budget
  bool nested_unary_ban = false;
  std::uint64_t seed = 0;
  int refine_top = 50;             // candidates refined per generation
  int refine_iters = 12;           // Gauss-Newton iterations per refinement
};

struct SearchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParetoEntry {
  ExprPtr expr;
  double mse = 0.0;
};

/// Per-complexity best candidates: strictly larger complexity implies
/// strictly smaller mse; dominated candidates are never stored.
class ParetoFront {
 public:
  void offer(const ExprPtr& e, double mse);
  const std::map<int, ParetoEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  double best_mse() const;

 private:
  std::map<int, ParetoEntry> entries_;
};

using Samples = std::span<const std::pair<double, double>>;

/// Mean squared error of e over (x, y) samples; +infinity if any
/// evaluation is invalid.
double expr_mse(const ExprPtr& e, Samples samples);

/// Grow-method random tree within the config's operator set and caps.
ExprPtr random_tree(rng::Stream& stream, const GpConfig& config, int depth_budget);

/// Subtree exchange; offspring violating size/depth/nested-unary caps are
/// rejected and re-drawn a bounded number of times, then the first parent
/// is copied.
ExprPtr crossover(const ExprPtr& a, const ExprPtr& b, rng::Stream& stream, const GpConfig& config);

/// One of: point op-swap, subtree replacement, multiplicative log-normal
/// constant jitter (sigma = 0.2). Same rejection policy as crossover.
ExprPtr mutate(const ExprPtr& e, rng::Stream& stream, const GpConfig& config);

/// Gauss-Newton refinement of the constants against the samples, at most
/// max_iters steps, with random-restart hill climbing when the normal
/// equations go singular. The returned expression never fits worse than
/// the input; an expression with no constants (or no valid evaluations)
/// is returned unchanged.
ExprPtr fit_constants(const ExprPtr& e, Samples samples, rng::Stream& stream, int max_iters = 30);

/// Genetic-programming search; runs until the iteration cap or wall-clock
/// budget. Deterministic for a fixed seed when the time budget is disabled.
/// Throws SearchError if no viable individual can be built, and
/// std::invalid_argument for bad config or fewer than 10 samples.
ParetoFront gp_search(Samples samples, const GpConfig& config);

/// n uniformly spaced samples of shape function `which` (1 or 2) spanning
/// the training range of its invariant, in data units.
std::vector<std::pair<double, double>> sample_shape_function(const pnam::PnamModel& model, int which,
                                                             int n = 500);
std::vector<std::pair<double, double>> sample_shape_slope(const pnam::PnamModel& model, int which,
                                                          int n = 500);

struct SelectionEntry {
  int complexity = 0;
  double mse = 0.0;
  double derivative_mse = 0.0;
  bool chosen = false;
};

struct Selection {
  ExprPtr expr;
  int complexity = 0;
  std::vector<SelectionEntry> table;  // ascending complexity; the Fig-6 panels
};

/// Smallest complexity whose mse is within tau of the front's best AND
/// whose symbolic-derivative mse against grad_samples is within tau of the
/// best derivative mse. Falls back to the most accurate entry when nothing
/// satisfies both. Throws std::invalid_argument on an empty front.
Selection select_model(const ParetoFront& front, Samples grad_samples, double tau = 1.5);

}  // namespace hyperfit::symreg
