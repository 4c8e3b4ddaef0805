#include "hyperfit/gp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace hyperfit::symreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_config(const GpConfig& config) {
  if (config.max_size < 1 || config.max_depth < 0) throw std::invalid_argument("gp: caps must be positive");
  if (config.population < 2) throw std::invalid_argument("gp: population must be >= 2");
  if (config.tournament < 1) throw std::invalid_argument("gp: tournament must be >= 1");
  if (config.p_crossover < 0 || config.p_crossover > 1 || config.p_mutation < 0 || config.p_mutation > 1 ||
      config.p_crossover + config.p_mutation > 1.0)
    throw std::invalid_argument("gp: probabilities must lie in [0, 1] and sum to <= 1");
  if (config.max_iterations < 1) throw std::invalid_argument("gp: max_iterations must be >= 1");
  for (Op op : config.binary_ops)
    if (!is_binary(op)) throw std::invalid_argument("gp: non-binary op in binary_ops");
  for (Op op : config.unary_ops)
    if (op != Op::Exp && op != Op::Ln) throw std::invalid_argument("gp: unary_ops limited to Exp/Ln");
}

bool respects_limits(const ExprPtr& e, const GpConfig& config) {
  if (complexity(e) > config.max_size) return false;
  if (tree_depth(e) > config.max_depth) return false;
  if (config.nested_unary_ban && has_nested_unary(e)) return false;
  return true;
}

}  // namespace

void ParetoFront::offer(const ExprPtr& e, double mse) {
  if (!std::isfinite(mse)) return;
  const int c = complexity(e);
  // Dominated by an equally simple or simpler entry that fits at least as well?
  for (const auto& [cc, entry] : entries_) {
    if (cc > c) break;
    if (entry.mse <= mse) return;
  }
  entries_[c] = {e, mse};
  // Drop entries that the new one now dominates.
  for (auto it = entries_.upper_bound(c); it != entries_.end();) {
    if (it->second.mse >= mse) it = entries_.erase(it);
    else ++it;
  }
}

double ParetoFront::best_mse() const {
  return entries_.empty() ? kInf : entries_.rbegin()->second.mse;
}

double expr_mse(const ExprPtr& e, Samples samples) {
  double total = 0.0;
  for (const auto& [x, y] : samples) {
    const auto v = eval_expr(e, x);
    if (!v) return kInf;
    const double r = *v - y;
    total += r * r;
  }
  const double mse = total / double(samples.size());
  return std::isfinite(mse) ? mse : kInf;
}

namespace {

// Constants are drawn on a log scale: targets mix O(1) slopes with small
// exponential rates, and a rate drawn at N(0,1) scale overflows exp() on
// typical invariant ranges before refinement can rescue the candidate.
double random_constant(rng::Stream& stream) {
  return stream.normal() * std::pow(10.0, stream.uniform(-2.0, 0.5));
}

ExprPtr grow(rng::Stream& stream, const GpConfig& config, int depth_budget, bool inside_unary) {
  const bool unaries_ok = !config.unary_ops.empty() && !(config.nested_unary_ban && inside_unary);
  if (depth_budget <= 0 || stream.chance(0.25)) {
    return stream.chance(0.5) ? var() : constant(random_constant(stream));
  }
  const std::size_t n_bin = config.binary_ops.size();
  const std::size_t n_un = unaries_ok ? config.unary_ops.size() : 0;
  const std::size_t pick = stream.index(n_bin + n_un);
  if (pick < n_bin) {
    const Op op = config.binary_ops[pick];
    ExprPtr l = grow(stream, config, depth_budget - 1, inside_unary);
    ExprPtr r = grow(stream, config, depth_budget - 1, inside_unary);
    return op == Op::Add ? add(std::move(l), std::move(r)) : mul(std::move(l), std::move(r));
  }
  const Op op = config.unary_ops[pick - n_bin];
  ExprPtr c = grow(stream, config, depth_budget - 1, true);
  return op == Op::Exp ? exp_of(std::move(c)) : ln_of(std::move(c));
}

}  // namespace

ExprPtr random_tree(rng::Stream& stream, const GpConfig& config, int depth_budget) {
  for (int attempt = 0; attempt < 32; ++attempt) {
    ExprPtr t = grow(stream, config, depth_budget, false);
    if (respects_limits(t, config)) return t;
  }
  return stream.chance(0.5) ? var() : constant(random_constant(stream));
}

ExprPtr crossover(const ExprPtr& a, const ExprPtr& b, rng::Stream& stream, const GpConfig& config) {
  std::vector<ExprPtr> nodes_a, nodes_b;
  collect_nodes(a, nodes_a);
  collect_nodes(b, nodes_b);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const int ia = static_cast<int>(stream.index(nodes_a.size()));
    const std::size_t ib = stream.index(nodes_b.size());
    ExprPtr child = replace_node(a, ia, nodes_b[ib]);
    if (respects_limits(child, config)) return child;
  }
  return a;
}

ExprPtr mutate(const ExprPtr& e, rng::Stream& stream, const GpConfig& config) {
  std::vector<ExprPtr> nodes;
  collect_nodes(e, nodes);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const int kind = static_cast<int>(stream.index(3));
    ExprPtr child;
    if (kind == 0) {
      // point op-swap, arity preserving
      const int idx = static_cast<int>(stream.index(nodes.size()));
      const ExprPtr& target = nodes[static_cast<std::size_t>(idx)];
      if (target->op == Op::Add || target->op == Op::Mul) {
        child = replace_node(e, idx,
                             target->op == Op::Add ? mul(target->left, target->right)
                                                   : add(target->left, target->right));
      } else if ((target->op == Op::Exp || target->op == Op::Ln) && config.unary_ops.size() > 1) {
        child = replace_node(e, idx, target->op == Op::Exp ? ln_of(target->left) : exp_of(target->left));
      } else {
        continue;
      }
    } else if (kind == 1) {
      // subtree replacement
      const int idx = static_cast<int>(stream.index(nodes.size()));
      child = replace_node(e, idx, grow(stream, config, 3, false));
    } else {
      // constant jitter: multiplicative log-normal, sigma = 0.2
      std::vector<int> const_indices;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i]->op == Op::Const) const_indices.push_back(static_cast<int>(i));
      if (const_indices.empty()) continue;
      const int idx = const_indices[stream.index(const_indices.size())];
      const double jittered = nodes[static_cast<std::size_t>(idx)]->value * std::exp(stream.normal(0.0, 0.2));
      child = replace_node(e, idx, constant(jittered));
    }
    if (child && respects_limits(child, config)) return child;
  }
  return e;
}

ExprPtr fit_constants(const ExprPtr& e, Samples samples, rng::Stream& stream, int max_iters) {
  const int k = count_constants(e);
  if (k == 0 || samples.empty()) return e;

  std::vector<double> c = get_constants(e);
  double best_mse = expr_mse(e, samples);
  std::vector<double> best_c = c;

  auto mse_of = [&](const std::vector<double>& vals) {
    return expr_mse(with_constants(e, vals), samples);
  };

  if (!std::isfinite(mse_of(c))) {
    // Nothing to linearize against; leave the candidate untouched.
    return e;
  }

  for (int iter = 0; iter < max_iters; ++iter) {
    const ExprPtr current = with_constants(e, c);
    std::vector<ExprPtr> jac_exprs;
    jac_exprs.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) jac_exprs.push_back(diff_wrt_constant(current, j));

    // Assemble J^T J and J^T r over the valid samples.
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd jtr = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd row(k);
    std::size_t n_valid = 0;
    for (const auto& [x, y] : samples) {
      const auto f = eval_expr(current, x);
      if (!f) continue;
      bool ok = true;
      for (int j = 0; j < k; ++j) {
        const auto d = eval_expr(jac_exprs[static_cast<std::size_t>(j)], x);
        if (!d) { ok = false; break; }
        row(j) = *d;
      }
      if (!ok) continue;
      const double r = y - *f;
      jtj.noalias() += row * row.transpose();
      jtr.noalias() += row * r;
      ++n_valid;
    }
    if (n_valid < static_cast<std::size_t>(k)) break;

    Eigen::VectorXd delta = jtj.ldlt().solve(jtr);
    bool singular = !delta.allFinite();
    if (!singular && (jtj * delta - jtr).norm() > 1e-6 * (jtr.norm() + 1.0)) singular = true;

    bool improved = false;
    if (!singular) {
      // Backtracking line search along the Gauss-Newton direction.
      double step = 1.0;
      for (int half = 0; half < 8; ++half, step *= 0.5) {
        std::vector<double> trial = c;
        for (int j = 0; j < k; ++j) trial[static_cast<std::size_t>(j)] += step * delta(j);
        const double m = mse_of(trial);
        if (m < best_mse) {
          c = trial;
          best_mse = m;
          best_c = trial;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      // Random-restart hill climbing around the incumbent.
      for (int probe = 0; probe < 8; ++probe) {
        std::vector<double> trial = best_c;
        for (double& v : trial) v *= std::exp(stream.normal(0.0, 0.1));
        const double m = mse_of(trial);
        if (m < best_mse) {
          c = trial;
          best_mse = m;
          best_c = trial;
          improved = true;
        }
      }
      if (!improved) break;
    }
    if (best_mse < 1e-28) break;
  }
  return with_constants(e, best_c);
}

namespace {

struct Individual {
  ExprPtr expr;
  double mse = kInf;
};

}  // namespace

ParetoFront gp_search(Samples samples, const GpConfig& config) {
  validate_config(config);
  if (samples.size() < 10) throw std::invalid_argument("gp_search: need at least 10 samples");
  for (const auto& [x, y] : samples)
    if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("gp_search: non-finite sample");

  rng::Stream stream(config.seed);
  const auto t_start = std::chrono::steady_clock::now();
  const auto budget_exhausted = [&] {
    if (config.time_budget_sec <= 0.0) return false;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t_start;
    return elapsed.count() >= config.time_budget_sec;
  };

  std::vector<Individual> population;
  population.reserve(static_cast<std::size_t>(config.population));
  for (int attempt = 0; attempt < config.population * 20 &&
                        population.size() < static_cast<std::size_t>(config.population);
       ++attempt) {
    const int depth = 1 + static_cast<int>(stream.index(6));
    ExprPtr t = random_tree(stream, config, std::min(depth, config.max_depth));
    const double mse = expr_mse(t, samples);
    if (std::isfinite(mse)) population.push_back({std::move(t), mse});
  }
  if (population.empty()) throw SearchError("gp_search: no viable individual after initialization");

  ParetoFront front;

  auto tournament = [&]() -> const Individual& {
    std::size_t best = stream.index(population.size());
    for (int i = 1; i < config.tournament; ++i) {
      const std::size_t cand = stream.index(population.size());
      if (population[cand].mse < population[best].mse) best = cand;
    }
    return population[best];
  };

  auto refine_and_archive = [&](std::vector<Individual>& pop) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pop[a].mse < pop[b].mse; });
    const std::size_t n_refine = std::min<std::size_t>(order.size(), static_cast<std::size_t>(config.refine_top));
    for (std::size_t i = 0; i < n_refine; ++i) {
      Individual& ind = pop[order[i]];
      if (!std::isfinite(ind.mse) || count_constants(ind.expr) == 0) continue;
      ExprPtr refined = fit_constants(ind.expr, samples, stream, config.refine_iters);
      const double refined_mse = expr_mse(refined, samples);
      if (refined_mse <= ind.mse) {
        ind.expr = std::move(refined);
        ind.mse = refined_mse;
      }
    }
    for (const Individual& ind : pop) front.offer(ind.expr, ind.mse);
  };

  refine_and_archive(population);

  for (int gen = 1; gen < config.max_iterations && !budget_exhausted(); ++gen) {
    std::vector<Individual> next;
    next.reserve(population.size());
    // Elitism: keep the two best.
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return population[a].mse < population[b].mse;
    });
    for (std::size_t i = 0; i < std::min<std::size_t>(2, order.size()); ++i)
      next.push_back(population[order[i]]);

    while (next.size() < static_cast<std::size_t>(config.population)) {
      const double roll = stream.uniform();
      ExprPtr child;
      if (roll < config.p_crossover) {
        const Individual& p1 = tournament();
        const Individual& p2 = tournament();
        child = crossover(p1.expr, p2.expr, stream, config);
      } else if (roll < config.p_crossover + config.p_mutation) {
        child = mutate(tournament().expr, stream, config);
      } else {
        child = tournament().expr;
      }
      double mse = expr_mse(child, samples);
      // Light Lamarckian pass: one cheap constant polish per offspring so a
      // structurally right candidate is not culled over a bad constant draw.
      if (std::isfinite(mse) && count_constants(child) > 0) {
        ExprPtr polished = fit_constants(child, samples, stream, 2);
        const double polished_mse = expr_mse(polished, samples);
        if (polished_mse <= mse) {
          child = std::move(polished);
          mse = polished_mse;
        }
      }
      next.push_back({std::move(child), mse});
    }
    population = std::move(next);
    refine_and_archive(population);
  }

  if (front.empty()) throw SearchError("gp_search: search produced no finite-fitness candidate");
  return front;
}

std::vector<std::pair<double, double>> sample_shape_function(const pnam::PnamModel& model, int which, int n) {
  if (n < 2) throw std::invalid_argument("sample_shape_function: need n >= 2");
  const pnam::AffineScaler& sc = which == 1 ? model.scaler1 : model.scaler2;
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = sc.m + (sc.M - sc.m) * double(i) / double(n - 1);
    out.emplace_back(x, pnam::shape_value(model, which, x));
  }
  return out;
}

std::vector<std::pair<double, double>> sample_shape_slope(const pnam::PnamModel& model, int which, int n) {
  if (n < 2) throw std::invalid_argument("sample_shape_slope: need n >= 2");
  const pnam::AffineScaler& sc = which == 1 ? model.scaler1 : model.scaler2;
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = sc.m + (sc.M - sc.m) * double(i) / double(n - 1);
    out.emplace_back(x, pnam::shape_slope(model, which, x));
  }
  return out;
}

Selection select_model(const ParetoFront& front, Samples grad_samples, double tau) {
  if (front.empty()) throw std::invalid_argument("select_model: empty front");
  Selection sel;
  double best_mse = kInf, best_dmse = kInf;
  for (const auto& [c, entry] : front.entries()) {
    const double dmse = expr_mse(diff_expr(entry.expr), grad_samples);
    sel.table.push_back({c, entry.mse, dmse, false});
    best_mse = std::min(best_mse, entry.mse);
    best_dmse = std::min(best_dmse, dmse);
  }
  const bool deriv_binding = std::isfinite(best_dmse);
  int chosen_idx = -1;
  for (std::size_t i = 0; i < sel.table.size(); ++i) {
    const auto& row = sel.table[i];
    const bool value_ok = row.mse <= tau * best_mse;
    const bool deriv_ok = !deriv_binding || row.derivative_mse <= tau * best_dmse;
    if (value_ok && deriv_ok) {
      chosen_idx = static_cast<int>(i);
      break;
    }
  }
  if (chosen_idx < 0) {
    // Nothing satisfies both screens; fall back to the most accurate entry.
    for (std::size_t i = 0; i < sel.table.size(); ++i)
      if (sel.table[i].mse == best_mse) chosen_idx = static_cast<int>(i);
  }
  sel.table[static_cast<std::size_t>(chosen_idx)].chosen = true;
  sel.complexity = sel.table[static_cast<std::size_t>(chosen_idx)].complexity;
  sel.expr = front.entries().at(sel.complexity).expr;
  return sel;
}

}  // namespace hyperfit::symreg
