#include "hyperfit/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hyperfit/rng.hpp"

namespace hyperfit::bench {

namespace {

volatile double g_sink = 0.0;  // defeats dead-code elimination of the timed loops

template <typename Fn>
double time_once(const Fn& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  return dt.count();
}

Series summarize(std::span<const double> times) {
  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= double(times.size());
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  var /= double(times.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

Table benchmark_inference(const pnam::PnamModel& model, const symreg::ExprPtr& psi1,
                          const symreg::ExprPtr& psi2, std::span<const std::size_t> n_points,
                          int replicates, std::uint64_t seed) {
  if (replicates < 1) throw std::invalid_argument("benchmark_inference: replicates must be >= 1");
  const symreg::ExprPtr dpsi1 = symreg::diff_expr(psi1);
  const symreg::ExprPtr dpsi2 = symreg::diff_expr(psi2);

  Table table;
  table.replicates = replicates;
  for (std::size_t n : n_points) {
    std::vector<double> t_net_v, t_net_g, t_sym_v, t_sym_g;
    for (int rep = 0; rep < replicates; ++rep) {
      rng::Stream stream(seed + 0x1000ull * (rep + 1) + n);
      std::vector<double> q1(n), q2(n);
      for (std::size_t i = 0; i < n; ++i) {
        q1[i] = stream.uniform(model.scaler1.m, model.scaler1.M);
        q2[i] = stream.uniform(model.scaler2.m, model.scaler2.M);
      }
      t_net_v.push_back(time_once([&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          acc += pnam::shape_value(model, 1, q1[i]) + pnam::shape_value(model, 2, q2[i]);
        g_sink = acc;
      }));
      t_net_g.push_back(time_once([&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          acc += pnam::shape_slope(model, 1, q1[i]) + pnam::shape_slope(model, 2, q2[i]);
        g_sink = acc;
      }));
      t_sym_v.push_back(time_once([&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          acc += symreg::eval_expr(psi1, q1[i]).value_or(0.0);
          acc += symreg::eval_expr(psi2, q2[i]).value_or(0.0);
        }
        g_sink = acc;
      }));
      t_sym_g.push_back(time_once([&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          acc += symreg::eval_expr(dpsi1, q1[i]).value_or(0.0);
          acc += symreg::eval_expr(dpsi2, q2[i]).value_or(0.0);
        }
        g_sink = acc;
      }));
    }
    Row row;
    row.n_points = n;
    row.net_value = summarize(t_net_v);
    row.net_gradient = summarize(t_net_g);
    row.symbolic_value = summarize(t_sym_v);
    row.symbolic_gradient = summarize(t_sym_g);
    table.rows.push_back(row);
  }
  if (!table.rows.empty()) {
    const Row& last = table.rows.back();
    table.symbolic_value_faster_at_largest = last.symbolic_value.mean_sec <= last.net_value.mean_sec;
    table.symbolic_gradient_faster_at_largest =
        last.symbolic_gradient.mean_sec <= last.net_gradient.mean_sec;
  }
  return table;
}

std::string format_table(const Table& table) {
  std::ostringstream out;
  out << "n\tnet_value_mean\tnet_value_sd\tnet_grad_mean\tnet_grad_sd"
         "\tsym_value_mean\tsym_value_sd\tsym_grad_mean\tsym_grad_sd\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.6e\t%.6e\t%.6e\t%.6e\t%.6e\t%.6e\t%.6e\t%.6e\n", r.n_points,
                  r.net_value.mean_sec, r.net_value.sd_sec, r.net_gradient.mean_sec, r.net_gradient.sd_sec,
                  r.symbolic_value.mean_sec, r.symbolic_value.sd_sec, r.symbolic_gradient.mean_sec,
                  r.symbolic_gradient.sd_sec);
    out << buf;
  }
  out << "# replicates per cell: " << table.replicates << "\n";
  out << "# symbolic value evaluation faster at largest n: "
      << (table.symbolic_value_faster_at_largest ? "yes" : "no (trend reversed on this host)") << "\n";
  out << "# symbolic gradient evaluation faster at largest n: "
      << (table.symbolic_gradient_faster_at_largest ? "yes" : "no (trend reversed on this host)") << "\n";
  return out.str();
}

void write_table(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("bench: cannot write " + path.string());
  out << format_table(table);
}

}  // namespace hyperfit::bench
