#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hyperfit/expr.hpp"
#include "hyperfit/pnam.hpp"

namespace hyperfit::bench {

struct Series {
  double mean_sec = 0.0;
  double sd_sec = 0.0;
};

struct Row {
  std::size_t n_points = 0;
  Series net_value;
  Series net_gradient;
  Series symbolic_value;
  Series symbolic_gradient;
};

struct Table {
  std::vector<Row> rows;
  int replicates = 0;
  /// Whether symbolic evaluation was faster than the network at the largest
  /// query count; the expected trend, reported but never asserted.
  bool symbolic_value_faster_at_largest = false;
  bool symbolic_gradient_faster_at_largest = false;
};

/// Wall-time comparison of energy and gradient evaluation between the
/// trained network pair and a symbolic expression pair, over a grid of
/// query counts. Each cell is the mean/sd over `replicates` runs with
/// distinct seeds (fresh random query points inside the training range).
Table benchmark_inference(const pnam::PnamModel& model, const symreg::ExprPtr& psi1,
                          const symreg::ExprPtr& psi2, std::span<const std::size_t> n_points,
                          int replicates = 20, std::uint64_t seed = 0);

void write_table(const std::filesystem::path& path, const Table& table);
std::string format_table(const Table& table);

}  // namespace hyperfit::bench
