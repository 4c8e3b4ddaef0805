#pragma once

#include <filesystem>
#include <optional>

#include "hyperfit/analysis.hpp"
#include "hyperfit/checkpoint.hpp"
#include "hyperfit/gp.hpp"
#include "hyperfit/training.hpp"

namespace hyperfit::io {

struct ReportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything the report can render. Later-stage inputs are optional so a
/// report can be produced right after fitting.
struct ReportInputs {
  const Checkpoint* checkpoint = nullptr;                     // required
  std::span<const training::StressSample> data;               // required
  const training::BaselineTrainResult* baseline = nullptr;    // optional
  const symreg::Selection* sel1 = nullptr;                    // optional (after distill)
  const symreg::Selection* sel2 = nullptr;
  const analysis::AnalysisVerdict* verdict = nullptr;         // optional (after analyze)
  std::uint64_t seed = 0;
  bool emit_svg = true;
  int shape_samples = 500;
};

/// Writes report.md, columnar plot data under plotdata/, and (optionally)
/// static SVG line plots under plots/. All output is a pure function of the
/// inputs; identical inputs produce byte-identical files.
void emit_report(const std::filesystem::path& out_dir, const ReportInputs& in);

/// Per-mode R² of p1 predictions over the full dataset, for any gradient
/// source. Returns mode name / score pairs in UE, EBE, PS order (modes
/// absent from the data are skipped).
std::vector<std::pair<std::string, double>> per_mode_r2(const kinematics::GradsFn& grads,
                                                        std::span<const training::StressSample> data);

}  // namespace hyperfit::io
