#pragma once

#include <filesystem>
#include <optional>

#include "hyperfit/analysis.hpp"
#include "hyperfit/bench.hpp"
#include "hyperfit/checkpoint.hpp"
#include "hyperfit/config.hpp"
#include "hyperfit/gp.hpp"
#include "hyperfit/report.hpp"
#include "hyperfit/training.hpp"

namespace hyperfit::pipeline {

/// One reproducible run: `fit -> distill -> analyze -> report` is a pure
/// function of this object (when the wall-clock budget is disabled).
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;

  training::TrainConfig train;
  bool train_baseline = true;

  symreg::GpConfig gp1;  // psi1 search; defaults follow the Treloar setup
  symreg::GpConfig gp2;  // psi2 search

  double analysis_lo = 2.0;
  double analysis_hi = 100.0;
  int analysis_grid = 2000;
  double select_tau = 1.5;
  int shape_samples = 500;

  bool emit_svg = true;
  bool time_budget = true;  // false forces deterministic searches
};

RunConfig default_run_config();

/// Parses the sectioned key=value file; unknown keys are an error.
RunConfig load_run_config(const std::filesystem::path& path);

/// Stage-specific seeds derived from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage);

struct FitArtifacts {
  io::Checkpoint checkpoint;
  std::optional<training::BaselineTrainResult> baseline;
};

struct DistillArtifacts {
  symreg::Selection sel1;
  symreg::Selection sel2;
};

/// Step 1. Writes <out>/checkpoint.json (and <out>/baseline.json when the
/// baseline is trained).
FitArtifacts run_fit(const RunConfig& config);

/// Step 2: samples both shape functions and runs the two searches
/// concurrently. Writes <out>/symbolic.json.
DistillArtifacts run_distill(const RunConfig& config, const io::Checkpoint& checkpoint);

analysis::AnalysisVerdict run_analyze(const RunConfig& config, const DistillArtifacts& distill);

void run_report(const RunConfig& config, const FitArtifacts& fit, const DistillArtifacts* distill,
                const analysis::AnalysisVerdict* verdict);

struct PipelineArtifacts {
  FitArtifacts fit;
  DistillArtifacts distill;
  analysis::AnalysisVerdict verdict;
};

PipelineArtifacts run_all(const RunConfig& config);

// Artifact persistence used by the stage-at-a-time CLI flow.
void save_distill(const std::filesystem::path& path, const DistillArtifacts& distill);
DistillArtifacts load_distill(const std::filesystem::path& path);
void save_baseline(const std::filesystem::path& path, const training::BaselineTrainResult& baseline);
std::optional<training::BaselineTrainResult> load_baseline(const std::filesystem::path& path);
std::string render_verdict(const analysis::AnalysisVerdict& verdict);

}  // namespace hyperfit::pipeline
