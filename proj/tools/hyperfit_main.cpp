#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "hyperfit/bench.hpp"
#include "hyperfit/dataset.hpp"
#include "hyperfit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hyperfit;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string dataset;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool no_time_budget = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file (sectioned key=value)");
  cmd->add_option("--dataset", opts.dataset, "stress dataset CSV (mode,lambda,p1,p3)");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "master seed");
  cmd->add_flag("--no-time-budget", opts.no_time_budget,
                "disable the SR wall-clock budget (deterministic runs)");
}

pipeline::RunConfig resolve_config(const CommonOpts& opts, bool need_dataset = true) {
  pipeline::RunConfig cfg = opts.config_path.empty() ? pipeline::default_run_config()
                                                     : pipeline::load_run_config(opts.config_path);
  if (!opts.dataset.empty()) cfg.dataset = opts.dataset;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.no_time_budget) cfg.time_budget = false;
  if (need_dataset && cfg.dataset.empty())
    throw io::ConfigError("no dataset given (use --dataset or the config file)");
  return cfg;
}

std::optional<analysis::AnalysisVerdict> maybe_analyze(const pipeline::RunConfig& cfg,
                                                       const pipeline::DistillArtifacts& distill) {
  return pipeline::run_analyze(cfg, distill);
}

std::vector<double> parse_range(const std::string& text) {
  double lo = 1.0, hi = 2.0;
  int n = 20;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 2 || !(hi > lo) || !(lo > 0))
    throw io::ConfigError("bad --lambda-range, expected lo:hi:count with 0 < lo < hi, count >= 2");
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * double(i) / double(n - 1);
  return grid;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"hyperfit: discovers interpretable polyconvex hyperelastic energies from stress data"};
  app.require_subcommand(1);

  CommonOpts fit_opts, distill_opts, analyze_opts, predict_opts, report_opts, bench_opts;

  CLI::App* fit = app.add_subcommand("fit", "step 1: train the polyconvex neural additive model");
  add_common(fit, fit_opts);

  CLI::App* distill = app.add_subcommand("distill", "step 2: symbolic regression of the shape functions");
  add_common(distill, distill_opts);

  CLI::App* analyze = app.add_subcommand("analyze", "convexity/coercivity analysis of the symbolic pair");
  add_common(analyze, analyze_opts);

  CLI::App* predict = app.add_subcommand("predict", "evaluate stresses over a stretch range");
  add_common(predict, predict_opts);
  std::string mode_name = "UE";
  std::string lambda_range = "1:8:50";
  predict->add_option("--mode", mode_name, "loading mode: UE, EBE or PS");
  predict->add_option("--lambda-range", lambda_range, "stretch grid as lo:hi:count");

  CLI::App* report = app.add_subcommand("report", "render report.md, plot data, and SVG plots");
  add_common(report, report_opts);

  CLI::App* bench = app.add_subcommand("bench", "network vs symbolic inference timing table");
  add_common(bench, bench_opts);
  std::string points = "100,1000,10000,100000";
  int replicates = 20;
  bench->add_option("--points", points, "comma list of query counts");
  bench->add_option("--replicates", replicates, "replicates per cell");

  app.parse(argc, argv);

  if (fit->parsed()) {
    const auto cfg = resolve_config(fit_opts);
    const auto artifacts = pipeline::run_fit(cfg);
    std::printf("fit: %d epochs, best validation epoch %d, checkpoint at %s\n", cfg.train.epochs,
                artifacts.checkpoint.best_epoch, (cfg.out_dir / "checkpoint.json").string().c_str());
    return 0;
  }
  if (distill->parsed()) {
    const auto cfg = resolve_config(distill_opts, /*need_dataset=*/false);
    const auto checkpoint = io::load_checkpoint(cfg.out_dir / "checkpoint.json");
    const auto distilled = pipeline::run_distill(cfg, checkpoint);
    std::printf("distill: psi1 complexity %d, psi2 complexity %d\n", distilled.sel1.complexity,
                distilled.sel2.complexity);
    std::printf("  psi1(I1) = %s\n", symreg::print_display(distilled.sel1.expr, "I1").c_str());
    std::printf("  psi2(I2) = %s\n", symreg::print_display(distilled.sel2.expr, "I2").c_str());
    return 0;
  }
  if (analyze->parsed()) {
    const auto cfg = resolve_config(analyze_opts, /*need_dataset=*/false);
    const auto distilled = pipeline::load_distill(cfg.out_dir / "symbolic.json");
    const auto verdict = pipeline::run_analyze(cfg, distilled);
    const std::string text = pipeline::render_verdict(verdict);
    std::fputs(text.c_str(), stdout);
    std::ofstream out(cfg.out_dir / "analysis.txt");
    out << text;
    return 0;
  }
  if (predict->parsed()) {
    const auto cfg = resolve_config(predict_opts, /*need_dataset=*/false);
    const auto mode = kinematics::parse_mode(mode_name);
    if (!mode) throw io::ConfigError("unknown mode " + mode_name);
    const auto checkpoint = io::load_checkpoint(cfg.out_dir / "checkpoint.json");
    std::optional<pipeline::DistillArtifacts> distilled;
    if (fs::exists(cfg.out_dir / "symbolic.json"))
      distilled = pipeline::load_distill(cfg.out_dir / "symbolic.json");
    const auto model_fn = [&](double i1, double i2) {
      return pnam::pnam_grads(checkpoint.model, {i1, i2, 1.0});
    };
    std::optional<training::EnergyModel> symbolic;
    if (distilled) symbolic = training::from_expressions(distilled->sel1.expr, distilled->sel2.expr);
    std::printf("lambda\tmodel_p1%s%s\n", *mode == kinematics::LoadingMode::PS ? "\tmodel_p3" : "",
                symbolic ? "\tsymbolic_p1" : "");
    for (double lambda : parse_range(lambda_range)) {
      const auto s = kinematics::reduced_stress(model_fn, *mode, lambda);
      std::printf("%.10g\t%.10g", lambda, s.p1);
      if (s.p3) std::printf("\t%.10g", *s.p3);
      if (symbolic)
        std::printf("\t%.10g", kinematics::reduced_stress(symbolic->grads_at, *mode, lambda).p1);
      std::printf("\n");
    }
    return 0;
  }
  if (report->parsed()) {
    const auto cfg = resolve_config(report_opts);
    pipeline::FitArtifacts fit_artifacts;
    fit_artifacts.checkpoint = io::load_checkpoint(cfg.out_dir / "checkpoint.json");
    fit_artifacts.baseline = pipeline::load_baseline(cfg.out_dir / "baseline.json");
    std::optional<pipeline::DistillArtifacts> distilled;
    std::optional<analysis::AnalysisVerdict> verdict;
    if (fs::exists(cfg.out_dir / "symbolic.json")) {
      distilled = pipeline::load_distill(cfg.out_dir / "symbolic.json");
      verdict = maybe_analyze(cfg, *distilled);
    }
    pipeline::run_report(cfg, fit_artifacts, distilled ? &*distilled : nullptr,
                         verdict ? &*verdict : nullptr);
    std::printf("report: %s\n", (cfg.out_dir / "report.md").string().c_str());
    return 0;
  }
  if (bench->parsed()) {
    const auto cfg = resolve_config(bench_opts, /*need_dataset=*/false);
    const auto checkpoint = io::load_checkpoint(cfg.out_dir / "checkpoint.json");
    const auto distilled = pipeline::load_distill(cfg.out_dir / "symbolic.json");
    std::vector<std::size_t> ns;
    std::stringstream ss(points);
    std::string tok;
    while (std::getline(ss, tok, ',')) ns.push_back(static_cast<std::size_t>(std::stoull(tok)));
    const auto table = bench::benchmark_inference(checkpoint.model, distilled.sel1.expr,
                                                  distilled.sel2.expr, ns, replicates, cfg.seed);
    const std::string text = bench::format_table(table);
    std::fputs(text.c_str(), stdout);
    bench::write_table(cfg.out_dir / "bench.tsv", table);
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const CLI::ParseError& e) {
    return CLI::App{}.exit(e) == 0 ? 0 : 1;
  } catch (const io::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const io::DatasetError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const io::CheckpointError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const io::ReportError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
}
