#include "hyperfit/pipeline.hpp"

#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "hyperfit/dataset.hpp"

namespace hyperfit::pipeline {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage) {
  // splitmix64 of (master, stage)
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stage + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.gp1.unary_ops = {symreg::Op::Exp};
  cfg.gp1.max_size = 30;
  cfg.gp1.max_depth = 30;
  cfg.gp2.unary_ops = {};
  cfg.gp2.max_size = 10;
  cfg.gp2.max_depth = 10;
  return cfg;
}

namespace {

std::vector<symreg::Op> parse_unary_list(const std::string& text, const std::string& where) {
  std::vector<symreg::Op> ops;
  if (text == "none" || text.empty()) return ops;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "exp") ops.push_back(symreg::Op::Exp);
    else if (tok == "ln") ops.push_back(symreg::Op::Ln);
    else throw io::ConfigError("config: " + where + " unary operator must be exp/ln/none, got `" + tok + "`");
  }
  return ops;
}

void load_gp_section(io::Config& cfg, const std::string& section, symreg::GpConfig& gp) {
  std::string unary_default;
  for (std::size_t i = 0; i < gp.unary_ops.size(); ++i)
    unary_default += std::string(i ? "," : "") + (gp.unary_ops[i] == symreg::Op::Exp ? "exp" : "ln");
  if (unary_default.empty()) unary_default = "none";
  gp.unary_ops = parse_unary_list(cfg.get_string(section, "unary", unary_default), section);
  gp.max_size = static_cast<int>(cfg.get_int(section, "max_size", gp.max_size));
  gp.max_depth = static_cast<int>(cfg.get_int(section, "max_depth", gp.max_depth));
  gp.population = static_cast<int>(cfg.get_int(section, "population", gp.population));
  gp.tournament = static_cast<int>(cfg.get_int(section, "tournament", gp.tournament));
  gp.p_crossover = cfg.get_double(section, "p_crossover", gp.p_crossover);
  gp.p_mutation = cfg.get_double(section, "p_mutation", gp.p_mutation);
  gp.max_iterations = static_cast<int>(cfg.get_int(section, "max_iterations", gp.max_iterations));
  gp.time_budget_sec = cfg.get_double(section, "time_budget_sec", gp.time_budget_sec);
  gp.nested_unary_ban = cfg.get_bool(section, "nested_unary_ban", gp.nested_unary_ban);
  gp.refine_top = static_cast<int>(cfg.get_int(section, "refine_top", gp.refine_top));
  gp.refine_iters = static_cast<int>(cfg.get_int(section, "refine_iters", gp.refine_iters));
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  io::Config file = io::Config::parse_file(path);
  RunConfig cfg = default_run_config();
  cfg.dataset = file.get_string("run", "dataset", cfg.dataset.string());
  cfg.out_dir = file.get_string("run", "out", cfg.out_dir.string());
  cfg.seed = static_cast<std::uint64_t>(file.get_int("run", "seed", static_cast<long>(cfg.seed)));
  cfg.emit_svg = file.get_bool("run", "emit_svg", cfg.emit_svg);
  cfg.time_budget = file.get_bool("run", "time_budget", cfg.time_budget);

  cfg.train.learning_rate = file.get_double("train", "learning_rate", cfg.train.learning_rate);
  cfg.train.epochs = static_cast<int>(file.get_int("train", "epochs", cfg.train.epochs));
  cfg.train.split_fraction = file.get_double("train", "split_fraction", cfg.train.split_fraction);
  cfg.train.stress_scale = file.get_double("train", "stress_scale", cfg.train.stress_scale);
  cfg.train.hidden = static_cast<int>(file.get_int("train", "hidden", cfg.train.hidden));
  cfg.train_baseline = file.get_bool("train", "baseline", cfg.train_baseline);

  load_gp_section(file, "gp1", cfg.gp1);
  load_gp_section(file, "gp2", cfg.gp2);

  cfg.analysis_lo = file.get_double("analysis", "lo", cfg.analysis_lo);
  cfg.analysis_hi = file.get_double("analysis", "hi", cfg.analysis_hi);
  cfg.analysis_grid = static_cast<int>(file.get_int("analysis", "grid", cfg.analysis_grid));
  cfg.select_tau = file.get_double("analysis", "tau", cfg.select_tau);
  cfg.shape_samples = static_cast<int>(file.get_int("analysis", "shape_samples", cfg.shape_samples));

  file.ensure_fully_consumed();
  return cfg;
}

FitArtifacts run_fit(const RunConfig& config) {
  const auto data = io::load_dataset(config.dataset);
  training::TrainConfig tc = config.train;
  tc.seed = derive_seed(config.seed, 0);

  const training::SplitData split = training::split_dataset(data, tc.split_fraction);
  std::vector<kinematics::Invariants> train_inv;
  for (const auto& s : split.train) train_inv.push_back(kinematics::mode_invariants(s.mode, s.lambda));

  pnam::PnamModel init = pnam::make_model(tc.seed, tc.hidden, train_inv, tc.stress_scale);
  training::TrainResult result = training::train(std::move(init), data, tc);

  FitArtifacts artifacts;
  artifacts.checkpoint.version = io::kCheckpointVersion;
  artifacts.checkpoint.model = result.model;
  artifacts.checkpoint.config = tc;
  artifacts.checkpoint.history = result.history;
  artifacts.checkpoint.best_epoch = result.best_epoch;

  if (config.train_baseline) {
    training::TrainConfig bc = tc;
    bc.seed = derive_seed(config.seed, 3);
    pnam::BaselineMlp mlp = pnam::baseline_init(bc.seed, bc.hidden, result.model.scaler1,
                                                result.model.scaler2, bc.stress_scale);
    artifacts.baseline = training::train_baseline(std::move(mlp), data, bc);
  }

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  io::save_checkpoint(config.out_dir / "checkpoint.json", artifacts.checkpoint);
  if (artifacts.baseline) save_baseline(config.out_dir / "baseline.json", *artifacts.baseline);
  return artifacts;
}

DistillArtifacts run_distill(const RunConfig& config, const io::Checkpoint& checkpoint) {
  const auto samples1 = symreg::sample_shape_function(checkpoint.model, 1, config.shape_samples);
  const auto samples2 = symreg::sample_shape_function(checkpoint.model, 2, config.shape_samples);
  const auto slopes1 = symreg::sample_shape_slope(checkpoint.model, 1, config.shape_samples);
  const auto slopes2 = symreg::sample_shape_slope(checkpoint.model, 2, config.shape_samples);

  symreg::GpConfig gp1 = config.gp1;
  symreg::GpConfig gp2 = config.gp2;
  gp1.seed = derive_seed(config.seed, 1);
  gp2.seed = derive_seed(config.seed, 2);
  if (!config.time_budget) {
    gp1.time_budget_sec = 0.0;
    gp2.time_budget_sec = 0.0;
  }

  // The two univariate searches are independent; run them side by side.
  auto future1 = std::async(std::launch::async, [&] { return symreg::gp_search(samples1, gp1); });
  auto future2 = std::async(std::launch::async, [&] { return symreg::gp_search(samples2, gp2); });
  const symreg::ParetoFront front1 = future1.get();
  const symreg::ParetoFront front2 = future2.get();

  DistillArtifacts distill;
  distill.sel1 = symreg::select_model(front1, slopes1, config.select_tau);
  distill.sel2 = symreg::select_model(front2, slopes2, config.select_tau);

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  save_distill(config.out_dir / "symbolic.json", distill);
  return distill;
}

analysis::AnalysisVerdict run_analyze(const RunConfig& config, const DistillArtifacts& distill) {
  return analysis::analyze_pair(distill.sel1.expr, distill.sel2.expr, config.analysis_lo,
                                config.analysis_hi, config.analysis_grid);
}

void run_report(const RunConfig& config, const FitArtifacts& fit, const DistillArtifacts* distill,
                const analysis::AnalysisVerdict* verdict) {
  const auto data = io::load_dataset(config.dataset);
  io::ReportInputs inputs;
  inputs.checkpoint = &fit.checkpoint;
  inputs.data = data;
  inputs.baseline = fit.baseline ? &*fit.baseline : nullptr;
  inputs.sel1 = distill ? &distill->sel1 : nullptr;
  inputs.sel2 = distill ? &distill->sel2 : nullptr;
  inputs.verdict = verdict;
  inputs.seed = config.seed;
  inputs.emit_svg = config.emit_svg;
  inputs.shape_samples = config.shape_samples;
  io::emit_report(config.out_dir, inputs);
}

PipelineArtifacts run_all(const RunConfig& config) {
  PipelineArtifacts artifacts;
  artifacts.fit = run_fit(config);
  artifacts.distill = run_distill(config, artifacts.fit.checkpoint);
  artifacts.verdict = run_analyze(config, artifacts.distill);
  {
    std::ofstream out(config.out_dir / "analysis.txt");
    out << render_verdict(artifacts.verdict);
  }
  run_report(config, artifacts.fit, &artifacts.distill, &artifacts.verdict);
  return artifacts;
}

namespace {

json selection_to_json(const symreg::Selection& sel) {
  json table = json::array();
  for (const auto& row : sel.table)
    table.push_back(json{{"complexity", row.complexity},
                         {"mse", row.mse},
                         {"derivative_mse", row.derivative_mse},
                         {"chosen", row.chosen}});
  return json{{"canonical", symreg::print_canonical(sel.expr)},
              {"complexity", sel.complexity},
              {"table", std::move(table)}};
}

symreg::Selection selection_from_json(const json& j) {
  symreg::Selection sel;
  sel.expr = symreg::parse_expression(j.at("canonical").get<std::string>());
  sel.complexity = j.at("complexity").get<int>();
  for (const json& row : j.at("table"))
    sel.table.push_back({row.at("complexity").get<int>(), row.at("mse").get<double>(),
                         row.at("derivative_mse").get<double>(), row.at("chosen").get<bool>()});
  return sel;
}

}  // namespace

void save_distill(const std::filesystem::path& path, const DistillArtifacts& distill) {
  json j;
  j["psi1"] = selection_to_json(distill.sel1);
  j["psi2"] = selection_to_json(distill.sel2);
  std::ofstream out(path);
  if (!out) throw io::ReportError("distill: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

DistillArtifacts load_distill(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io::ReportError("distill: cannot open " + path.string() + " (run `distill` first)");
  json j;
  in >> j;
  DistillArtifacts distill;
  distill.sel1 = selection_from_json(j.at("psi1"));
  distill.sel2 = selection_from_json(j.at("psi2"));
  return distill;
}

void save_baseline(const std::filesystem::path& path, const training::BaselineTrainResult& baseline) {
  json j;
  j["mlp"] = {{"w_in", baseline.mlp.w_in},   {"b_in", baseline.mlp.b_in},
              {"w_out", baseline.mlp.w_out}, {"b_out", baseline.mlp.b_out},
              {"scaler1", {{"m", baseline.mlp.scaler1.m}, {"M", baseline.mlp.scaler1.M}}},
              {"scaler2", {{"m", baseline.mlp.scaler2.m}, {"M", baseline.mlp.scaler2.M}}},
              {"stress_scale", baseline.mlp.stress_scale}};
  json hist = json::array();
  for (const auto& h : baseline.history) hist.push_back(json{{"train", h.train}, {"validation", h.validation}});
  j["history"] = std::move(hist);
  j["best_epoch"] = baseline.best_epoch;
  std::ofstream out(path);
  if (!out) throw io::ReportError("baseline: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::optional<training::BaselineTrainResult> load_baseline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j;
  in >> j;
  training::BaselineTrainResult baseline;
  const json& m = j.at("mlp");
  baseline.mlp.w_in = m.at("w_in").get<std::vector<double>>();
  baseline.mlp.b_in = m.at("b_in").get<std::vector<double>>();
  baseline.mlp.w_out = m.at("w_out").get<std::vector<double>>();
  baseline.mlp.b_out = m.at("b_out").get<double>();
  baseline.mlp.scaler1 = {m.at("scaler1").at("m").get<double>(), m.at("scaler1").at("M").get<double>()};
  baseline.mlp.scaler2 = {m.at("scaler2").at("m").get<double>(), m.at("scaler2").at("M").get<double>()};
  baseline.mlp.stress_scale = m.at("stress_scale").get<double>();
  for (const json& h : j.at("history"))
    baseline.history.push_back({h.at("train").get<double>(), h.at("validation").get<double>()});
  baseline.best_epoch = j.at("best_epoch").get<int>();
  return baseline;
}

std::string render_verdict(const analysis::AnalysisVerdict& v) {
  std::ostringstream out;
  auto shape = [&](const char* name, const analysis::ShapeVerdict& sv) {
    out << name << ":\n";
    if (sv.interval.domain_violation_at) {
      out << "  domain violation at x = " << *sv.interval.domain_violation_at << "\n";
    } else {
      out << "  convex on interval:         " << (sv.interval.convex ? "yes" : "NO") << "\n";
      out << "  non-decreasing on interval: " << (sv.interval.nondecreasing ? "yes" : "NO") << "\n";
    }
    out << "  dominant term:              " << sv.asymptotic.function_dominant.describe() << "\n";
    out << "  non-decreasing at infinity: " << (sv.asymptotic.nondecreasing ? "yes" : "VIOLATED") << " ("
        << sv.asymptotic.note << ")\n";
  };
  shape("psi1", v.psi1);
  shape("psi2", v.psi2);
  out << "coercivity: " << analysis::to_string(v.coercivity.status) << " (" << v.coercivity.rationale
      << ")\n";
  out << "stress-free reference state: " << (v.stress_free.stress_free ? "yes" : "NO")
      << " (residual " << v.stress_free.residual << ", alpha0 " << v.stress_free.alpha0 << ")\n";
  return out.str();
}

}  // namespace hyperfit::pipeline
