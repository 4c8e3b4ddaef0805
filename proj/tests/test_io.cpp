#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hyperfit/checkpoint.hpp"
#include "hyperfit/config.hpp"
#include "hyperfit/dataset.hpp"
#include "hyperfit/pipeline.hpp"
#include "hyperfit/report.hpp"
#include "testutil.hpp"

using namespace hyperfit;
using kinematics::LoadingMode;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hyperfit_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("dataset rows parse, with line numbers on errors") {
  TempDir tmp;
  const fs::path csv = tmp.path / "d.csv";
  std::ofstream(csv) << "# comment\nmode,lambda,p1,p3\nUE,1.0,0.0,\nPS,2.0,1.1,0.4\n";
  const auto samples = io::load_dataset(csv);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].mode == LoadingMode::UE);
  CHECK(samples[0].lambda == 1.0);
  CHECK(samples[0].p1 == 0.0);
  CHECK(!samples[0].p3.has_value());
  CHECK(samples[1].mode == LoadingMode::PS);
  REQUIRE(samples[1].p3.has_value());
  CHECK(*samples[1].p3 == 0.4);

  std::ofstream(csv) << "mode,lambda,p1,p3\nXX,1.0,0.0,\n";
  try {
    io::load_dataset(csv);
    FAIL("expected DatasetError");
  } catch (const io::DatasetError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::ofstream(csv) << "mode,lambda,p1,p3\nUE,oops,0.0,\n";
  CHECK_THROWS_AS(io::load_dataset(csv), io::DatasetError);
  std::ofstream(csv) << "mode,lambda,p1,p3\nUE,-1.0,0.0,\n";
  CHECK_THROWS_AS(io::load_dataset(csv), io::DatasetError);
  CHECK_THROWS_AS(io::load_dataset(tmp.path / "missing.csv"), io::DatasetError);
}

TEST_CASE("bundled Treloar fixture matches the counts frozen in its header") {
  const fs::path fixture = fs::path(HYPERFIT_DATA_DIR) / "treloar.csv";
  const auto samples = io::load_dataset(fixture);

  // parse "# counts: UE=25 EBE=17 PS=14" from the header block
  std::ifstream in(fixture);
  std::string line, counts_line;
  while (std::getline(in, line))
    if (line.rfind("# counts:", 0) == 0) counts_line = line;
  REQUIRE(!counts_line.empty());
  int expect_ue = 0, expect_ebe = 0, expect_ps = 0;
  REQUIRE(std::sscanf(counts_line.c_str(), "# counts: UE=%d EBE=%d PS=%d", &expect_ue, &expect_ebe,
                      &expect_ps) == 3);
  int ue = 0, ebe = 0, ps = 0;
  for (const auto& s : samples) {
    if (s.mode == LoadingMode::UE) ++ue;
    if (s.mode == LoadingMode::EBE) ++ebe;
    if (s.mode == LoadingMode::PS) ++ps;
  }
  CHECK(ue == expect_ue);
  CHECK(ebe == expect_ebe);
  CHECK(ps == expect_ps);
  // every mode anchored at the unstressed state
  for (const auto& s : samples)
    if (s.lambda == 1.0) CHECK(s.p1 == 0.0);
}

TEST_CASE("dataset save/load round-trip") {
  TempDir tmp;
  std::vector<training::StressSample> samples = {{LoadingMode::UE, 1.5, 0.71, {}},
                                                 {LoadingMode::PS, 2.25, 1.125, 0.375}};
  io::save_dataset(tmp.path / "s.csv", samples, "synthetic check");
  const auto loaded = io::load_dataset(tmp.path / "s.csv");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].lambda == 1.5);
  CHECK(loaded[1].p3.has_value());
  CHECK(*loaded[1].p3 == 0.375);
}

TEST_CASE("checkpoint round-trips byte-identically and bit-exactly") {
  TempDir tmp;
  rng::Stream stream(77);
  io::Checkpoint cp;
  cp.model.net1 = testutil::random_icnn(stream, 7);
  cp.model.net2 = testutil::random_icnn(stream, 7);
  cp.model.scaler1 = {3.0, 11.27};
  cp.model.scaler2 = {3.0, 8.93};
  cp.model.stress_scale = 0.05;
  cp.config.seed = 123;
  cp.config.epochs = 321;
  cp.history = {{1.5, 2.5}, {0.7, 1.1}};
  cp.best_epoch = 2;

  const fs::path a = tmp.path / "a.json";
  const fs::path b = tmp.path / "b.json";
  io::save_checkpoint(a, cp);
  const io::Checkpoint loaded = io::load_checkpoint(a);
  io::save_checkpoint(b, loaded);
  CHECK(slurp(a) == slurp(b));

  // predictions from the loaded model equal pre-save predictions to the bit
  const kinematics::Invariants probe{5.1234567891234, 4.9876543210987, 1.0};
  const auto g0 = pnam::pnam_grads(cp.model, probe);
  const auto g1 = pnam::pnam_grads(loaded.model, probe);
  CHECK(g0.d1 == g1.d1);
  CHECK(g0.d2 == g1.d2);
  CHECK(loaded.history.size() == 2);
  CHECK(loaded.history[1].validation == 1.1);

  // version bump refuses loudly
  std::string text = slurp(a);
  const auto pos = text.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, std::string("\"format_version\": 1").size(), "\"format_version\": 2");
  std::ofstream(a, std::ios::binary) << text;
  try {
    io::load_checkpoint(a);
    FAIL("expected CheckpointError");
  } catch (const io::CheckpointError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  // corrupt file is a structured error
  std::ofstream(a, std::ios::binary) << "{ not json";
  CHECK_THROWS_AS(io::load_checkpoint(a), io::CheckpointError);
}

TEST_CASE("config parser: sections, types, typo rejection") {
  auto cfg = io::Config::parse_string("[train]\nepochs = 12\nlearning_rate = 0.5\nbaseline = off\n");
  CHECK(cfg.get_int("train", "epochs", 0) == 12);
  CHECK(cfg.get_double("train", "learning_rate", 0.0) == 0.5);
  CHECK(cfg.get_bool("train", "baseline", true) == false);
  CHECK(cfg.get_int("train", "missing", 7) == 7);
  cfg.ensure_fully_consumed();

  auto stray = io::Config::parse_string("[train]\nepoochs = 12\n");
  CHECK_THROWS_AS(stray.ensure_fully_consumed(), io::ConfigError);
  CHECK_THROWS_AS(io::Config::parse_string("[train\nepochs = 1\n"), io::ConfigError);
  CHECK_THROWS_AS(io::Config::parse_string("[t]\nno_equals_here\n"), io::ConfigError);
  auto bad_type = io::Config::parse_string("[t]\nx = abc\n");
  CHECK_THROWS_AS(bad_type.get_double("t", "x", 0.0), io::ConfigError);
}

TEST_CASE("run config file overrides defaults and rejects unknown keys") {
  TempDir tmp;
  const fs::path cfg_path = tmp.path / "run.cfg";
  std::ofstream(cfg_path) << "[run]\nseed = 9\n[train]\nepochs = 77\nstress_scale = 0.05\n"
                          << "[gp1]\nunary = exp\nmax_size = 22\n[gp2]\nunary = none\n"
                          << "[analysis]\nhi = 60\n";
  const auto cfg = pipeline::load_run_config(cfg_path);
  CHECK(cfg.seed == 9);
  CHECK(cfg.train.epochs == 77);
  CHECK(cfg.train.stress_scale == 0.05);
  CHECK(cfg.gp1.max_size == 22);
  REQUIRE(cfg.gp1.unary_ops.size() == 1);
  CHECK(cfg.gp1.unary_ops[0] == symreg::Op::Exp);
  CHECK(cfg.gp2.unary_ops.empty());
  CHECK(cfg.analysis_hi == 60.0);
  CHECK(cfg.analysis_lo == 2.0);

  std::ofstream(cfg_path) << "[run]\nseeed = 9\n";
  CHECK_THROWS_AS(pipeline::load_run_config(cfg_path), io::ConfigError);
}

TEST_CASE("per-mode R2 of the published Treloar energy fit stays in its windows") {
  const auto samples = io::load_dataset(fs::path(HYPERFIT_DATA_DIR) / "treloar.csv");
  const auto grads = [](double i1, double) {
    return kinematics::ShapeGradients{0.1502 + 0.0771 * 0.0665 * std::exp(0.0665 * i1), 0.0035};
  };
  const auto rows = io::per_mode_r2(grads, samples);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].first == "UE");
  CHECK(rows[0].second > 0.995);
  CHECK(rows[1].first == "EBE");
  CHECK(rows[1].second > 0.985);
  CHECK(rows[2].first == "PS");
  CHECK(rows[2].second > 0.99);
}

TEST_CASE("tiny pipeline run emits a complete, deterministic artifact set") {
  TempDir tmp;
  // synthesize a small Neo-Hookean dataset
  const auto energy = training::neo_hookean(0.5);
  std::vector<double> grid;
  for (int i = 0; i < 12; ++i) grid.push_back(1.0 + 1.5 * i / 11.0);
  const LoadingMode modes[] = {LoadingMode::UE, LoadingMode::EBE, LoadingMode::PS};
  const auto data = training::generate_synthetic(energy, modes, grid, 0.0, 0);
  io::save_dataset(tmp.path / "data.csv", data, "tiny neo-hookean set");

  pipeline::RunConfig cfg = pipeline::default_run_config();
  cfg.dataset = tmp.path / "data.csv";
  cfg.out_dir = tmp.path / "out1";
  cfg.seed = 5;
  cfg.train.epochs = 300;
  cfg.train.hidden = 8;
  cfg.gp1.population = 60;
  cfg.gp1.max_iterations = 8;
  cfg.gp2.population = 60;
  cfg.gp2.max_iterations = 8;
  cfg.shape_samples = 100;
  cfg.time_budget = false;

  const auto artifacts = pipeline::run_all(cfg);
  for (const char* rel :
       {"checkpoint.json", "baseline.json", "symbolic.json", "analysis.txt", "report.md",
        "plotdata/loss.tsv", "plotdata/pareto_psi1.tsv", "plotdata/pareto_psi2.tsv",
        "plotdata/pred_UE.tsv", "plotdata/pred_EBE.tsv", "plotdata/pred_PS.tsv",
        "plotdata/shape_psi1.tsv", "plotdata/shape_psi2.tsv", "plots/loss.svg",
        "plots/pred_UE.svg", "plots/shape_psi1.svg"})
    CHECK(fs::exists(cfg.out_dir / rel));

  // pareto table strictly monotone in mse
  for (int which = 1; which <= 2; ++which) {
    const auto& table = (which == 1 ? artifacts.distill.sel1 : artifacts.distill.sel2).table;
    for (std::size_t i = 1; i < table.size(); ++i) {
      CHECK(table[i].complexity > table[i - 1].complexity);
      CHECK(table[i].mse < table[i - 1].mse);
    }
  }

  // distill artifacts reload exactly
  const auto reloaded = pipeline::load_distill(cfg.out_dir / "symbolic.json");
  CHECK(symreg::print_canonical(reloaded.sel1.expr) ==
        symreg::print_canonical(artifacts.distill.sel1.expr));
  CHECK(reloaded.sel2.table.size() == artifacts.distill.sel2.table.size());

  // a second identical run produces byte-identical artifacts
  pipeline::RunConfig cfg2 = cfg;
  cfg2.out_dir = tmp.path / "out2";
  pipeline::run_all(cfg2);
  for (const char* rel : {"checkpoint.json", "symbolic.json", "analysis.txt", "report.md",
                          "plotdata/loss.tsv", "plotdata/pred_UE.tsv", "plotdata/shape_psi2.tsv"})
    CHECK(slurp(cfg.out_dir / rel) == slurp(cfg2.out_dir / rel));
}

TEST_CASE("emit_report requires a checkpoint") {
  io::ReportInputs inputs;
  CHECK_THROWS_AS(io::emit_report("/tmp/hyperfit_nowhere", inputs), io::ReportError);
}
