#include "hyperfit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hyperfit::io {

namespace {

using kinematics::LoadingMode;
using training::StressSample;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw ReportError("report: cannot write " + p.string());
  return out;
}

kinematics::GradsFn model_grads_fn(const pnam::PnamModel& model) {
  return [&model](double i1, double i2) {
    return pnam::pnam_grads(model, {i1, i2, 1.0});
  };
}

// Minimal SVG polyline chart. Series are (x, y) polylines drawn over a
// framed plot area with min/max annotations.
class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add_series(std::string name, std::vector<std::pair<double, double>> points, bool log_y = false) {
    log_y_ = log_y;
    series_.push_back({std::move(name), std::move(points)});
  }

  void write(const std::filesystem::path& path) const {
    const double width = 720, height = 440;
    const double x0 = 70, y0 = 40, x1 = width - 30, y1 = height - 60;
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const auto& s : series_)
      for (auto [x, y] : s.points) {
        const double yy = log_y_ ? std::log10(std::max(y, 1e-300)) : y;
        lo_x = std::min(lo_x, x);
        hi_x = std::max(hi_x, x);
        lo_y = std::min(lo_y, yy);
        hi_y = std::max(hi_y, yy);
      }
    if (!(hi_x > lo_x)) hi_x = lo_x + 1.0;
    if (!(hi_y > lo_y)) hi_y = lo_y + 1.0;
    auto map_x = [&](double x) { return x0 + (x - lo_x) / (hi_x - lo_x) * (x1 - x0); };
    auto map_y = [&](double y) {
      const double yy = log_y_ ? std::log10(std::max(y, 1e-300)) : y;
      return y1 - (yy - lo_y) / (hi_y - lo_y) * (y1 - y0);
    };
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title_
        << "</text>\n";
    out << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << x1 - x0 << "\" height=\"" << y1 - y0
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << height - 18
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label_ << "</text>\n";
    out << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
        << (y0 + y1) / 2 << ")\" text-anchor=\"middle\">" << y_label_ << (log_y_ ? " (log10)" : "")
        << "</text>\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", lo_x);
    out << "<text x=\"" << x0 << "\" y=\"" << y1 + 16 << "\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", hi_x);
    out << "<text x=\"" << x1 << "\" y=\"" << y1 + 16 << "\" text-anchor=\"end\" font-size=\"11\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", log_y_ ? std::pow(10.0, lo_y) : lo_y);
    out << "<text x=\"" << x0 - 6 << "\" y=\"" << y1 << "\" text-anchor=\"end\" font-size=\"11\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", log_y_ ? std::pow(10.0, hi_y) : hi_y);
    out << "<text x=\"" << x0 - 6 << "\" y=\"" << y0 + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << buf
        << "</text>\n";
    for (std::size_t i = 0; i < series_.size(); ++i) {
      const auto& s = series_[i];
      out << "<polyline fill=\"none\" stroke=\"" << colors[i % 6] << "\" stroke-width=\"1.5\" points=\"";
      for (auto [x, y] : s.points) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", map_x(x), map_y(y));
        out << buf;
      }
      out << "\"/>\n";
      out << "<text x=\"" << x1 - 8 << "\" y=\"" << y0 + 16 + 14 * double(i)
          << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colors[i % 6] << "\">" << s.name
          << "</text>\n";
    }
    out << "</svg>\n";
  }

 private:
  struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  bool log_y_ = false;
};

}  // namespace

std::vector<std::pair<std::string, double>> per_mode_r2(const kinematics::GradsFn& grads,
                                                        std::span<const StressSample> data) {
  std::vector<std::pair<std::string, double>> out;
  for (LoadingMode mode : {LoadingMode::UE, LoadingMode::EBE, LoadingMode::PS}) {
    std::vector<double> pred, truth;
    for (const auto& s : data) {
      if (s.mode != mode) continue;
      pred.push_back(kinematics::reduced_stress(grads, mode, s.lambda).p1);
      truth.push_back(s.p1);
    }
    if (truth.size() >= 2) out.emplace_back(std::string(kinematics::to_string(mode)), training::r2_score(pred, truth));
  }
  return out;
}

void emit_report(const std::filesystem::path& out_dir, const ReportInputs& in) {
  if (!in.checkpoint) throw ReportError("report: checkpoint input is required");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "plotdata", ec);
  if (ec) throw ReportError("report: cannot create " + (out_dir / "plotdata").string());
  if (in.emit_svg) std::filesystem::create_directories(out_dir / "plots", ec);

  const pnam::PnamModel& model = in.checkpoint->model;
  const auto model_fn = model_grads_fn(model);

  std::optional<training::EnergyModel> symbolic;
  if (in.sel1 && in.sel2) symbolic = training::from_expressions(in.sel1->expr, in.sel2->expr);

  // --- loss curves -----------------------------------------------------
  {
    auto out = open_out(out_dir / "plotdata" / "loss.tsv");
    out << "epoch\tpnam_train\tpnam_validation";
    if (in.baseline) out << "\tbaseline_train\tbaseline_validation";
    out << "\n";
    const std::size_t n = in.checkpoint->history.size();
    for (std::size_t i = 0; i < n; ++i) {
      out << i + 1 << "\t" << fmt("%.17g", in.checkpoint->history[i].train) << "\t"
          << fmt("%.17g", in.checkpoint->history[i].validation);
      if (in.baseline && i < in.baseline->history.size())
        out << "\t" << fmt("%.17g", in.baseline->history[i].train) << "\t"
            << fmt("%.17g", in.baseline->history[i].validation);
      out << "\n";
    }
  }

  // --- Pareto fronts (value and derivative panels) ----------------------
  for (int which = 1; which <= 2; ++which) {
    const symreg::Selection* sel = which == 1 ? in.sel1 : in.sel2;
    if (!sel) continue;
    auto out = open_out(out_dir / "plotdata" / ("pareto_psi" + std::to_string(which) + ".tsv"));
    out << "complexity\tmse\tderivative_mse\tchosen\n";
    for (const auto& row : sel->table)
      out << row.complexity << "\t" << fmt("%.17g", row.mse) << "\t" << fmt("%.17g", row.derivative_mse)
          << "\t" << (row.chosen ? 1 : 0) << "\n";
  }

  // --- predictions with train/validation boundary -----------------------
  const training::SplitData split = training::split_dataset(in.data, in.checkpoint->config.split_fraction);
  auto is_validation = [&](const StressSample& s) {
    for (const auto& v : split.validation)
      if (v.mode == s.mode && v.lambda == s.lambda && v.p1 == s.p1) return true;
    return false;
  };
  for (LoadingMode mode : {LoadingMode::UE, LoadingMode::EBE, LoadingMode::PS}) {
    std::vector<StressSample> rows;
    for (const auto& s : in.data)
      if (s.mode == mode) rows.push_back(s);
    if (rows.empty()) continue;
    std::stable_sort(rows.begin(), rows.end(),
                     [](const StressSample& a, const StressSample& b) { return a.lambda < b.lambda; });
    auto out = open_out(out_dir / "plotdata" /
                        ("pred_" + std::string(kinematics::to_string(mode)) + ".tsv"));
    out << "lambda\tdata_p1\tmodel_p1";
    if (symbolic) out << "\tsymbolic_p1";
    out << "\tsplit\n";
    for (const auto& s : rows) {
      out << fmt("%.17g", s.lambda) << "\t" << fmt("%.17g", s.p1) << "\t"
          << fmt("%.17g", kinematics::reduced_stress(model_fn, mode, s.lambda).p1);
      if (symbolic)
        out << "\t" << fmt("%.17g", kinematics::reduced_stress(symbolic->grads_at, mode, s.lambda).p1);
      out << "\t" << (is_validation(s) ? "validation" : "train") << "\n";
    }
  }

  // --- shape-function overlays ------------------------------------------
  for (int which = 1; which <= 2; ++which) {
    const symreg::Selection* sel = which == 1 ? in.sel1 : in.sel2;
    const auto values = symreg::sample_shape_function(model, which, in.shape_samples);
    const auto slopes = symreg::sample_shape_slope(model, which, in.shape_samples);
    symreg::ExprPtr dsel = sel ? symreg::diff_expr(sel->expr) : nullptr;
    auto out = open_out(out_dir / "plotdata" / ("shape_psi" + std::to_string(which) + ".tsv"));
    out << "invariant\tnet_value\tnet_slope";
    if (sel) out << "\tsymbolic_value\tsymbolic_slope";
    out << "\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      out << fmt("%.17g", values[i].first) << "\t" << fmt("%.17g", values[i].second) << "\t"
          << fmt("%.17g", slopes[i].second);
      if (sel) {
        const auto v = symreg::eval_expr(sel->expr, values[i].first);
        const auto g = symreg::eval_expr(dsel, values[i].first);
        out << "\t" << (v ? fmt("%.17g", *v) : "nan") << "\t" << (g ? fmt("%.17g", *g) : "nan");
      }
      out << "\n";
    }
  }

  // --- report.md ---------------------------------------------------------
  {
    auto out = open_out(out_dir / "report.md");
    out << "# Hyperelastic model discovery report\n\n";
    out << "Seed: " << in.seed << "\n\n";

    if (in.sel1 && in.sel2) {
      out << "## Discovered energy\n\n";
      out << "psi(I1, I2) = psi1(I1) + psi2(I2), with\n\n";
      out << "    psi1(I1) = " << symreg::print_display(in.sel1->expr, "I1") << "\n";
      out << "    psi2(I2) = " << symreg::print_display(in.sel2->expr, "I2") << "\n\n";
      out << "Canonical forms (exact constants):\n\n";
      out << "    psi1: " << symreg::print_canonical(in.sel1->expr) << "\n";
      out << "    psi2: " << symreg::print_canonical(in.sel2->expr) << "\n\n";
      out << "Selected complexities: psi1 = " << in.sel1->complexity << ", psi2 = " << in.sel2->complexity
          << "\n\n";
    }

    out << "## Accuracy (R^2 over the full dataset)\n\n";
    out << "| Model | ";
    const auto model_r2 = per_mode_r2(model_fn, in.data);
    for (const auto& [name, _] : model_r2) out << name << " | ";
    out << "\n|---|";
    for (std::size_t i = 0; i < model_r2.size(); ++i) out << "---|";
    out << "\n| PNAM | ";
    for (const auto& [_, r2] : model_r2) out << fmt("%.4f", r2) << " | ";
    out << "\n";
    if (symbolic) {
      out << "| Symbolic | ";
      for (const auto& [_, r2] : per_mode_r2(symbolic->grads_at, in.data)) out << fmt("%.4f", r2) << " | ";
      out << "\n";
    }
    if (in.baseline) {
      auto baseline_fn = [&](double i1, double i2) {
        return pnam::baseline_forward_and_grads(in.baseline->mlp, {i1, i2, 1.0}).grads;
      };
      out << "| Baseline MLP | ";
      for (const auto& [_, r2] : per_mode_r2(baseline_fn, in.data)) out << fmt("%.4f", r2) << " | ";
      out << "\n";
    }
    out << "\n";

    out << "## Training\n\n";
    out << "- epochs: " << in.checkpoint->config.epochs << "\n";
    out << "- learning rate: " << fmt("%g", in.checkpoint->config.learning_rate) << "\n";
    out << "- split fraction: " << fmt("%g", in.checkpoint->config.split_fraction) << "\n";
    out << "- stress scale: " << fmt("%g", in.checkpoint->config.stress_scale) << "\n";
    out << "- best validation epoch: " << in.checkpoint->best_epoch << "\n\n";

    if (in.verdict) {
      const auto& v = *in.verdict;
      out << "## Admissibility analysis\n\n";
      out << "Checked on [" << fmt("%.6g", v.lo) << ", " << fmt("%.6g", v.hi) << "] with " << v.n_grid
          << " grid points.\n\n";
      auto shape_block = [&](const char* name, const analysis::ShapeVerdict& sv) {
        out << "### " << name << "\n\n";
        if (sv.interval.domain_violation_at) {
          out << "- domain violation inside the interval at x = "
              << fmt("%.6g", *sv.interval.domain_violation_at) << "\n";
        } else {
          out << "- convex on interval: " << (sv.interval.convex ? "yes" : "NO")
              << " (worst second derivative " << fmt("%.6g", sv.interval.min_second) << ")\n";
          out << "- non-decreasing on interval: " << (sv.interval.nondecreasing ? "yes" : "NO")
              << " (worst slope " << fmt("%.6g", sv.interval.min_first) << ")\n";
        }
        out << "- dominant term: " << sv.asymptotic.function_dominant.describe() << "\n";
        out << "- non-decreasing as the invariant grows without bound: "
            << (sv.asymptotic.nondecreasing ? "yes" : "VIOLATED") << " (" << sv.asymptotic.note << ")\n\n";
      };
      shape_block("psi1", v.psi1);
      shape_block("psi2", v.psi2);
      out << "### Coercivity\n\n";
      out << "- status: " << analysis::to_string(v.coercivity.status) << "\n";
      out << "- " << v.coercivity.rationale << "\n\n";
      out << "### Stress-free reference state\n\n";
      out << "- alpha0 = " << fmt("%.6g", v.stress_free.alpha0) << "\n";
      out << "- residual Frobenius norm at C = I: " << fmt("%.6g", v.stress_free.residual) << " ("
          << (v.stress_free.stress_free ? "stress free" : "NOT stress free") << ")\n\n";
    }

    out << "## Files\n\n";
    out << "- plotdata/loss.tsv\n";
    if (in.sel1) out << "- plotdata/pareto_psi1.tsv\n";
    if (in.sel2) out << "- plotdata/pareto_psi2.tsv\n";
    for (LoadingMode mode : {LoadingMode::UE, LoadingMode::EBE, LoadingMode::PS}) {
      bool present = false;
      for (const auto& s : in.data) present = present || s.mode == mode;
      if (present) out << "- plotdata/pred_" << kinematics::to_string(mode) << ".tsv\n";
    }
    out << "- plotdata/shape_psi1.tsv\n- plotdata/shape_psi2.tsv\n";
    if (in.emit_svg) out << "- plots/ (static SVG renderings of the same series)\n";
  }

  // --- SVG plots ----------------------------------------------------------
  if (in.emit_svg) {
    {
      SvgChart chart("Training and validation loss", "epoch", "loss");
      std::vector<std::pair<double, double>> tr, va;
      for (std::size_t i = 0; i < in.checkpoint->history.size(); ++i) {
        tr.emplace_back(double(i + 1), in.checkpoint->history[i].train);
        va.emplace_back(double(i + 1), in.checkpoint->history[i].validation);
      }
      chart.add_series("train", std::move(tr), true);
      chart.add_series("validation", std::move(va), true);
      chart.write(out_dir / "plots" / "loss.svg");
    }
    for (LoadingMode mode : {LoadingMode::UE, LoadingMode::EBE, LoadingMode::PS}) {
      std::vector<std::pair<double, double>> data_pts, model_pts, sym_pts;
      for (const auto& s : in.data) {
        if (s.mode != mode) continue;
        data_pts.emplace_back(s.lambda, s.p1);
        model_pts.emplace_back(s.lambda, kinematics::reduced_stress(model_fn, mode, s.lambda).p1);
        if (symbolic)
          sym_pts.emplace_back(s.lambda, kinematics::reduced_stress(symbolic->grads_at, mode, s.lambda).p1);
      }
      if (data_pts.empty()) continue;
      std::sort(data_pts.begin(), data_pts.end());
      std::sort(model_pts.begin(), model_pts.end());
      std::sort(sym_pts.begin(), sym_pts.end());
      SvgChart chart("Nominal stress, " + std::string(kinematics::to_string(mode)), "stretch", "P1 [MPa]");
      chart.add_series("data", std::move(data_pts));
      chart.add_series("PNAM", std::move(model_pts));
      if (symbolic) chart.add_series("symbolic", std::move(sym_pts));
      chart.write(out_dir / "plots" / ("pred_" + std::string(kinematics::to_string(mode)) + ".svg"));
    }
    for (int which = 1; which <= 2; ++which) {
      const symreg::Selection* sel = which == 1 ? in.sel1 : in.sel2;
      SvgChart chart("Shape function psi" + std::to_string(which), "invariant", "psi");
      chart.add_series("ICNN", symreg::sample_shape_function(model, which, in.shape_samples));
      if (sel) {
        std::vector<std::pair<double, double>> sym_pts;
        for (auto [x, _] : symreg::sample_shape_function(model, which, in.shape_samples)) {
          const auto v = symreg::eval_expr(sel->expr, x);
          if (v) sym_pts.emplace_back(x, *v);
        }
        chart.add_series("symbolic", std::move(sym_pts));
      }
      chart.write(out_dir / "plots" / ("shape_psi" + std::to_string(which) + ".svg"));
    }
  }
}

}  // namespace hyperfit::io
