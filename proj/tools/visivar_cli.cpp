// visivar command-line front end: analyze | apply | curve | optimize |
// histogram. Exit codes: 0 success, 1 bad arguments, 2 file/parse failure,
// 3 range rejection, 4 infeasible search.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "CLI11.hpp"
#include "visivar/visivar.hpp"

namespace {

std::string num6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%#.6g", v);
  return buf;
}

void print_report(std::ostream& os, const char* prefix,
                  const visivar::VisibilityReport& r) {
  os << prefix << "mean=" << num6(r.mean) << "\n";
  os << prefix << "variance=" << num6(r.variance) << "\n";
  os << prefix << "sub_mean_low=" << num6(r.sub_mean_low) << "\n";
  os << prefix << "sub_mean_high=" << num6(r.sub_mean_high) << "\n";
  os << prefix << "count_low=" << r.count_low << "\n";
  os << prefix << "count_high=" << r.count_high << "\n";
  os << prefix << "visibility=" << num6(r.visibility) << "\n";
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write \"" + path + "\"");
  }
  return out;
}

int usage_error(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 1;
}

struct CurveFlags {
  CLI::Option* a1 = nullptr;
  CLI::Option* a2 = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* pivot = nullptr;
  CLI::Option* points = nullptr;
  visivar::TransformParams params;
  std::string points_text;

  void attach(CLI::App* cmd) {
    a1 = cmd->add_option("--a1", params.a1, "Low-branch amplitude");
    a2 = cmd->add_option("--a2", params.a2, "High-branch amplitude");
    alpha = cmd->add_option("--alpha", params.alpha, "Low-branch exponent");
    beta = cmd->add_option("--beta", params.beta, "High-branch exponent");
    pivot = cmd->add_option("--pivot", params.pivot,
                            "Branch point override (parametric mode)");
    points = cmd->add_option("--points", points_text,
                             "Control points \"tone,value;tone,value;...\"");
  }

  int parametric_count() const {
    return static_cast<int>(a1->count() + a2->count() + alpha->count() +
                            beta->count());
  }
};

// Resolves the curve flags to a tone curve, or returns an exit code.
// `image_mean` supplies the default pivot when the subcommand has an input
// image; without one the TransformParams default applies.
std::variant<visivar::ToneCurve, int> resolve_curve(
    CurveFlags& flags, std::optional<double> image_mean) {
  const bool have_points = flags.points->count() > 0;
  const int parametric = flags.parametric_count();
  if (have_points && (parametric > 0 || flags.pivot->count() > 0)) {
    return usage_error("choose either --points or the parametric flags");
  }
  if (have_points) {
    const visivar::ControlPointCurve cpc(
        visivar::parse_control_points(flags.points_text));
    return visivar::curve_from_points(cpc);
  }
  if (parametric == 0) {
    return usage_error(
        "need --points or all of --a1 --a2 --alpha --beta");
  }
  if (parametric < 4) {
    return usage_error(
        "parametric mode needs all four of --a1 --a2 --alpha --beta");
  }
  if (flags.pivot->count() == 0 && image_mean) {
    flags.params.pivot = *image_mean;
  }
  return visivar::pivot_power_curve(flags.params);
}

int run_analyze(const std::string& input) {
  const visivar::BrightnessImage image = visivar::load_pgm_file(input);
  print_report(std::cout, "", visivar::report(image));
  return 0;
}

int run_apply(const std::string& input, CurveFlags& flags,
              const std::string& mode_text, const std::string& out_path) {
  visivar::RangeMode mode;
  if (mode_text == "reject") {
    mode = visivar::RangeMode::kReject;
  } else if (mode_text == "clamp") {
    mode = visivar::RangeMode::kClamp;
  } else {
    return usage_error("--mode must be reject or clamp");
  }

  const visivar::BrightnessImage image = visivar::load_pgm_file(input);
  const visivar::VisibilityReport before = visivar::report(image);

  auto resolved = resolve_curve(flags, before.mean);
  if (std::holds_alternative<int>(resolved)) {
    return std::get<int>(resolved);
  }
  const visivar::ToneCurve curve = std::get<visivar::ToneCurve>(resolved);

  const visivar::Histogram hist = visivar::compute_histogram(image);
  const auto checked = visivar::validate_range(curve, hist, mode);
  if (std::holds_alternative<visivar::RangeViolation>(checked)) {
    const auto& v = std::get<visivar::RangeViolation>(checked);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "range rejection: tone %d maps to %.9g",
                  v.tone, v.value);
    std::cerr << "error: " << buf << "\n";
    return 3;
  }
  const visivar::BrightnessImage transformed =
      visivar::apply_curve(image, std::get<visivar::ToneCurve>(checked));

  print_report(std::cout, "before_", before);
  if (flags.points->count() == 0) {
    std::cout << "pivot=" << num6(flags.params.pivot) << "\n";
  }
  print_report(std::cout, "after_", visivar::report(transformed));

  if (!out_path.empty()) {
    visivar::save_pgm_file(out_path, transformed);
  }
  return 0;
}

int run_curve(CurveFlags& flags, const std::string& out_path) {
  auto resolved = resolve_curve(flags, std::nullopt);
  if (std::holds_alternative<int>(resolved)) {
    return std::get<int>(resolved);
  }
  const visivar::ToneCurve& curve = std::get<visivar::ToneCurve>(resolved);
  if (out_path.empty()) {
    visivar::write_curve_csv(std::cout, curve);
  } else {
    auto out = open_output(out_path);
    visivar::write_curve_csv(out, curve);
  }
  return 0;
}

int run_optimize(const std::string& input, const std::string& grid_a1,
                 const std::string& grid_a2, const std::string& grid_alpha,
                 const std::string& grid_beta, int threads,
                 const std::string& trace_path, const std::string& out_path) {
  const visivar::BrightnessImage image = visivar::load_pgm_file(input);

  visivar::SearchGrid grid = visivar::default_grid();
  if (!grid_a1.empty()) grid.a1 = visivar::parse_axis(grid_a1);
  if (!grid_a2.empty()) grid.a2 = visivar::parse_axis(grid_a2);
  if (!grid_alpha.empty()) grid.alpha = visivar::parse_axis(grid_alpha);
  if (!grid_beta.empty()) grid.beta = visivar::parse_axis(grid_beta);

  visivar::OptimizeOptions options;
  options.workers = threads;
  options.collect_trace = !trace_path.empty();

  const visivar::VisibilityReport before = visivar::report(image);
  const visivar::SearchResult result =
      visivar::optimize(image, grid, options);

  std::cout << "pivot=" << num6(result.best_params.pivot) << "\n";
  std::cout << "best_a1=" << num6(result.best_params.a1) << "\n";
  std::cout << "best_a2=" << num6(result.best_params.a2) << "\n";
  std::cout << "best_alpha=" << num6(result.best_params.alpha) << "\n";
  std::cout << "best_beta=" << num6(result.best_params.beta) << "\n";
  std::cout << "visibility_before=" << num6(before.visibility) << "\n";
  std::cout << "visibility_after=" << num6(result.best_report.visibility)
            << "\n";
  std::cout << "variance_before=" << num6(before.variance) << "\n";
  std::cout << "variance_after=" << num6(result.best_report.variance) << "\n";
  std::cout << "candidates_total=" << result.candidates_total << "\n";
  std::cout << "candidates_rejected=" << result.candidates_rejected << "\n";

  if (!trace_path.empty()) {
    auto out = open_output(trace_path);
    visivar::write_trace_csv(out, result);
  }
  if (!out_path.empty()) {
    const visivar::ToneCurve curve =
        visivar::pivot_power_curve(result.best_params);
    visivar::save_pgm_file(out_path, visivar::apply_curve(image, curve));
  }
  return 0;
}

int run_histogram(const std::string& input, const std::string& out_path) {
  const visivar::BrightnessImage image = visivar::load_pgm_file(input);
  const visivar::Histogram hist = visivar::compute_histogram(image);
  std::ostringstream csv;
  for (int t = 0; t < 256; ++t) {
    csv << t << "," << hist.counts[static_cast<std::size_t>(t)] << "\n";
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    auto out = open_output(out_path);
    out << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Brightness functionals, tone-curve variations, and visibility "
      "maximization for 8-bit grey images"};
  app.require_subcommand(1);

  std::string input;
  std::string out_path;
  std::string mode_text = "reject";
  std::string grid_a1, grid_a2, grid_alpha, grid_beta;
  std::string trace_path;
  int threads = 1;
  CurveFlags apply_flags, curve_flags;

  CLI::App* cmd_analyze =
      app.add_subcommand("analyze", "Print brightness functionals");
  cmd_analyze->add_option("input", input, "Input PGM")->required();

  CLI::App* cmd_apply =
      app.add_subcommand("apply", "Transform an image through a tone curve");
  cmd_apply->add_option("input", input, "Input PGM")->required();
  apply_flags.attach(cmd_apply);
  cmd_apply->add_option("--mode", mode_text,
                        "Out-of-range handling: reject or clamp");
  cmd_apply->add_option("--out", out_path, "Output PGM path");

  CLI::App* cmd_curve =
      app.add_subcommand("curve", "Emit a tone curve as tone,value CSV");
  curve_flags.attach(cmd_curve);
  cmd_curve->add_option("--out", out_path, "Output CSV path (default stdout)");

  CLI::App* cmd_optimize = app.add_subcommand(
      "optimize", "Search the parameter lattice for maximum visibility");
  cmd_optimize->add_option("input", input, "Input PGM")->required();
  cmd_optimize->add_option("--grid-a1", grid_a1, "Axis \"start:stop:step\"");
  cmd_optimize->add_option("--grid-a2", grid_a2, "Axis \"start:stop:step\"");
  cmd_optimize->add_option("--grid-alpha", grid_alpha,
                           "Axis \"start:stop:step\"");
  cmd_optimize->add_option("--grid-beta", grid_beta,
                           "Axis \"start:stop:step\"");
  cmd_optimize->add_option("--threads", threads,
                           "Worker threads (0 = one per hardware thread)");
  cmd_optimize->add_option("--trace", trace_path, "Candidate trace CSV path");
  cmd_optimize->add_option("--out", out_path, "Enhanced-image PGM path");

  CLI::App* cmd_histogram =
      app.add_subcommand("histogram", "Emit the tone histogram as CSV");
  cmd_histogram->add_option("input", input, "Input PGM")->required();
  cmd_histogram->add_option("--out", out_path,
                            "Output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (cmd_analyze->parsed()) return run_analyze(input);
    if (cmd_apply->parsed()) {
      return run_apply(input, apply_flags, mode_text, out_path);
    }
    if (cmd_curve->parsed()) return run_curve(curve_flags, out_path);
    if (cmd_optimize->parsed()) {
      return run_optimize(input, grid_a1, grid_a2, grid_alpha, grid_beta,
                          threads, trace_path, out_path);
    }
    if (cmd_histogram->parsed()) return run_histogram(input, out_path);
  } catch (const visivar::PgmParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const visivar::CurveRangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const visivar::InfeasibleSearchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
