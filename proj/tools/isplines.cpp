// Command-line front end: fit, eval, render, sdf, bench.

#include "isplines/collocation.hpp"
#include "isplines/contour.hpp"
#include "isplines/io.hpp"
#include "isplines/losses.hpp"
#include "isplines/metrics.hpp"
#include "isplines/optimizer.hpp"
#include "isplines/parallel.hpp"
#include "isplines/sdf_fit.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace isplines;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpaceFlags {
  int basis_count = 128;
  int degree = 1;
  int samples = 512;

  SplineSpace space() const {
    try {
      return SplineSpace(basis_count, degree);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
};

struct RawFlag {
  std::string text;  // "WxH"
  int cols = 0;
  int rows = 0;

  void parse() {
    if (text.empty()) return;
    const auto x = text.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument("");
      cols = std::stoi(text.substr(0, x));
      rows = std::stoi(text.substr(x + 1));
    } catch (const std::exception&) {
      throw UsageError("--raw expects WxH, got '" + text + "'");
    }
    if (cols <= 0 || rows <= 0) throw UsageError("--raw dimensions must be positive");
  }
  bool active() const { return !text.empty(); }
};

BinaryMask load_mask(const fs::path& path, const RawFlag& raw) {
  return raw.active() ? io::read_raw_mask(path, raw.rows, raw.cols) : io::read_pgm(path);
}

BinaryMask require_square(BinaryMask mask, const fs::path& path) {
  if (mask.rows() != mask.cols()) {
    throw io::FormatError(path.string() + ": mask must be square, got " + std::to_string(mask.rows()) + "x" +
                          std::to_string(mask.cols()));
  }
  return mask;
}

std::vector<fs::path> slice_paths(const std::vector<std::string>& direct, const std::string& manifest,
                                  std::optional<Spacing>* spacing_out = nullptr) {
  if (!direct.empty() && !manifest.empty()) throw UsageError("give slices directly or via a manifest, not both");
  std::vector<fs::path> out(direct.begin(), direct.end());
  if (!manifest.empty()) {
    const auto m = io::read_manifest(manifest);
    out = m.slices;
    if (spacing_out) *spacing_out = m.spacing;
  }
  return out;
}

LossKind parse_loss_flag(const std::string& name) {
  const auto kind = parse_loss_kind(name);
  if (!kind) throw UsageError("unknown loss '" + name + "'");
  return *kind;
}

// --- fit ---------------------------------------------------------------------

struct FitCommand {
  std::vector<std::string> masks;
  std::string manifest;
  RawFlag raw;
  SpaceFlags space;
  std::string loss = "dice";
  std::string init = "coarse";
  FitOptions options;
  std::string out;
  std::string out_dir;
  bool history = false;
  int jobs = 1;
  bool samples_given = false;

  int run() {
    raw.parse();
    const SplineSpace sp = space.space();
    options.loss = parse_loss_flag(loss);
    const auto method = parse_init_method(init);
    if (!method) throw UsageError("unknown init '" + init + "'");
    options.init = *method;
    try {
      options.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    const auto paths = slice_paths(masks, manifest);
    if (paths.empty()) throw UsageError("fit needs --mask or --manifest");
    if (!out.empty() && paths.size() != 1) throw UsageError("--out takes a single mask; use --out-dir");

    std::vector<fs::path> targets(paths.size());
    for (std::size_t k = 0; k < paths.size(); ++k) {
      if (!out.empty()) {
        targets[k] = out;
      } else {
        const fs::path dir = out_dir.empty() ? paths[k].parent_path() : fs::path(out_dir);
        targets[k] = dir / paths[k].stem().concat(".ispl");
      }
    }
    if (!out_dir.empty()) fs::create_directories(out_dir);

    std::vector<std::string> summaries(paths.size());
    parallel_for(paths.size(), jobs, [&](std::size_t k) {
      const BinaryMask mask = require_square(load_mask(paths[k], raw), paths[k]);
      if (samples_given && mask.rows() != space.samples) {
        throw io::FormatError(paths[k].string() + ": mask is " + std::to_string(mask.rows()) +
                              " pixels wide but --I is " + std::to_string(space.samples));
      }
      const CollocationMatrix collocation(static_cast<int>(mask.rows()), sp);
      const FitResult result = fit_coefficients(mask, collocation, options);
      io::write_coefficients(targets[k], result.coefficients);
      if (history) {
        std::ostringstream csv;
        io::write_loss_history(csv, result.loss_history);
        fs::path hist = targets[k];
        hist.replace_extension(".loss.csv");
        io::write_file_atomic(hist, csv.str());
      }
      const double dice = score(confusion(rasterize(evaluate_grid(collocation, result.coefficients)), mask),
                                MetricKind::Dice);
      std::ostringstream line;
      line << paths[k].string() << " -> " << targets[k].string()
           << " loss=" << io::format_double(result.loss_history[static_cast<std::size_t>(result.best_iteration)])
           << " iters=" << result.iterations_run << " stop=" << to_string(result.stop_reason)
           << " dice=" << io::format_double(dice);
      summaries[k] = line.str();
    });
    for (const auto& s : summaries) std::cout << s << '\n';
    return 0;
  }
};

// --- eval --------------------------------------------------------------------

struct EvalCommand {
  std::vector<std::string> preds;
  std::string pred_manifest;
  std::vector<std::string> masks;
  std::string manifest;
  RawFlag raw;
  std::string spacing_text;
  std::string format = "csv";
  std::string out;
  std::string name = "volume";
  int jobs = 1;

  BinaryMask load_prediction(const fs::path& path, Eigen::Index samples) const {
    if (path.extension() == ".ispl") {
      const CoefficientGrid grid = io::read_coefficients(path);
      const CollocationMatrix collocation(static_cast<int>(samples), grid.space());
      return rasterize(evaluate_grid(collocation, grid));
    }
    return load_mask(path, raw);
  }

  int run() {
    raw.parse();
    if (format != "csv" && format != "jsonl") throw UsageError("--format must be csv or jsonl");
    std::optional<Spacing> spacing;
    const auto truth_paths = slice_paths(masks, manifest, &spacing);
    const auto pred_paths = slice_paths(preds, pred_manifest);
    if (truth_paths.empty()) throw UsageError("eval needs --mask or --manifest");
    if (pred_paths.empty()) throw UsageError("eval needs --pred/--coeffs or --pred-manifest");
    if (!spacing_text.empty()) {
      try {
        spacing = io::parse_spacing(spacing_text);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    if (truth_paths.size() != pred_paths.size()) {
      throw io::FormatError("prediction lists " + std::to_string(pred_paths.size()) + " slices but truth lists " +
                            std::to_string(truth_paths.size()));
    }

    MaskVolume truth;
    MaskVolume pred;
    truth.spacing = spacing.value_or(Spacing{});
    truth.slices.resize(truth_paths.size());
    pred.slices.resize(truth_paths.size());
    std::vector<io::MetricRow> rows(truth_paths.size());
    parallel_for(truth_paths.size(), jobs, [&](std::size_t k) {
      truth.slices[k] = load_mask(truth_paths[k], raw);
      if (pred_paths[k].extension() == ".ispl" && truth.slices[k].rows() != truth.slices[k].cols()) {
        throw io::FormatError(truth_paths[k].string() + ": coefficient predictions need square masks");
      }
      pred.slices[k] = load_prediction(pred_paths[k], truth.slices[k].rows());
      rows[k] = {name + "/" + std::to_string(k), slice_metrics(pred.slices[k], truth.slices[k], truth.spacing)};
    });
    rows.push_back({name, volume_metrics(pred, truth, jobs)});

    std::ostringstream report;
    if (format == "csv") io::write_report_csv(report, rows);
    else io::write_report_jsonl(report, rows);
    if (out.empty()) std::cout << report.str();
    else io::write_file_atomic(out, report.str());
    return 0;
  }
};

// --- render ------------------------------------------------------------------

struct RenderCommand {
  std::string coeffs;
  int samples = 512;
  std::string out;
  std::string contours;

  int run() {
    if (samples < 2) throw UsageError("--I must be >= 2");
    const CoefficientGrid grid = io::read_coefficients(coeffs);
    const CollocationMatrix collocation(samples, grid.space());
    const Field z = evaluate_grid(collocation, grid);
    io::write_pgm(out, rasterize(z));
    if (!contours.empty()) {
      std::ostringstream text;
      write_polylines(text, zero_contours(z));
      io::write_file_atomic(contours, text.str());
    }
    return 0;
  }
};

// --- sdf ---------------------------------------------------------------------

struct SdfCommand {
  std::string mask;
  RawFlag raw;
  std::string out;
  std::string fit_out;
  SpaceFlags space;
  double ridge = 0.0;
  double weight_radius = -1.0;
  double weight_boost = 10.0;
  double truncate = 0.0;

  int run() {
    raw.parse();
    if (ridge < 0.0) throw UsageError("--ridge must be >= 0");
    const BinaryMask m = require_square(load_mask(mask, raw), mask);
    const Field sdf = signed_distance(m);
    if (!out.empty()) io::write_sdf(out, sdf);
    if (!fit_out.empty()) {
      const SplineSpace sp = space.space();
      const CollocationMatrix collocation(static_cast<int>(m.rows()), sp);
      const Field target = truncate > 0.0 ? truncate_distance(sdf, truncate) : sdf;
      const Matrix weights = weight_radius >= 0.0 ? boundary_weights(sdf, weight_radius, weight_boost)
                                                  : Matrix::Ones(sdf.rows(), sdf.cols());
      io::write_coefficients(fit_out, weighted_lsq_fit(target, weights, collocation, ridge));
    }
    if (out.empty() && fit_out.empty()) throw UsageError("sdf needs --out and/or --fit-out");
    return 0;
  }
};

// --- bench -------------------------------------------------------------------

struct BenchCommand {
  std::string sizes = "512x128,512x64,128x32";
  int degree = 1;
  int reps = 10;
  std::string loss = "dice";

  static std::pair<double, double> mean_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
    return {mean, std::sqrt(var)};
  }

  int run() {
    if (reps < 1) throw UsageError("--reps must be >= 1");
    const LossKind kind = parse_loss_flag(loss);
    std::vector<std::pair<int, int>> pairs;
    std::stringstream list(sizes);
    std::string item;
    while (std::getline(list, item, ',')) {
      const auto x = item.find('x');
      try {
        if (x == std::string::npos) throw std::invalid_argument("");
        pairs.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
      } catch (const std::exception&) {
        throw UsageError("--sizes expects IxO[,IxO...], got '" + item + "'");
      }
    }
    if (pairs.empty()) throw UsageError("--sizes is empty");

    using clock = std::chrono::steady_clock;
    auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
    std::cout << "I,O,p,eval_mean_ms,eval_std_ms,loss_mean_ms,loss_std_ms\n";
    std::mt19937_64 rng(20240611);
    for (const auto& [samples, basis] : pairs) {
      SpaceFlags flags{basis, degree, samples};
      const SplineSpace sp = flags.space();
      if (samples < 2) throw UsageError("bench sizes need I >= 2");
      const CollocationMatrix collocation(samples, sp);
      std::uniform_real_distribution<double> coef(-1.0, 1.0);
      Matrix c(basis, basis);
      for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = coef(rng);
      BinaryMask mask = rasterize(evaluate_grid(collocation, c));

      std::vector<double> eval_ms;
      std::vector<double> loss_ms;
      double sink = 0.0;
      for (int r = 0; r < reps; ++r) {
        auto t0 = clock::now();
        const Field z = evaluate_grid(collocation, c);
        auto t1 = clock::now();
        const LossReport rep = evaluate_loss(collocation, c, mask, kind);
        auto t2 = clock::now();
        sink += z(0, 0) + rep.loss;
        eval_ms.push_back(ms(t1 - t0));
        loss_ms.push_back(ms(t2 - t1));
      }
      const auto [em, es] = mean_std(eval_ms);
      const auto [lm, ls] = mean_std(loss_ms);
      std::cout << samples << ',' << basis << ',' << degree << ',' << io::format_double(em) << ','
                << io::format_double(es) << ',' << io::format_double(lm) << ',' << io::format_double(ls) << '\n';
      if (!std::isfinite(sink)) std::cerr << "warning: non-finite benchmark result\n";
    }
    return 0;
  }
};

void add_space_flags(CLI::App* cmd, SpaceFlags& flags) {
  cmd->add_option("--O", flags.basis_count, "Coefficients per axis")->capture_default_str();
  cmd->add_option("--p", flags.degree, "Spline degree")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit tensor-product spline segmentation toolkit"};
  app.require_subcommand(1);

  FitCommand fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit coefficient grids to binary masks");
  fit_cmd->add_option("--mask", fit.masks, "Mask file(s) (PGM, or raw with --raw)");
  fit_cmd->add_option("--manifest", fit.manifest, "Volume manifest listing mask slices");
  fit_cmd->add_option("--raw", fit.raw.text, "Read masks as raw u8 of size WxH");
  add_space_flags(fit_cmd, fit.space);
  auto* fit_samples = fit_cmd->add_option("--I", fit.space.samples, "Expected mask resolution");
  fit_cmd->add_option("--loss", fit.loss, "mmae|mmse|accuracy|dice|jaccard")->capture_default_str();
  fit_cmd->add_option("--epsilon", fit.options.epsilon, "Smoothed indicator epsilon")->capture_default_str();
  fit_cmd->add_option("--lr", fit.options.learning_rate, "Learning rate")->capture_default_str();
  fit_cmd->add_option("--momentum", fit.options.momentum, "Nesterov momentum")->capture_default_str();
  fit_cmd->add_option("--iters", fit.options.max_iters, "Maximum iterations")->capture_default_str();
  fit_cmd->add_option("--init", fit.init, "coarse|sdf|zero")->capture_default_str();
  fit_cmd->add_option("--plateau-tol", fit.options.plateau_tol, "Plateau improvement threshold")->capture_default_str();
  fit_cmd->add_option("--plateau-window", fit.options.plateau_window, "Plateau window")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Output ISPL1 file (single mask)");
  fit_cmd->add_option("--out-dir", fit.out_dir, "Output directory");
  fit_cmd->add_flag("--history", fit.history, "Write <output>.loss.csv next to each output");
  fit_cmd->add_option("--jobs", fit.jobs, "Slices fitted in parallel")->capture_default_str();

  EvalCommand eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against masks");
  eval_cmd->add_option("--pred,--coeffs", eval.preds, "Prediction(s): .ispl coefficients or masks");
  eval_cmd->add_option("--pred-manifest", eval.pred_manifest, "Manifest of predictions");
  eval_cmd->add_option("--mask", eval.masks, "Ground-truth mask(s)");
  eval_cmd->add_option("--manifest", eval.manifest, "Manifest of ground-truth slices");
  eval_cmd->add_option("--raw", eval.raw.text, "Read masks as raw u8 of size WxH");
  eval_cmd->add_option("--spacing", eval.spacing_text, "Voxel spacing sx,sy,sz");
  eval_cmd->add_option("--format", eval.format, "csv|jsonl")->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Report file (default stdout)");
  eval_cmd->add_option("--name", eval.name, "Volume label")->capture_default_str();
  eval_cmd->add_option("--jobs", eval.jobs, "Slices processed in parallel")->capture_default_str();

  RenderCommand render;
  auto* render_cmd = app.add_subcommand("render", "Rasterize a coefficient file");
  render_cmd->add_option("--coeffs", render.coeffs, "ISPL1 coefficient file")->required();
  render_cmd->add_option("--I", render.samples, "Output resolution")->capture_default_str();
  render_cmd->add_option("--out", render.out, "Output PGM")->required();
  render_cmd->add_option("--contours", render.contours, "Write zero-contour polylines here");

  SdfCommand sdf;
  auto* sdf_cmd = app.add_subcommand("sdf", "Signed distance field of a mask, optionally fitted");
  sdf_cmd->add_option("--mask", sdf.mask, "Mask file")->required();
  sdf_cmd->add_option("--raw", sdf.raw.text, "Read the mask as raw u8 of size WxH");
  sdf_cmd->add_option("--out", sdf.out, "SDF1 output");
  sdf_cmd->add_option("--fit-out", sdf.fit_out, "ISPL1 output of the least-squares fit");
  add_space_flags(sdf_cmd, sdf.space);
  sdf_cmd->add_option("--ridge", sdf.ridge, "Ridge penalty")->capture_default_str();
  sdf_cmd->add_option("--weight-radius", sdf.weight_radius, "Up-weight pixels within this distance of the boundary");
  sdf_cmd->add_option("--weight-boost", sdf.weight_boost, "Weight inside the boundary band")->capture_default_str();
  sdf_cmd->add_option("--truncate", sdf.truncate, "Clamp distances to [-tau, tau] before fitting");

  BenchCommand bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time evaluation and loss+gradient");
  bench_cmd->add_option("--sizes", bench.sizes, "Comma-separated IxO pairs")->capture_default_str();
  bench_cmd->add_option("--p", bench.degree, "Spline degree")->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps, "Repetitions per size")->capture_default_str();
  bench_cmd->add_option("--loss", bench.loss, "Loss timed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    fit.samples_given = fit_samples->count() > 0;
    if (*fit_cmd) return fit.run();
    if (*eval_cmd) return eval.run();
    if (*render_cmd) return render.run();
    if (*sdf_cmd) return sdf.run();
    if (*bench_cmd) return bench.run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
