#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <thread>
#include <vector>

#include "cli_config.hpp"
#include "steklov/ellipse.hpp"
#include "steklov/functional.hpp"
#include "steklov/immersion.hpp"
#include "steklov/io_util.hpp"
#include "steklov/optimizer.hpp"
#include "steklov/steklov_solver.hpp"
#include "steklov/test_metrics.hpp"

namespace steklov::cli {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

class Output {
 public:
  Output(const std::string& dir, std::string hash, std::vector<std::string> formats)
      : dir_(dir), hash_(std::move(hash)), formats_(std::move(formats)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
      fail(ErrorKind::io, "cannot create output directory " + dir_.string());
  }

  bool wants(const std::string& format) const {
    return std::find(formats_.begin(), formats_.end(), format) != formats_.end();
  }
  const std::string& hash() const { return hash_; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CsvWriter csv(const std::string& name, std::vector<std::string> columns) const {
    return CsvWriter(path(name), hash_, std::move(columns));
  }
  void close(CsvWriter& w, const std::string& name) const {
    w.close();
    std::cout << "wrote " << path(name) << "\n";
  }
  void write(const std::string& name, json j) const {
    j["artifact_version"] = kArtifactVersion;
    j["config_hash"] = hash_;
    write_json(path(name), j);
    std::cout << "wrote " << path(name) << "\n";
  }

 private:
  std::filesystem::path dir_;
  std::string hash_;
  std::vector<std::string> formats_;
};

// Runs f(0..n-1) on up to `threads` workers. The error of the lowest failing
// index is rethrown so failures do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F f) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t extra = std::min<std::size_t>(threads, n) > 0 ? std::min<std::size_t>(threads, n) - 1 : 0;
    for (std::size_t k = 0; k < extra; ++k) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string fmt(double x) { return format_double(x); }

json diagnostics_json(const Immersion& im, const FunctionalParams& params) {
  const Diagnostics d = diagnose(im);
  const auto [m0, m1] = mass_residuals(im, params);
  return json{{"alpha", im.alpha},
              {"sigma", im.sigma},
              {"ellipsoid_p", im.ellipsoid_p},
              {"L", im.L},
              {"planar", im.planar()},
              {"quarter_rotated", im.quarter_rotated},
              {"mass_residuals", {m0, m1}},
              {"ellipsoid_residual", d.ellipsoid_residual},
              {"conformality_residual", d.conformality_residual},
              {"min_boundary_speed", d.min_boundary_speed},
              {"jacobian_min", d.jacobian_min},
              {"winding", d.winding},
              {"nodal_counts", d.nodal_counts},
              {"area", d.area},
              {"area_identity", d.area_identity},
              {"critical_weight_mismatch", d.critical_weight_mismatch},
              {"phi2_axis_min", d.phi2_axis_min},
              {"step1_violation", d.step1_violation}};
}

using Violations = std::vector<std::string>;

Violations cmd_spectrum(const json& c, const Output& out) {
  check_object(c, "config", {"weight", "N", "k_max", "use_blocks", "formats"});
  const BoundaryWeight w = parse_weight(c.value("weight", json::object()), "weight");
  const std::size_t N = get_size(c, "N", 64, "config");
  const std::size_t k_max = get_size(c, "k_max", 8, "config");
  SolveOptions so;
  so.use_blocks = get_bool(c, "use_blocks", true, "config");
  const SteklovSpectrum spec = solve_spectrum(w, N, k_max, so);
  Violations v = spectrum_invariant_violations(spec);

  if (out.wants("csv")) {
    auto csv = out.csv("spectrum.csv", {"k", "sigma", "sigma_bar", "block"});
    for (std::size_t k = 0; k < spec.size(); ++k)
      csv.cell(static_cast<long long>(k)).cell(spec.sigmas[k]).cell(spec.normalized[k])
          .cell(std::string(k < spec.blocks.size() ? to_string(spec.blocks[k]) : "full")).end_row();
    out.close(csv, "spectrum.csv");
  }
  if (out.wants("json")) {
    json blocks = json::array();
    for (Block b : spec.blocks) blocks.push_back(to_string(b));
    out.write("spectrum.json", json{{"N", N},
                                    {"k_max", k_max},
                                    {"L", spec.L},
                                    {"symmetry", to_string(w.symmetry_class)},
                                    {"sigmas", spec.sigmas},
                                    {"normalized", spec.normalized},
                                    {"blocks", blocks},
                                    {"eigen_residual", eigen_residual(spec)},
                                    {"violations", v}});
  }
  return v;
}

BoundaryWeight default_initial() {
  return BoundaryWeight::from_density(TrigSeries::constant(1.0) + TrigSeries::cosine(2, 0.2));
}

json result_json(const OptimizationResult& r, const FunctionalParams& params) {
  const double t = params.t, s = params.s;
  json j{{"status", r.status},
         {"message", r.message},
         {"converged", r.converged},
         {"iterations", r.iterations},
         {"E", r.E},
         {"subgrad_norm", r.subgrad_norm},
         {"kink_gap", r.kink_gap},
         {"p", r.p},
         {"L", r.L},
         {"sigma_bar1", r.spectrum.sigma_bar(1)},
         {"sigma_bar2", r.spectrum.sigma_bar(2)},
         {"planarity_flag", r.planarity_flag},
         {"mass_residuals", {r.mass_residuals.first, r.mass_residuals.second}},
         {"planar_candidates",
          {std::pow(2.0 * std::sqrt(t), 1.0 / s) / (2.0 * kPi), std::pow(1.0 + t, 1.0 / s) / (2.0 * kPi)}},
         {"phase", to_string(phase_classify(params, 3.0))},
         {"coeffs", r.coeffs},
         {"params", {{"s", s}, {"t", t}}}};
  j["diagnostics"] = r.immersion ? diagnostics_json(*r.immersion, params) : json(nullptr);
  return j;
}

Violations optimize_violations(const OptimizationResult& r, const OptimizerConfig& cfg) {
  Violations v = spectrum_invariant_violations(r.spectrum);
  if (r.status == "solver_failure") v.push_back("optimizer solver failure: " + r.message);
  if (!(r.p > 0.0 && r.p <= 1.0 + 1e-12)) v.push_back("p outside (0, 1]");
  if (!(r.L > 0.0 && r.L <= 4.0 * kPi * (1.0 + 1e-6))) v.push_back("L outside (0, 4 pi]");
  if (r.converged && r.immersion &&
      std::max(std::abs(r.mass_residuals.first), std::abs(r.mass_residuals.second)) > cfg.mass_tol)
    v.push_back("mass residuals exceed mass_tol at convergence");
  return v;
}

Violations cmd_optimize(const json& c, const Output& out, const RunOptions& opts) {
  check_object(c, "config", {"params", "optimizer", "initial", "formats"});
  const FunctionalParams params = parse_params(c.value("params", json{{"s", 1.0}, {"t", 8.0}}));
  const OptimizerConfig cfg = parse_optimizer(c.value("optimizer", json::object()), opts.seed);
  const BoundaryWeight initial = c.contains("initial") ? parse_weight(c.at("initial"), "initial") : default_initial();
  const OptimizationResult r = minimize(params, cfg, initial);

  if (out.wants("csv")) {
    auto trace = out.csv("trace.csv", {"iteration", "E", "subgrad_norm", "kink_gap", "step", "sigma_bar1", "sigma_bar2"});
    for (const auto& row : r.trace)
      trace.cell(static_cast<long long>(row.iteration)).cell(row.E).cell(row.subgrad_norm).cell(row.kink_gap)
          .cell(row.step).cell(row.sigma_bar1).cell(row.sigma_bar2).end_row();
    out.close(trace, "trace.csv");
    auto coeffs = out.csv("coeffs.csv", {"k", "c_k"});
    for (std::size_t k = 0; k < r.coeffs.size(); ++k) coeffs.cell(static_cast<long long>(k + 1)).cell(r.coeffs[k]).end_row();
    out.close(coeffs, "coeffs.csv");
  }
  if (out.wants("json")) out.write("optimize.json", result_json(r, params));
  return optimize_violations(r, cfg);
}

Violations cmd_sweep(const json& c, const Output& out, const RunOptions& opts) {
  check_object(c, "config", {"s", "t_grid", "optimizer", "initial", "formats"});
  const double s = get_double(c, "s", 1.0, "config");
  const std::vector<double> grid = get_doubles(c, "t_grid", {5.0, 8.0, 12.0, 20.0, 40.0}, "config");
  const OptimizerConfig cfg = parse_optimizer(c.value("optimizer", json::object()), opts.seed);
  const BoundaryWeight initial = c.contains("initial") ? parse_weight(c.at("initial"), "initial") : default_initial();
  const SweepResult res = sweep_t(s, grid, cfg, initial);

  Violations v;
  for (const auto& row : res.rows)
    if (!row.monotone) v.push_back("monotonicity broken at t=" + fmt(row.t));
  if (out.wants("csv")) {
    auto csv = out.csv("sweep.csv", {"t", "sigma_bar1", "sigma_bar2", "p", "L", "E", "subgrad_norm", "energy_ratio",
                                     "gap_to_4pi", "converged", "monotone", "planar", "status"});
    for (const auto& row : res.rows)
      csv.cell(row.t).cell(row.sigma_bar1).cell(row.sigma_bar2).cell(row.p).cell(row.L).cell(row.E)
          .cell(row.subgrad_norm).cell(row.energy_ratio).cell(row.gap_to_4pi)
          .cell(static_cast<long long>(row.converged)).cell(static_cast<long long>(row.monotone))
          .cell(static_cast<long long>(row.planar)).cell(row.status).end_row();
    out.close(csv, "sweep.csv");
  }
  if (out.wants("json")) {
    json rows = json::array();
    for (std::size_t i = 0; i < res.results.size(); ++i) {
      json r = result_json(res.results[i], FunctionalParams(s, grid[i]));
      r["monotone"] = res.rows[i].monotone;
      rows.push_back(std::move(r));
    }
    out.write("sweep.json", json{{"s", s}, {"t_grid", grid}, {"all_monotone", res.all_monotone}, {"rows", rows}});
  }
  return v;
}

Violations cmd_testfamily(const json& c, const Output& out, const RunOptions& opts) {
  check_object(c, "config", {"eps_grid", "N", "formats"});
  const std::vector<double> grid = get_doubles(c, "eps_grid", {0.003, 0.01, 0.03}, "config");
  check_monotone(grid, "eps_grid");
  for (double e : grid)
    if (!(e > 0.0 && e < 1.0)) fail(ErrorKind::config, "eps_grid entries must lie in (0, 1)");
  const std::size_t N = get_size(c, "N", 0, "config");

  std::vector<TestFamilyRow> rows(grid.size());
  parallel_for(grid.size(), opts.threads, [&](std::size_t i) { rows[i] = test_family_row(grid[i], N); });
  const Sigma1Fit f1 = fit_sigma1(rows);
  const Sigma2Fit f2 = fit_sigma2(rows);

  Violations v;
  for (const auto& r : rows)
    if (!r.ok) v.push_back("epsilon=" + fmt(r.epsilon) + ": " + r.failure);
  if (out.wants("csv")) {
    auto csv = out.csv("testfamily.csv", {"epsilon", "N", "length", "sigma_bar1", "sigma_bar2", "sigma_bar1_log",
                                          "gap_over_eps", "rq1", "rq2", "block1", "block2", "ok"});
    for (const auto& r : rows) {
      const double l = std::log(1.0 / r.epsilon);
      csv.cell(r.epsilon).cell(static_cast<long long>(r.N)).cell(r.length).cell(r.sigma_bar1).cell(r.sigma_bar2)
          .cell(r.sigma_bar1 * l).cell((4.0 * kPi - r.sigma_bar2) / r.epsilon).cell(r.bounds.rq1).cell(r.bounds.rq2)
          .cell(std::string(to_string(r.block1))).cell(std::string(to_string(r.block2)))
          .cell(static_cast<long long>(r.ok)).end_row();
    }
    out.close(csv, "testfamily.csv");
  }
  if (out.wants("json")) {
    auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
    json j{{"eps_grid", grid},
           {"sigma1_fit", {{"c1", opt(f1.c1)}, {"c2", opt(f1.c2)}}},
           {"sigma2_slope", opt(f2.slope)},
           {"sigma2_slope_reference", -16.0 * kPi},
           {"failures", v}};
    j["sigma2_slope_relative_error"] = f2.slope ? json(std::abs(*f2.slope / (-16.0 * kPi) - 1.0)) : json(nullptr);
    out.write("testfamily.json", j);
  }
  return v;
}

Violations cmd_ellipse(const json& c, const Output& out, const RunOptions& opts) {
  check_object(c, "config", {"p_grid", "N", "k_max", "formats"});
  const std::vector<double> grid = get_doubles(c, "p_grid", {0.4, 0.6, 0.8}, "config");
  check_monotone(grid, "p_grid");
  const std::size_t N = get_size(c, "N", 0, "config");
  const std::size_t k_max = get_size(c, "k_max", 8, "config");

  std::vector<IndexResult> res(grid.size());
  parallel_for(grid.size(), opts.threads, [&](std::size_t i) { res[i] = compute_indices(grid[i], N, k_max); });

  if (out.wants("csv")) {
    auto csv = out.csv("ellipse.csv", {"p", "k1", "k2", "sigma_bar_low", "sigma_bar_high", "expected_low",
                                       "expected_high", "correlation_low", "correlation_high", "map_residual", "N"});
    for (const auto& r : res)
      csv.cell(r.p).cell(static_cast<long long>(r.k1)).cell(static_cast<long long>(r.k2)).cell(r.sigma_bar_low)
          .cell(r.sigma_bar_high).cell(r.expected_low).cell(r.expected_high).cell(r.correlation_low)
          .cell(r.correlation_high).cell(r.map_residual).cell(static_cast<long long>(r.N)).end_row();
    out.close(csv, "ellipse.csv");
  }
  if (out.wants("json")) {
    json rows = json::array();
    for (const auto& r : res)
      rows.push_back(json{{"p", r.p},
                          {"k1", r.k1},
                          {"k2", r.k2},
                          {"sigma_bar_low", r.sigma_bar_low},
                          {"sigma_bar_high", r.sigma_bar_high},
                          {"product_over_4pi2", r.sigma_bar_low * r.sigma_bar_high / (4.0 * kPi * kPi)},
                          {"N", r.N},
                          {"sigmas", r.sigmas}});
    out.write("ellipse.json", json{{"rows", rows}});
  }
  return {};
}

Violations cmd_thetastar(const json& c, const Output& out) {
  check_object(c, "config", {"tolerance", "scan_step", "formats"});
  const double tol = get_double(c, "tolerance", 0.05, "config");
  const double step = get_double(c, "scan_step", 0.1, "config");
  const ThetaStarEstimate est = estimate_theta_star(tol, step);
  auto pairs = [](const std::vector<std::pair<double, int>>& v) {
    json a = json::array();
    for (const auto& [ratio, k2] : v) a.push_back(json{ratio, k2});
    return a;
  };
  if (out.wants("csv")) {
    auto csv = out.csv("thetastar_scan.csv", {"ratio", "k2"});
    for (const auto& [ratio, k2] : est.scan) csv.cell(ratio).cell(static_cast<long long>(k2)).end_row();
    out.close(csv, "thetastar_scan.csv");
  }
  if (out.wants("json"))
    out.write("thetastar.json", json{{"bracket_lo", est.bracket_lo},
                                     {"bracket_hi", est.bracket_hi},
                                     {"transitions", pairs(est.transitions)},
                                     {"multivalued", est.multivalued},
                                     {"tolerance", tol},
                                     {"scan_step", step}});
  return {};
}

Violations cmd_export(const json& c, const Output& out, const RunOptions& opts) {
  check_object(c, "config", {"params", "optimizer", "initial", "coeffs", "solver_N", "resolution", "formats"});
  const FunctionalParams params = parse_params(c.value("params", json{{"s", 1.0}, {"t", 8.0}}));
  const std::size_t res = get_size(c, "resolution", 32, "config");
  if (res < 2) fail(ErrorKind::config, "config.resolution must be at least 2");

  std::optional<Immersion> im;
  Violations v;
  if (c.contains("coeffs")) {
    const std::vector<double> coeffs = get_doubles(c, "coeffs", {}, "config");
    const std::size_t N = get_size(c, "solver_N", std::max<std::size_t>(4 * coeffs.size(), 64), "config");
    const SteklovSpectrum spec = solve_spectrum(weight_from_coeffs(coeffs, N), N, 8);
    v = spectrum_invariant_violations(spec);
    im = build_immersion(spec);
  } else {
    const OptimizerConfig cfg = parse_optimizer(c.value("optimizer", json::object()), opts.seed);
    const BoundaryWeight initial = c.contains("initial") ? parse_weight(c.at("initial"), "initial") : default_initial();
    OptimizationResult r = minimize(params, cfg, initial);
    if (!r.immersion) fail(ErrorKind::dependency, "no immersion available: " + r.message);
    v = optimize_violations(r, cfg);
    im = std::move(r.immersion);
  }

  const std::string obj = out.path("surface.obj"), csv = out.path("boundary.csv");
  if (out.wants("obj") || out.wants("csv")) {
    export_surface(*im, res, obj, csv, provenance_line(out.hash()).substr(2));
    for (const auto& [fmt_name, path] : {std::pair{"obj", obj}, std::pair{"csv", csv}}) {
      if (out.wants(fmt_name)) {
        std::cout << "wrote " << path << "\n";
      } else {
        std::error_code ec;
        std::filesystem::remove(path, ec);
      }
    }
  }
  if (out.wants("json")) out.write("diagnostics.json", diagnostics_json(*im, params));
  return v;
}

}  // namespace

int run(const RunOptions& opts) {
  if (opts.command == "selftest") return selftest(opts);
  const json& c = opts.config;
  if (!c.is_object()) fail(ErrorKind::config, "config must be a JSON object");
  std::vector<std::string> formats{"csv", "json", "obj"};
  if (c.contains("formats")) {
    const json& f = c.at("formats");
    if (!f.is_array()) fail(ErrorKind::config, "config.formats must be an array");
    formats.clear();
    for (const auto& x : f) {
      if (!x.is_string() || (x != "csv" && x != "json" && x != "obj"))
        fail(ErrorKind::config, "config.formats entries must be csv, json or obj");
      formats.push_back(x.get<std::string>());
    }
  }
  const json identity{{"command", opts.command},
                      {"config", c},
                      {"seed", opts.seed ? json(*opts.seed) : json(nullptr)}};
  const Output out(opts.out_dir, config_hash(identity), formats);

  Violations v;
  if (opts.command == "spectrum") v = cmd_spectrum(c, out);
  else if (opts.command == "optimize") v = cmd_optimize(c, out, opts);
  else if (opts.command == "sweep") v = cmd_sweep(c, out, opts);
  else if (opts.command == "testfamily") v = cmd_testfamily(c, out, opts);
  else if (opts.command == "ellipse") v = cmd_ellipse(c, out, opts);
  else if (opts.command == "thetastar") v = cmd_thetastar(c, out);
  else if (opts.command == "export") v = cmd_export(c, out, opts);
  else fail(ErrorKind::config, "unknown command " + opts.command);

  if (v.empty()) return 0;
  std::string msg;
  for (const auto& s : v) msg += (msg.empty() ? "" : "; ") + s;
  std::cerr << error_record(ErrorKind::invariant, msg) << "\n";
  return exit_code(ErrorKind::invariant);
}

}  // namespace steklov::cli
