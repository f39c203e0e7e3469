#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steklov/functional.hpp"
#include "steklov/immersion.hpp"
#include "steklov/steklov_solver.hpp"

namespace steklov {

struct OptimizerConfig {
  std::size_t n_modes = 32;      // cos 2k theta coefficients of v, k = 1..n_modes
  std::size_t solver_N = 0;      // 0: 4 n_modes (at least 64)
  std::size_t max_iters = 200;
  double step_init = 0.5;        // initial proximal step
  double armijo_factor = 1e-4;
  double grad_tol = 1e-7;
  double mass_tol = 1e-3;
  std::uint64_t seed = 0;        // perturbation used to leave a degenerate first eigenvalue
  bool newton = true;            // curvature from finite-difference branch Hessians

  std::size_t effective_N() const;
  void validate() const;         // config error on violation
};

struct TraceRow {
  std::size_t iteration = 0;
  double E = 0.0, subgrad_norm = 0.0, kink_gap = 0.0, step = 0.0;
  double sigma_bar1 = 0.0, sigma_bar2 = 0.0;
};

struct OptimizationResult {
  BoundaryWeight weight;         // normalized to total length 2 pi
  SteklovSpectrum spectrum;
  std::vector<double> coeffs;    // c_1..c_n of v = c_0 + sum c_k cos 2k theta
  std::vector<double> objective_trace;
  std::vector<TraceRow> trace;
  double E = 0.0;
  double subgrad_norm = 0.0;     // min-norm element of the active piece hull
  double kink_gap = 0.0;         // spread of the active piece values
  std::pair<double, double> mass_residuals{0.0, 0.0};
  bool planarity_flag = false;
  double p = 1.0;                // sigma_bar_1 / sigma_bar_2
  double L = 0.0;                // sigma_bar_2
  std::size_t iterations = 0;
  bool converged = false;
  std::string status;            // converged, max_iters, stalled, solver_failure
  std::string message;
  std::optional<Immersion> immersion;
};

// v = c_0 + sum_k c_k cos 2k theta with c_0 fixing the total length at 2 pi.
BoundaryWeight weight_from_coeffs(const std::vector<double>& c, std::size_t N);
// Least-squares cos 2k theta coefficients (k = 1..n) of log w.
std::vector<double> coeffs_from_weight(const BoundaryWeight& w, std::size_t n);

OptimizationResult minimize(const FunctionalParams& params, const OptimizerConfig& config,
                            const BoundaryWeight& initial);

// Relative mass-condition deviations of the result's immersion.
std::pair<double, double> criticality_residuals(const OptimizationResult& result,
                                                const FunctionalParams& params);

struct SweepRow {
  double t = 0.0;
  double sigma_bar1 = 0.0, sigma_bar2 = 0.0, p = 0.0, L = 0.0, E = 0.0;
  double subgrad_norm = 0.0;
  double energy_ratio = 0.0;     // sigma_bar_1 ln t / (2 pi)
  double gap_to_4pi = 0.0;       // 4 pi - L
  bool converged = false;
  bool monotone = true;          // sigma_bar_1 non-increasing, L non-decreasing vs previous row
  bool planar = false;
  std::string status;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<OptimizationResult> results;
  bool all_monotone = true;
};

SweepResult sweep_t(double s, const std::vector<double>& t_grid, const OptimizerConfig& config,
                    const BoundaryWeight& initial);

}  // namespace steklov
