#pragma once

#include <string>
#include <vector>

#include "steklov/steklov_solver.hpp"

namespace steklov {

// Conformal map f(z) = sum_j c_j z^(2j+1) of the disk onto {p x^2 + y^2 < 1},
// with f(1) = 1/sqrt(p) and f'(0) > 0.
struct EllipseProblem {
  double p = 1.0;
  double a = 1.0;                    // semi-axis along x, 1/sqrt(p)
  double b = 1.0;                    // semi-axis along y
  std::vector<double> map_coeffs;    // c_0, c_1, ... multiplying z, z^3, ...
  std::size_t map_degree = 0;        // number of odd modes M
  double fit_residual = 0.0;         // max |p X^2 + Y^2 - 1| on the boundary
  double min_derivative = 0.0;       // min |f'| on the boundary
  std::vector<double> conj_coeffs;   // boundary correspondence theta(nu) = arg + sum g_k sin 2k nu

  double theta_of_nu(double nu) const;
  double dtheta_dnu(double nu) const;
  double nu_of_theta(double theta) const;
  // f(e^{i theta}) from the truncated series and from the exact correspondence
  std::pair<double, double> map_boundary(double theta) const;
  std::pair<double, double> exact_boundary(double theta) const;
  double map_area() const;  // int_D |f'|^2
};

EllipseProblem conformal_map(double p, std::size_t M);
// Doubles M from 16 until the fit residual is at most tol.
EllipseProblem conformal_map_auto(double p, double tol = 1e-8, std::size_t M_limit = 8192);

// w(theta) = (p^2 X^2 + Y^2)^(-1/2) |f'(e^{i theta})|, evaluated through the
// boundary correspondence; N = 0 picks the degree from the coefficient decay.
BoundaryWeight pullback_weight(const EllipseProblem& problem, std::size_t N = 0);
// Same formula evaluated with the truncated map series (for cross-checks).
BoundaryWeight pullback_weight_from_series(const EllipseProblem& problem, std::size_t N);
std::size_t pullback_resolution(const EllipseProblem& problem);

// Boundary traces of X o f and Y o f.
TrigSeries coordinate_trace_x(const EllipseProblem& problem, std::size_t N);
TrigSeries coordinate_trace_y(const EllipseProblem& problem, std::size_t N);
// max |DtN u - sigma w u| / max |sigma w u| for a boundary trace.
double steklov_residual(const TrigSeries& trace, double sigma, const BoundaryWeight& weight);

struct IndexResult {
  double p = 1.0;
  int k1 = 0;
  int k2 = 0;
  double sigma_bar_low = 0.0;       // computed sigma_bar_{k1}
  double sigma_bar_high = 0.0;      // computed sigma_bar_{k2}
  double expected_low = 0.0;        // 2 pi sqrt p
  double expected_high = 0.0;       // 2 pi / sqrt p
  double correlation_low = 0.0;
  double correlation_high = 0.0;
  double map_residual = 0.0;
  std::size_t N = 0;
  std::vector<double> sigmas;
};

// Index of the eigenvalues p and 1 in the pulled-back spectrum, matched by value
// (relative 1e-5) and by correlation >= 0.99 with the pulled-back coordinates.
IndexResult compute_indices(double p, std::size_t N = 0, std::size_t k_max = 8);

struct ThetaStarEstimate {
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::vector<std::pair<double, int>> scan;         // (1/p, k2)
  std::vector<std::pair<double, int>> transitions;  // ratio at which k2 changes, new value
  bool multivalued = false;
};

// Smallest 1/p beyond which k2 >= 3, by a scan of (1, 4.5] and bisection.
ThetaStarEstimate estimate_theta_star(double tolerance, double scan_step = 0.1);

}  // namespace steklov
