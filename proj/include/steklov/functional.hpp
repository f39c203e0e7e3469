#pragma once

#include <utility>

#include "steklov/steklov_solver.hpp"
#include "steklov/trig_series.hpp"

namespace steklov {

struct FunctionalParams {
  double s = 1.0;
  double t = 1.0;
  FunctionalParams() = default;
  FunctionalParams(double s_, double t_);
};

// psi = sum_i d_i sigma_bar_i (1/L - phi_i^2); dE = int psi dv w dtheta.
struct SubgradientDirection {
  TrigSeries direction;
  double d1 = 0.0;
  double d2 = 0.0;
};

// (x^-s + t y^-s)^(1/s)
double h_value(const FunctionalParams& p, double x, double y);
std::pair<double, double> h_partials(const FunctionalParams& p, double x, double y);

struct EValue {
  double value = 0.0;
  SteklovSpectrum spectrum;
};

EValue evaluate_E(const BoundaryWeight& weight, const FunctionalParams& p, std::size_t N,
                  std::size_t k_max = 8);

// Multiplets of sigma_1 and sigma_2 are replaced by the average of phi^2 over
// a w-orthonormal basis of the eigenspace.
SubgradientDirection subgradient(const BoundaryWeight& weight, const SteklovSpectrum& spectrum,
                                 const FunctionalParams& p);

// int psi dv w dtheta
double directional_derivative(const SubgradientDirection& g, const BoundaryWeight& weight,
                              const TrigSeries& dv);

enum class Phase { flat_excluded, elongated_ellipse_excluded, nonplanar_forced, inconclusive };
const char* to_string(Phase p);

Phase phase_classify(const FunctionalParams& p, double theta_star);

// Targets of the two boundary mass fractions at a critical weight:
// (a^-s / f, t b^-s / f) with f = a^-s + t b^-s. They sum to one.
std::pair<double, double> mass_fraction_targets(const FunctionalParams& p, double a, double b);

}  // namespace steklov
