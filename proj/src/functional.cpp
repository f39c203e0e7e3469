#include "steklov/functional.hpp"

#include <cmath>
#include <numbers>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

// Average of phi^2 over the multiplet containing index k.
TrigSeries multiplet_square(const SteklovSpectrum& spec, std::size_t k, std::size_t n) {
  const auto idx = spec.multiplet(k);
  if (idx.back() + 1 >= spec.size() && spec.size() < spec.N)
    fail(ErrorKind::staleness, "eigenvalue multiplet reaches the end of the computed spectrum");
  std::size_t deg = 0;
  for (auto i : idx) deg = std::max(deg, spec.eigen_traces[i].n_modes());
  std::vector<double> acc(n, 0.0);
  for (auto i : idx) {
    const auto v = evaluate_grid(spec.eigen_traces[i], n);
    for (std::size_t j = 0; j < n; ++j) acc[j] += v[j] * v[j];
  }
  for (auto& x : acc) x /= static_cast<double>(idx.size());
  return project_samples(acc, 2 * deg);
}

}  // namespace

FunctionalParams::FunctionalParams(double s_, double t_) : s(s_), t(t_) {
  if (!(s != 0.0) || !std::isfinite(s)) fail(ErrorKind::input_domain, "s must be nonzero");
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorKind::input_domain, "t must be positive");
}

double h_value(const FunctionalParams& p, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) fail(ErrorKind::input_domain, "h requires positive eigenvalues");
  return std::pow(std::pow(x, -p.s) + p.t * std::pow(y, -p.s), 1.0 / p.s);
}

std::pair<double, double> h_partials(const FunctionalParams& p, double x, double y) {
  const double h = h_value(p, x, y);
  const double c = std::pow(h, 1.0 - p.s);
  return {-c * std::pow(x, -p.s - 1.0), -c * p.t * std::pow(y, -p.s - 1.0)};
}

EValue evaluate_E(const BoundaryWeight& weight, const FunctionalParams& p, std::size_t N,
                  std::size_t k_max) {
  EValue e;
  e.spectrum = solve_spectrum(weight, N, k_max);
  e.value = h_value(p, e.spectrum.normalized.at(1), e.spectrum.normalized.at(2));
  return e;
}

SubgradientDirection subgradient(const BoundaryWeight& weight, const SteklovSpectrum& spec,
                                 const FunctionalParams& p) {
  if (spec.size() < 3) fail(ErrorKind::staleness, "subgradient needs sigma_1 and sigma_2");
  const auto& wa = weight.density;
  const auto& wb = spec.weight.density;
  const std::size_t m = std::max(wa.n_modes(), wb.n_modes());
  for (std::size_t k = 0; k <= m; ++k)
    if (std::abs(wa.a(k) - wb.a(k)) + std::abs(wa.b(k) - wb.b(k)) > 1e-12 * (1.0 + std::abs(wa.a(0))))
      fail(ErrorKind::staleness, "spectrum was computed for a different weight");
  const double L = spec.L;
  const double s1 = spec.normalized[1], s2 = spec.normalized[2];
  const auto [d1, d2] = h_partials(p, s1, s2);
  std::size_t deg = 0;
  for (const auto& tr : spec.eigen_traces) deg = std::max(deg, tr.n_modes());
  std::size_t n = 4;
  while (n <= 4 * deg + 2) n <<= 1;
  const TrigSeries q1 = multiplet_square(spec, 1, n);
  const TrigSeries q2 = multiplet_square(spec, 2, n);
  TrigSeries psi = TrigSeries::constant((d1 * s1 + d2 * s2) / L);
  psi -= q1 * (d1 * s1);
  psi -= q2 * (d2 * s2);
  return {psi, d1, d2};
}

double directional_derivative(const SubgradientDirection& g, const BoundaryWeight& weight,
                              const TrigSeries& dv) {
  return weighted_inner(g.direction, dv, weight.density);
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::flat_excluded: return "flat_excluded";
    case Phase::elongated_ellipse_excluded: return "elongated_ellipse_excluded";
    case Phase::nonplanar_forced: return "nonplanar_forced";
    case Phase::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Phase phase_classify(const FunctionalParams& p, double theta_star) {
  if (!(theta_star > 1.0 && theta_star <= 4.0))
    fail(ErrorKind::input_domain, "theta_star must lie in (1, 4]");
  if (p.s > 0.0) {
    if (p.t > std::pow(theta_star, p.s)) return Phase::nonplanar_forced;
    if (p.t > 1.0) return Phase::flat_excluded;
    return Phase::inconclusive;
  }
  if (p.t >= 1.0 / (std::pow(2.0, -p.s) - 1.0)) return Phase::nonplanar_forced;
  return Phase::elongated_ellipse_excluded;
}

std::pair<double, double> mass_fraction_targets(const FunctionalParams& p, double a, double b) {
  const double x = std::pow(a, -p.s), y = p.t * std::pow(b, -p.s);
  return {x / (x + y), y / (x + y)};
}

}  // namespace steklov
