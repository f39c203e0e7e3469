#include "steklov/test_metrics.hpp"

#include <cmath>
#include <numbers>

#include "steklov/errors.hpp"

namespace steklov {

namespace {
constexpr double kPi = std::numbers::pi;

double beta_of(double eps) { return (1.0 + eps) / (1.0 - eps); }

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::input_domain, "epsilon must lie in (0,1)");
}
}  // namespace

double omega_eps_density(double eps, double t) {
  const double b = beta_of(eps);
  const double c = std::cos(t);
  const double num = b * b - 1.0;
  return num / (b * b - 2.0 * b * c + 1.0) + num / (b * b + 2.0 * b * c + 1.0);
}

std::size_t omega_eps_min_N(double eps) {
  check_eps(eps);
  return static_cast<std::size_t>(std::ceil(8.0 / eps - 1e-9));
}

TestFamilyPoint omega_eps_weight(double eps, std::size_t N) {
  check_eps(eps);
  if (N < omega_eps_min_N(eps))
    fail(ErrorKind::resolution, "N=" + std::to_string(N) + " below the resolution rule N >= 8/epsilon = " +
                                    std::to_string(omega_eps_min_N(eps)));
  TestFamilyPoint p;
  p.epsilon = eps;
  p.beta = beta_of(eps);
  p.N = N;
  TrigSeries d = project([eps](double t) { return omega_eps_density(eps, t); }, 2 * N);
  std::vector<double> a = d.cos_coeffs();
  for (std::size_t k = 1; k < a.size(); k += 2) a[k] = 0.0;
  p.weight = BoundaryWeight::from_density(TrigSeries(std::move(a), {}));
  if (p.weight.symmetry_class != Parity::even_both)
    fail(ErrorKind::symmetry, "test family weight lost its symmetry");
  if (std::abs(p.weight.length() - 4.0 * kPi) > 1e-9)
    fail(ErrorKind::invariant, "test family total length differs from 4 pi");
  return p;
}

RayleighBounds rayleigh_upper_bounds(const TestFamilyPoint& pt) {
  const double eps = pt.epsilon, b = pt.beta;
  RayleighBounds r;
  // log cut-off in the half-plane chart x = tan(theta/2)
  const double le = std::log(eps);
  PiecewiseTrial f1;
  f1.dirichlet_energy = 2.0 * kPi / std::log(1.0 / eps);
  f1.boundary = [le, eps](double t) {
    const double x = std::abs(std::tan(0.5 * t));
    if (x < eps) return 1.0;
    if (x > 1.0 / eps) return -1.0;
    return std::log(x) / le;
  };
  const double t_in = 2.0 * std::atan(eps), t_out = 2.0 * std::atan(1.0 / eps);
  f1.breakpoints = {t_in, t_out, 2.0 * kPi - t_out, 2.0 * kPi - t_in, kPi};
  for (double s : {0.5, 2.0, 10.0}) {
    f1.breakpoints.push_back(std::min(s * eps, 1.0));
    f1.breakpoints.push_back(2.0 * kPi - std::min(s * eps, 1.0));
    f1.breakpoints.push_back(kPi - std::min(s * eps, 1.0));
    f1.breakpoints.push_back(kPi + std::min(s * eps, 1.0));
  }
  r.rq1 = rayleigh_quotient(f1, pt.weight);
  // sqrt(b^2-1) Im(1/(b - z)) on the circle
  PiecewiseTrial f2;
  f2.dirichlet_energy = kPi / (b * b - 1.0);
  const double sc = std::sqrt(b * b - 1.0);
  f2.boundary = [b, sc](double t) { return sc * std::sin(t) / (b * b - 2.0 * b * std::cos(t) + 1.0); };
  f2.breakpoints = {kPi};
  for (double s : {0.5, 2.0, 10.0, 50.0}) {
    f2.breakpoints.push_back(std::min(s * eps, 1.0));
    f2.breakpoints.push_back(2.0 * kPi - std::min(s * eps, 1.0));
  }
  r.rq2 = rayleigh_quotient(f2, pt.weight);
  return r;
}

RayleighBounds rayleigh_upper_bounds(double eps) {
  return rayleigh_upper_bounds(omega_eps_weight(eps, omega_eps_min_N(eps)));
}

TestFamilyRow test_family_row(double eps, std::size_t N) {
  TestFamilyRow row;
  row.epsilon = eps;
  try {
    if (N == 0) N = omega_eps_min_N(eps);
    row.N = N;
    const TestFamilyPoint pt = omega_eps_weight(eps, N);
    const SteklovSpectrum s = solve_spectrum(pt.weight, N, 4, {true, 3});
    row.length = s.L;
    row.sigma1 = s.sigmas[1];
    row.sigma2 = s.sigmas[2];
    row.sigma_bar1 = s.normalized[1];
    row.sigma_bar2 = s.normalized[2];
    row.block1 = s.blocks[1];
    row.block2 = s.blocks[2];
    row.bounds = rayleigh_upper_bounds(pt);
    if (row.sigma1 > row.bounds.rq1 * (1.0 + 1e-12)) {
      row.ok = false;
      row.failure = "sigma_1 above its Rayleigh bound";
    }
    if (row.sigma2 > std::max(row.bounds.rq1, row.bounds.rq2) * (1.0 + 1e-12)) {
      row.ok = false;
      row.failure = "sigma_2 above its Rayleigh bound";
    }
  } catch (const Error& e) {
    row.ok = false;
    row.failure = e.what();
  }
  return row;
}

Sigma1Fit fit_sigma1(std::vector<TestFamilyRow> rows) {
  Sigma1Fit f;
  f.rows = std::move(rows);
  std::vector<double> x, y;
  for (const auto& r : f.rows) {
    if (!r.ok) continue;
    const double l = std::log(1.0 / r.epsilon);
    x.push_back(1.0 / l);
    y.push_back(r.sigma_bar1 * l);
  }
  if (x.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double c2 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.c2 = c2;
    f.c1 = (sy - c2 * sx) / n;
  }
  return f;
}

Sigma2Fit fit_sigma2(std::vector<TestFamilyRow> rows) {
  Sigma2Fit f;
  f.rows = std::move(rows);
  double num = 0, den = 0;
  std::size_t n = 0;
  for (const auto& r : f.rows) {
    if (!r.ok) continue;
    num += r.epsilon * (r.sigma_bar2 - 4.0 * kPi);
    den += r.epsilon * r.epsilon;
    ++n;
  }
  if (n >= 1 && f.rows.size() >= 2) f.slope = num / den;
  return f;
}

Sigma1Fit asymptotics_sigma1(const std::vector<double>& grid) {
  std::vector<TestFamilyRow> rows;
  for (double e : grid) rows.push_back(test_family_row(e));
  return fit_sigma1(std::move(rows));
}

Sigma2Fit asymptotics_sigma2(const std::vector<double>& grid) {
  std::vector<TestFamilyRow> rows;
  for (double e : grid) rows.push_back(test_family_row(e));
  return fit_sigma2(std::move(rows));
}

}  // namespace steklov
