#include "steklov/ellipse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t pow2_at_least(std::size_t n) {
  std::size_t p = 4;
  while (p < n) p <<= 1;
  return p;
}

// Odd power-series coefficients and fit diagnostics for M modes.
EllipseProblem build_map(double p, std::size_t M) {
  if (!(p > 0.0 && p <= 1.0)) fail(ErrorKind::input_domain, "ellipse parameter p must lie in (0, 1]");
  if (M < 16) fail(ErrorKind::input_domain, "map degree must be at least 16");
  EllipseProblem e;
  e.p = p;
  e.a = 1.0 / std::sqrt(p);
  e.b = 1.0;
  // log|w| on the boundary = const + sum_k (-1)^(k+1) r^k / k cos 2k nu; its
  // conjugate inside the ellipse carries the factor tanh(2k mu_0).
  const double A = 0.5 * (e.a * e.a + e.b * e.b), B = 0.5 * (e.a * e.a - e.b * e.b);
  const double r = B / (A + std::sqrt(A * A - B * B));
  const double mu0 = p < 1.0 ? std::atanh(e.b / e.a) : 0.0;
  double rk = 1.0;
  for (std::size_t k = 1; r > 0.0; ++k) {
    rk *= r;
    const double term = rk / static_cast<double>(k);
    if (term < 1e-18) break;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    e.conj_coeffs.push_back(-sign * term * std::tanh(2.0 * static_cast<double>(k) * mu0));
  }
  const std::size_t n = pow2_at_least(std::max<std::size_t>(16 * M, 4096));
  std::vector<double> X(n), Y(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto [x, y] = e.exact_boundary(2.0 * kPi * static_cast<double>(j) / static_cast<double>(n));
    X[j] = x;
    Y[j] = y;
  }
  const TrigSeries xs = project_samples(X, 2 * M);
  const TrigSeries ys = project_samples(Y, 2 * M);
  e.map_degree = M;
  e.map_coeffs.resize(M);
  for (std::size_t j = 0; j < M; ++j) e.map_coeffs[j] = 0.5 * (xs.a(2 * j + 1) + ys.b(2 * j + 1));

  std::vector<double> ca(2 * M + 1, 0.0), sb(2 * M + 1, 0.0), dca(2 * M + 1, 0.0), dsb(2 * M + 1, 0.0);
  for (std::size_t j = 0; j < M; ++j) {
    const double m = static_cast<double>(2 * j + 1);
    ca[2 * j + 1] = e.map_coeffs[j];
    sb[2 * j + 1] = e.map_coeffs[j];
    dca[2 * j + 1] = m * e.map_coeffs[j];
    dsb[2 * j + 1] = m * e.map_coeffs[j];
  }
  const std::size_t ns = pow2_at_least(std::max<std::size_t>(8 * M, 4096));
  const auto Xs = evaluate_grid(TrigSeries(ca, std::vector<double>(2 * M + 1, 0.0)), ns);
  const auto Ys = evaluate_grid(TrigSeries(std::vector<double>(2 * M + 1, 0.0), sb), ns);
  const auto Dx = evaluate_grid(TrigSeries(dca, std::vector<double>(2 * M + 1, 0.0)), ns);
  const auto Dy = evaluate_grid(TrigSeries(std::vector<double>(2 * M + 1, 0.0), dsb), ns);
  e.fit_residual = 0.0;
  e.min_derivative = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ns; ++j) {
    e.fit_residual = std::max(e.fit_residual, std::abs(p * Xs[j] * Xs[j] + Ys[j] * Ys[j] - 1.0));
    e.min_derivative = std::min(e.min_derivative, std::hypot(Dx[j], Dy[j]));
  }
  return e;
}

}  // namespace

double EllipseProblem::theta_of_nu(double nu) const {
  const double c = std::cos(nu), s = std::sin(nu);
  double t = nu + std::atan2((b - a) * s * c, a * c * c + b * s * s);
  for (std::size_t k = 0; k < conj_coeffs.size(); ++k)
    t += conj_coeffs[k] * std::sin(2.0 * static_cast<double>(k + 1) * nu);
  return t;
}

double EllipseProblem::dtheta_dnu(double nu) const {
  const double c = std::cos(nu), s = std::sin(nu);
  double d = a * b / (a * a * c * c + b * b * s * s);
  for (std::size_t k = 0; k < conj_coeffs.size(); ++k) {
    const double m = 2.0 * static_cast<double>(k + 1);
    d += m * conj_coeffs[k] * std::cos(m * nu);
  }
  return d;
}

double EllipseProblem::nu_of_theta(double theta) const {
  double bound = 0.5 * kPi + 0.1;
  for (double g : conj_coeffs) bound += std::abs(g);
  double lo = theta - bound, hi = theta + bound;
  double nu = theta;
  for (int it = 0; it < 200; ++it) {
    const double f = theta_of_nu(nu) - theta;
    if (f > 0) hi = nu;
    else lo = nu;
    if (std::abs(f) < 1e-15 * (1.0 + std::abs(theta)) || hi - lo < 1e-15) break;
    double next = nu - f / dtheta_dnu(nu);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    nu = next;
  }
  return nu;
}

std::pair<double, double> EllipseProblem::exact_boundary(double theta) const {
  const double nu = nu_of_theta(theta);
  return {a * std::cos(nu), b * std::sin(nu)};
}

std::pair<double, double> EllipseProblem::map_boundary(double theta) const {
  double x = 0.0, y = 0.0;
  for (std::size_t j = 0; j < map_coeffs.size(); ++j) {
    const double m = static_cast<double>(2 * j + 1);
    x += map_coeffs[j] * std::cos(m * theta);
    y += map_coeffs[j] * std::sin(m * theta);
  }
  return {x, y};
}

double EllipseProblem::map_area() const {
  double s = 0.0;
  for (std::size_t j = 0; j < map_coeffs.size(); ++j)
    s += static_cast<double>(2 * j + 1) * map_coeffs[j] * map_coeffs[j];
  return kPi * s;
}

EllipseProblem conformal_map(double p, std::size_t M) {
  EllipseProblem e = build_map(p, M);
  if (!(e.fit_residual <= 1e-8))
    fail(ErrorKind::resolution, "conformal map fit residual " + std::to_string(e.fit_residual) +
                                    " exceeds 1e-8; increase the map degree");
  if (!(e.min_derivative > 0.0)) fail(ErrorKind::resolution, "conformal map derivative vanishes on the boundary");
  return e;
}

EllipseProblem conformal_map_auto(double p, double tol, std::size_t M_limit) {
  for (std::size_t M = 16; M <= M_limit; M *= 2) {
    EllipseProblem e = build_map(p, M);
    if (e.fit_residual <= tol && e.min_derivative > 0.0) return e;
  }
  fail(ErrorKind::resolution, "conformal map did not reach the fit tolerance below the degree limit");
}

std::size_t pullback_resolution(const EllipseProblem& e) {
  for (std::size_t n = 1024; n <= (1u << 20); n *= 2) {
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j)
      w[j] = 1.0 / (std::sqrt(e.p) * e.dtheta_dnu(e.nu_of_theta(2.0 * kPi * static_cast<double>(j) / static_cast<double>(n))));
    const TrigSeries s = project_samples(w, n / 2 - 1);
    const double thr = 1e-13 * s.a(0);
    std::size_t last = 0;
    for (std::size_t k = 0; k <= s.n_modes(); ++k)
      if (std::abs(s.a(k)) > thr) last = k;
    if (last < n / 4) return std::max<std::size_t>(32, last);
  }
  fail(ErrorKind::resolution, "pulled-back weight is not resolved");
}

BoundaryWeight pullback_weight(const EllipseProblem& e, std::size_t N) {
  if (!(e.fit_residual <= 1e-8)) fail(ErrorKind::staleness, "conformal map residual above threshold");
  if (N == 0) N = pullback_resolution(e);
  const std::size_t n = grid_size_for(2 * N);
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j)
    w[j] = 1.0 / (std::sqrt(e.p) * e.dtheta_dnu(e.nu_of_theta(2.0 * kPi * static_cast<double>(j) / static_cast<double>(n))));
  std::vector<double> a = project_samples(w, 2 * N).cos_coeffs();
  for (std::size_t k = 1; k < a.size(); k += 2) a[k] = 0.0;
  return BoundaryWeight::from_density(TrigSeries(std::move(a), {}));
}

BoundaryWeight pullback_weight_from_series(const EllipseProblem& e, std::size_t N) {
  const std::size_t n = grid_size_for(2 * N);
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
    double x = 0, y = 0, dx = 0, dy = 0;
    for (std::size_t q = 0; q < e.map_coeffs.size(); ++q) {
      const double m = static_cast<double>(2 * q + 1), c = e.map_coeffs[q];
      x += c * std::cos(m * t);
      y += c * std::sin(m * t);
      dx += m * c * std::cos(m * t);
      dy += m * c * std::sin(m * t);
    }
    w[j] = std::hypot(dx, dy) / std::sqrt(e.p * e.p * x * x + y * y);
  }
  std::vector<double> a = project_samples(w, 2 * N).cos_coeffs();
  for (std::size_t k = 1; k < a.size(); k += 2) a[k] = 0.0;
  return BoundaryWeight::from_density(TrigSeries(std::move(a), {}));
}

TrigSeries coordinate_trace_x(const EllipseProblem& e, std::size_t N) {
  const std::size_t n = grid_size_for(N);
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j)
    v[j] = e.a * std::cos(e.nu_of_theta(2.0 * kPi * static_cast<double>(j) / static_cast<double>(n)));
  return project_samples(v, N);
}

TrigSeries coordinate_trace_y(const EllipseProblem& e, std::size_t N) {
  const std::size_t n = grid_size_for(N);
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j)
    v[j] = e.b * std::sin(e.nu_of_theta(2.0 * kPi * static_cast<double>(j) / static_cast<double>(n)));
  return project_samples(v, N);
}

double steklov_residual(const TrigSeries& u, double sigma, const BoundaryWeight& weight) {
  std::vector<double> a(u.n_modes() + 1), b(u.n_modes() + 1);
  for (std::size_t k = 0; k <= u.n_modes(); ++k) {
    a[k] = static_cast<double>(k) * u.a(k);
    b[k] = static_cast<double>(k) * u.b(k);
  }
  const std::size_t n = grid_size_for(std::max(u.n_modes(), weight.density.n_modes()));
  const auto dtn = evaluate_grid(TrigSeries(std::move(a), std::move(b)), n);
  const auto uv = evaluate_grid(u, n);
  const auto wv = evaluate_grid(weight.density, n);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    num = std::max(num, std::abs(dtn[j] - sigma * wv[j] * uv[j]));
    den = std::max(den, std::abs(sigma * wv[j] * uv[j]));
  }
  return num / den;
}

IndexResult compute_indices(double p, std::size_t N, std::size_t k_max) {
  if (k_max < 8) fail(ErrorKind::input_domain, "index tracking needs k_max >= 8");
  const EllipseProblem e = conformal_map_auto(p);
  if (N == 0) N = std::max(pullback_resolution(e), k_max + 4);
  const BoundaryWeight w = pullback_weight(e, N);
  const SteklovSpectrum spec = solve_spectrum(w, N, k_max);
  const TrigSeries X = coordinate_trace_x(e, N), Y = coordinate_trace_y(e, N);
  IndexResult r;
  r.p = p;
  r.N = N;
  r.sigmas = spec.sigmas;
  r.map_residual = e.fit_residual;
  r.expected_low = 2.0 * kPi * std::sqrt(p);
  r.expected_high = 2.0 * kPi / std::sqrt(p);
  auto match = [&](double target, const TrigSeries& coord, double& corr) -> int {
    int first = -1;
    double proj = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
      if (std::abs(spec.sigmas[k] - target) > 1e-5 * target) continue;
      if (first < 0) first = static_cast<int>(k);
      const double c = weighted_inner(coord, spec.eigen_traces[k], w.density);
      proj += c * c;
    }
    if (first < 0)
      fail(ErrorKind::resolution, "no eigenvalue matches " + std::to_string(target) + " within 1e-5");
    corr = std::sqrt(proj / weighted_inner(coord, coord, w.density));
    if (corr < 0.99) fail(ErrorKind::resolution, "eigenfunction correlation below 0.99 at the matched eigenvalue");
    return first;
  };
  r.k1 = match(p, X, r.correlation_low);
  r.k2 = match(1.0, Y, r.correlation_high);
  r.sigma_bar_low = spec.normalized[static_cast<std::size_t>(r.k1)];
  r.sigma_bar_high = spec.normalized[static_cast<std::size_t>(r.k2)];
  return r;
}

ThetaStarEstimate estimate_theta_star(double tolerance, double scan_step) {
  if (!(tolerance > 0.0) || !(scan_step > 0.0)) fail(ErrorKind::input_domain, "tolerance and step must be positive");
  ThetaStarEstimate est;
  const double top = 4.5;
  for (std::size_t i = 1;; ++i) {
    const double ratio = 1.0 + scan_step * static_cast<double>(i);
    if (ratio > top + 1e-12) break;
    est.scan.emplace_back(ratio, compute_indices(1.0 / ratio).k2);
  }
  if (est.scan.empty()) fail(ErrorKind::input_domain, "scan step too large");
  for (std::size_t i = 1; i < est.scan.size(); ++i)
    if (est.scan[i].second != est.scan[i - 1].second) est.transitions.push_back(est.scan[i]);
  // last scan point with k2 < 3; every larger ratio has k2 >= 3
  std::ptrdiff_t last_low = -1;
  for (std::size_t i = 0; i < est.scan.size(); ++i)
    if (est.scan[i].second < 3) last_low = static_cast<std::ptrdiff_t>(i);
  for (std::ptrdiff_t i = 0; i < last_low; ++i)
    if (est.scan[static_cast<std::size_t>(i)].second >= 3) est.multivalued = true;
  if (last_low < 0) {
    est.bracket_lo = 1.0;
    est.bracket_hi = est.scan.front().first;
  } else if (static_cast<std::size_t>(last_low) + 1 == est.scan.size()) {
    fail(ErrorKind::resolution, "k2 stays below 3 across the scan range");
  } else {
    est.bracket_lo = est.scan[static_cast<std::size_t>(last_low)].first;
    est.bracket_hi = est.scan[static_cast<std::size_t>(last_low) + 1].first;
  }
  while (est.bracket_hi - est.bracket_lo > tolerance) {
    const double mid = 0.5 * (est.bracket_lo + est.bracket_hi);
    if (compute_indices(1.0 / mid).k2 >= 3) est.bracket_hi = mid;
    else est.bracket_lo = mid;
  }
  return est;
}

}  // namespace steklov
