// End-to-end acceptance checks. Prints one line per criterion and exits
// nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "steklov/ellipse.hpp"
#include "steklov/functional.hpp"
#include "steklov/immersion.hpp"
#include "steklov/linalg.hpp"
#include "steklov/optimizer.hpp"
#include "steklov/steklov_solver.hpp"
#include "steklov/test_metrics.hpp"

using namespace steklov;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a clause; failing clauses are listed in the detail.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// exp of a random cos 2k series, so the weight is positive and even in both axes.
BoundaryWeight random_even_weight(std::mt19937_64& rng, std::size_t modes, double amp) {
  std::normal_distribution<double> g;
  TrigSeries v(2 * modes);
  for (std::size_t k = 1; k <= modes; ++k) v.set_a(2 * k, amp * g(rng) / static_cast<double>(k));
  return BoundaryWeight::from_log(v, 64);
}

Matrix random_spd(std::mt19937_64& rng, std::size_t n, double shift) {
  std::normal_distribution<double> g;
  Matrix M(n, n), S(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = g(rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < n; ++k) s += M(i, k) * M(j, k);
      S(i, j) = s + (i == j ? shift : 0.0);
    }
  return S;
}

Outcome flat_disk() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = solve_spectrum(BoundaryWeight::from_density(TrigSeries::constant(1.0)), 64, 16);
  double err = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) err = std::max(err, std::abs(s.sigmas[k] - static_cast<double>((k + 1) / 2)));
  const double bar = std::max(std::abs(s.sigma_bar(1) - 2 * pi), std::abs(s.sigma_bar(2) - 2 * pi));
  const double dt = seconds_since(t0);
  o.require(err <= 1e-10, "eigenvalue error " + num(err));
  o.require(bar <= 1e-9, "normalized error " + num(bar));
  o.require(dt < 1.0, "runtime " + num(dt) + " s");
  if (o.pass) o.detail = "max error " + num(err) + ", normalized error " + num(bar);
  return o;
}

Outcome scale_invariance() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> c_dist(0.1, 10.0);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto w = random_even_weight(rng, 6, 0.3);
    const double c = c_dist(rng);
    const auto a = solve_spectrum(w, 64, 8), b = solve_spectrum(w.scaled(c), 64, 8);
    for (std::size_t k = 1; k <= 8; ++k) worst = std::max(worst, std::abs(a.sigma_bar(k) - b.sigma_bar(k)));
  }
  const double dt = seconds_since(t0);
  o.require(worst <= 1e-10, "deviation " + num(worst));
  o.require(dt < 10.0, "runtime " + num(dt) + " s");
  if (o.pass) o.detail = "max deviation " + num(worst);
  return o;
}

Outcome spectral_inequalities() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  double max1 = 0.0, max2 = 0.0, min_hps = 1e300;
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = solve_spectrum(random_even_weight(rng, 8, 0.4), 64, 4);
    max1 = std::max(max1, s.sigma_bar(1));
    max2 = std::max(max2, s.sigma_bar(2));
    min_hps = std::min(min_hps, 1 / s.sigma_bar(1) + 1 / s.sigma_bar(2) - 1 / pi);
  }
  const double dt = seconds_since(t0);
  const double delta = 4 * pi - max2;
  o.require(max1 <= 2 * pi + 1e-6, "max sigma_bar1 " + num(max1));
  o.require(delta > 0.0, "no gap below 4 pi");
  o.require(min_hps >= -1e-8, "reciprocal sum deficit " + num(min_hps));
  o.require(dt < 60.0, "runtime " + num(dt) + " s");
  if (o.pass)
    o.detail = "max sigma_bar1 " + num(max1) + ", delta " + num(delta) + ", min reciprocal excess " + num(min_hps);
  return o;
}

Outcome eigensolver_oracle() {
  Outcome o;
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> size(2, 8);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto n = static_cast<std::size_t>(size(rng));
    const Matrix A = random_spd(rng, n, 0.5), B = random_spd(rng, n, 1.0);
    const auto sys = generalized_eigen(A, B, n);
    const auto ref = oracle::brute_generalized(A, B);
    if (ref.values.size() != n) {
      o.require(false, "oracle found " + std::to_string(ref.values.size()) + " of " + std::to_string(n) + " roots");
      continue;
    }
    for (std::size_t j = 0; j < n; ++j)
      worst = std::max(worst, std::abs(sys.values[j] - ref.values[j]) / (1 + std::abs(ref.values[j])));
  }
  o.require(worst <= 1e-10, "relative deviation " + num(worst));
  if (o.pass) o.detail = "max relative deviation " + num(worst);
  return o;
}

Outcome subgradient_check() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::normal_distribution<double> g;
  const FunctionalParams params(1, 2);
  const std::size_t N = 64;
  int tested = 0;
  double worst = 0.0;
  while (tested < 10) {
    const auto w = random_even_weight(rng, 4, 0.25);
    const auto s = solve_spectrum(w, N, 8);
    const double gap1 = std::min(s.sigmas[2] - s.sigmas[1], s.sigmas[1] - s.sigmas[0]);
    const double gap2 = s.sigmas[3] - s.sigmas[2];
    if (std::min(gap1, gap2) <= 1e-4) continue;
    ++tested;
    TrigSeries dv(12);
    for (std::size_t k = 1; k <= 6; ++k) dv.set_a(2 * k, g(rng) / static_cast<double>(k));
    const double h = 1e-5;
    auto shifted = [&](double sgn) {
      const std::size_t n = 1024;
      std::vector<double> vals(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double t = 2 * pi * static_cast<double>(j) / static_cast<double>(n);
        vals[j] = w.density(t) * std::exp(sgn * h * dv(t));
      }
      return BoundaryWeight::from_density(project_samples(vals, 2 * N));
    };
    const double fd = (evaluate_E(shifted(1), params, N).value - evaluate_E(shifted(-1), params, N).value) / (2 * h);
    const double an = directional_derivative(subgradient(w, s, params), w, dv);
    worst = std::max(worst, std::abs(an - fd) / std::abs(fd));
  }
  o.require(worst <= 1e-4, "relative mismatch " + num(worst));
  if (o.pass) o.detail = "max relative mismatch " + num(worst);
  return o;
}

Outcome ellipse_closed_forms() {
  Outcome o;
  double worst_value = 0.0, worst_bar = 0.0, worst_product = 0.0, slowest = 0.0;
  for (double p : {0.4, 0.6, 0.8}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = compute_indices(p);
    slowest = std::max(slowest, seconds_since(t0));
    const auto& s = r.sigmas;
    worst_value = std::max({worst_value, std::abs(s[static_cast<std::size_t>(r.k1)] / p - 1),
                            std::abs(s[static_cast<std::size_t>(r.k2)] - 1)});
    worst_bar = std::max({worst_bar, std::abs(r.sigma_bar_low - 2 * pi * std::sqrt(p)),
                          std::abs(r.sigma_bar_high - 2 * pi / std::sqrt(p))});
    worst_product = std::max(worst_product, std::abs(r.sigma_bar_low * r.sigma_bar_high / (4 * pi * pi) - 1));
  }
  o.require(worst_value <= 1e-5, "eigenvalue mismatch " + num(worst_value));
  o.require(worst_bar <= 1e-4, "normalized mismatch " + num(worst_bar));
  o.require(worst_product <= 1e-6, "product mismatch " + num(worst_product));
  o.require(slowest < 30.0, "runtime " + num(slowest) + " s");
  if (o.pass)
    o.detail = "eigenvalue " + num(worst_value) + ", normalized " + num(worst_bar) + ", product " + num(worst_product);
  return o;
}

Outcome theta_star() {
  Outcome o;
  const auto est = estimate_theta_star(0.05);
  o.require(est.bracket_lo > 1.0 && est.bracket_hi <= 4.0, "bracket outside (1, 4]");
  o.require(est.bracket_hi - est.bracket_lo <= 0.1, "bracket wider than 0.1");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("bracket [") + num(est.bracket_lo) + ", " +
              num(est.bracket_hi) + "]";
  return o;
}

Outcome test_family() {
  Outcome o;
  const std::vector<double> grid{0.003, 0.01, 0.03};
  std::vector<std::future<TestFamilyRow>> jobs;
  for (double e : grid) jobs.push_back(std::async(std::launch::async, [e] { return test_family_row(e); }));
  std::vector<TestFamilyRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  for (const auto& r : rows) {
    o.require(r.ok, "(d) epsilon " + num(r.epsilon) + ": " + r.failure);
    o.require(std::abs(r.length - 4 * pi) <= 1e-9, "(a) length error " + num(r.length - 4 * pi));
  }
  const auto f2 = fit_sigma2(rows);
  const double target = -16 * pi;
  const double rel = f2.slope ? std::abs(*f2.slope / target - 1) : 1e300;
  o.require(rel <= 0.15, "(b) slope " + (f2.slope ? num(*f2.slope) : std::string("n/a")) + " vs " + num(target) +
                             " (relative " + num(rel) + ")");
  const double ratio = rows[0].sigma_bar1 * std::log(1 / rows[0].epsilon) / (2 * pi);
  o.require(ratio >= 0.8 && ratio <= 1.2, "(c) ratio " + num(ratio));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("(c) ratio at 0.003 = ") + num(ratio);
  return o;
}

Outcome optimizer_end_to_end() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const FunctionalParams params(1, 8);
  OptimizerConfig cfg;
  cfg.n_modes = 32;
  const auto initial = BoundaryWeight::from_density(TrigSeries::constant(1.0) + TrigSeries::cosine(2, 0.2));
  const auto r = minimize(params, cfg, initial);
  const double dt = seconds_since(t0);
  o.require(r.converged, "status " + r.status);
  o.require(r.subgrad_norm <= 1e-4, "subgradient norm " + num(r.subgrad_norm));
  o.require(!r.planarity_flag && r.spectrum.sigma_bar(1) < r.spectrum.sigma_bar(2), "planar result");
  o.require(std::max(std::abs(r.mass_residuals.first), std::abs(r.mass_residuals.second)) <= 1e-3,
            "mass residuals " + num(r.mass_residuals.first) + ", " + num(r.mass_residuals.second));
  const double cand_a = 2 * std::sqrt(params.t) / (2 * pi), cand_b = (1 + params.t) / (2 * pi);
  o.require(r.E < cand_a, "E " + num(r.E) + " not below (2 sqrt t)/(2 pi) = " + num(cand_a));
  o.require(r.E < cand_b, "E " + num(r.E) + " not below (1+t)/(2 pi) = " + num(cand_b));
  if (!r.immersion) {
    o.require(false, "no immersion");
    return o;
  }
  const Diagnostics d = diagnose(*r.immersion);
  o.require(d.ellipsoid_residual <= 1e-3, "ellipsoid residual " + num(d.ellipsoid_residual));
  o.require(d.conformality_residual <= 1e-3, "conformality residual " + num(d.conformality_residual));
  o.require(d.area_identity <= 1e-3, "area identity " + num(d.area_identity));
  o.require(d.winding == 1, "winding " + std::to_string(d.winding));
  o.require(d.jacobian_min > 0, "jacobian_min " + num(d.jacobian_min));
  o.require(d.nodal_counts == std::array<int, 3>{2, 2, 3}, "nodal counts");
  o.require(d.critical_weight_mismatch <= 1e-2, "critical weight mismatch " + num(d.critical_weight_mismatch));
  o.require(dt < 600.0, "runtime " + num(dt) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("E = ") + num(r.E) + ", p = " + num(r.p) +
              ", L = " + num(r.L);
  return o;
}

Outcome monotone_sweep() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  OptimizerConfig cfg;
  const auto initial = BoundaryWeight::from_density(TrigSeries::constant(1.0) + TrigSeries::cosine(2, 0.2));
  const auto res = sweep_t(1.0, {5, 8, 12, 20, 40}, cfg, initial);
  const double dt = seconds_since(t0);
  const auto& rows = res.rows;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    o.require(rows[i].p < rows[i - 1].p, "p not decreasing at t=" + num(rows[i].t));
    o.require(rows[i].L > rows[i - 1].L, "L not increasing at t=" + num(rows[i].t));
    o.require(rows[i].gap_to_4pi < rows[i - 1].gap_to_4pi, "4 pi - L not decreasing at t=" + num(rows[i].t));
  }
  for (const auto& r : rows) o.require(r.converged, "t=" + num(r.t) + " status " + r.status);
  const double ratio = rows.back().energy_ratio;
  o.require(ratio >= 0.5 && ratio <= 2.0, "ratio at t=40 " + num(ratio));
  o.require(dt < 1800.0, "runtime " + num(dt) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("ratio at t=40 = ") + num(ratio);
  return o;
}

Outcome flat_regime() {
  Outcome o;
  OptimizerConfig cfg;
  cfg.grad_tol = 1e-10;
  const auto initial = BoundaryWeight::from_density(TrigSeries::constant(1.0) + TrigSeries::cosine(2, 0.2));
  const auto r = minimize(FunctionalParams(1, 1), cfg, initial);
  double norm = 0.0;
  for (double c : r.coeffs) norm += c * c;
  norm = std::sqrt(norm);
  o.require(norm <= 1e-6, "coefficient norm " + num(norm));
  o.require(std::abs(r.E - 1 / pi) <= 1e-8, "E error " + num(r.E - 1 / pi));
  if (o.pass) o.detail = "coefficient norm " + num(norm) + ", E error " + num(r.E - 1 / pi);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{
      flat_disk,           scale_invariance, spectral_inequalities, eigensolver_oracle,
      subgradient_check,   ellipse_closed_forms, theta_star,        test_family,
      optimizer_end_to_end, monotone_sweep,  flat_regime};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
