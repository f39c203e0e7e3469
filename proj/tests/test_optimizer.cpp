#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "steklov/errors.hpp"
#include "steklov/optimizer.hpp"

using namespace steklov;
using oracle::pi;

namespace {

BoundaryWeight start_weight() {
  return BoundaryWeight::from_density(TrigSeries::constant(1.0) + TrigSeries::cosine(2, 0.2));
}

OptimizerConfig small_config() {
  OptimizerConfig c;
  c.n_modes = 8;
  c.max_iters = 100;
  return c;
}

double coeff_norm(const std::vector<double>& c) {
  double s = 0;
  for (double x : c) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("configuration validation") {
  OptimizerConfig c;
  c.n_modes = 16;
  c.solver_N = 32;
  CHECK_THROWS_AS(c.validate(), Error);
  try {
    c.validate();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
  c.solver_N = 64;
  CHECK_NOTHROW(c.validate());
  CHECK(OptimizerConfig{}.effective_N() >= 4 * OptimizerConfig{}.n_modes);
}

TEST_CASE("log-coefficient parametrization") {
  const std::vector<double> c{0.3, -0.1, 0.05};
  const auto w = weight_from_coeffs(c, 32);
  CHECK(w.length() == doctest::Approx(2 * pi).epsilon(1e-13));
  CHECK(w.symmetry_class == Parity::even_both);
  const auto back = coeffs_from_weight(w, 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(back[k] == doctest::Approx(c[k]).epsilon(1e-12));
  // from a density without log coefficients
  const auto d = BoundaryWeight::from_density(w.density);
  const auto back2 = coeffs_from_weight(d, 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(back2[k] == doctest::Approx(c[k]).epsilon(1e-9));
}

TEST_CASE("flat start at t = 1 converges immediately") {
  const auto r = minimize(FunctionalParams(1, 1), small_config(),
                          BoundaryWeight::from_density(TrigSeries::constant(1.0)));
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.E == doctest::Approx(1 / pi).epsilon(1e-12));
  CHECK(r.planarity_flag);
}

TEST_CASE("t = 1 returns to the flat disk from a symmetric start") {
  auto cfg = small_config();
  cfg.grad_tol = 1e-10;
  const auto r = minimize(FunctionalParams(1, 1), cfg, start_weight());
  CHECK(r.converged);
  CHECK(coeff_norm(r.coeffs) < 1e-6);
  CHECK(std::abs(r.E - 1 / pi) < 1e-8);
}

TEST_CASE("objective trace is non-increasing and visited weights stay admissible") {
  auto cfg = small_config();
  cfg.newton = false;
  cfg.max_iters = 15;
  const auto r = minimize(FunctionalParams(1, 8), cfg, start_weight());
  REQUIRE(r.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] <= r.objective_trace[i - 1]);
  CHECK(r.weight.symmetry_class == Parity::even_both);
  CHECK(grid_minimum(r.weight.density, 1024) > 0);
  CHECK(spectrum_invariant_violations(r.spectrum).empty());
}

TEST_CASE("small non-planar run is critical and idempotent") {
  const FunctionalParams par(1, 8);
  const auto cfg = small_config();
  const auto r = minimize(par, cfg, start_weight());
  CHECK(r.converged);
  CHECK(r.subgrad_norm <= cfg.grad_tol);
  CHECK_FALSE(r.planarity_flag);
  CHECK(r.p > 0);
  CHECK(r.p < 1);
  CHECK(r.L < 4 * pi);
  const auto [m0, m12] = criticality_residuals(r, par);
  CHECK(m0 < 1e-3);
  CHECK(m12 < 1e-3);
  const auto again = minimize(par, cfg, r.weight);
  CHECK(again.iterations == 0);
  CHECK(again.E == doctest::Approx(r.E).epsilon(1e-12));
}

TEST_CASE("multiplet-averaged subgradient is a descent direction") {
  const FunctionalParams par(1, 2);
  const auto w = BoundaryWeight::from_density(TrigSeries::constant(1.0) + TrigSeries::cosine(4, 0.3));
  const auto spec = solve_spectrum(w, 64, 8);
  REQUIRE(spec.multiplet(1).size() == 2);
  const auto g = subgradient(w, spec, par);
  const double E0 = h_value(par, spec.normalized[1], spec.normalized[2]);
  bool decreased = false;
  for (double step = 0.1; step > 1e-6 && !decreased; step *= 0.5) {
    auto vals = evaluate_grid(w.density, 1024);
    const auto psi = evaluate_grid(g.direction, 1024);
    for (std::size_t j = 0; j < vals.size(); ++j) vals[j] *= std::exp(-step * psi[j]);
    const auto w2 = BoundaryWeight::from_density(project_samples(vals, 128));
    const auto s2 = solve_spectrum(w2, 64, 8);
    decreased = h_value(par, s2.normalized[1], s2.normalized[2]) < E0;
  }
  CHECK(decreased);
}

TEST_CASE("criticality residuals require an immersion") {
  OptimizationResult r;
  CHECK_THROWS_AS(criticality_residuals(r, FunctionalParams(1, 2)), Error);
}

TEST_CASE("sweep grid handling") {
  auto cfg = small_config();
  CHECK_THROWS_AS(sweep_t(1.0, {8, 5}, cfg, start_weight()), Error);
  const auto sw = sweep_t(1.0, {8}, cfg, start_weight());
  REQUIRE(sw.rows.size() == 1);
  const auto r = minimize(FunctionalParams(1, 8), cfg, start_weight());
  CHECK(sw.rows[0].E == r.E);
  CHECK(sw.rows[0].p == r.p);
  CHECK(sw.rows[0].L == r.L);
}
