#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "oracles.hpp"
#include "steklov/errors.hpp"
#include "steklov/immersion.hpp"

using namespace steklov;
using oracle::pi;

namespace {

Immersion flat_immersion() {
  const auto w = BoundaryWeight::from_density(TrigSeries::constant(1.0));
  return build_immersion(solve_spectrum(w, 16, 6));
}

Immersion manual(const TrigSeries& a, const TrigSeries& b) {
  Immersion im;
  im.phi = {a, b, TrigSeries(0)};
  im.alpha = {1.0, 1.0, 0.0};
  im.sigma = {1.0, 1.0, 1.0};
  im.L = 2 * pi;
  im.weight = BoundaryWeight::from_density(TrigSeries::constant(1.0));
  return im;
}

}  // namespace

TEST_CASE("flat disk gives the identity map") {
  const Immersion im = flat_immersion();
  CHECK(im.planar());
  CHECK_FALSE(im.has_phi2);
  CHECK(im.ellipsoid_p == doctest::Approx(1.0).epsilon(1e-12));
  for (double t : {0.0, 0.7, 2.1, 4.0, 5.9}) {
    CHECK(im.component(0)(t) == doctest::Approx(std::sin(t)).epsilon(1e-10));
    CHECK(im.component(1)(t) == doctest::Approx(std::cos(t)).epsilon(1e-10));
  }
  const Diagnostics d = diagnose(im, {16, 64, 512, 64});
  CHECK(d.ellipsoid_residual < 1e-10);
  CHECK(d.conformality_residual < 1e-10);
  CHECK(d.min_boundary_speed == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(d.area == doctest::Approx(pi).epsilon(1e-10));
  CHECK(d.area_identity < 1e-10);
  CHECK(d.winding == 1);
  CHECK(d.jacobian_min > 0);
  CHECK(d.nodal_counts == std::array<int, 3>{2, 2, 0});
  CHECK(d.critical_weight_mismatch < 1e-10);
  CHECK(d.step1_violation.empty());
  const auto [r0, r12] = mass_residuals(im, FunctionalParams(1.0, 1.0));
  CHECK(r0 < 1e-8);
  CHECK(r12 < 1e-8);
}

TEST_CASE("a single coordinate function is not conformal") {
  Immersion im = flat_immersion();
  im.alpha[1] = 0.0;
  CHECK(verify_conformality(im, {8, 32, 64, 16}) > 0.5);
}

TEST_CASE("zero scaling gives a vanishing boundary speed") {
  Immersion im = flat_immersion();
  im.alpha = {0.0, 0.0, 0.0};
  CHECK(verify_no_boundary_branch(im) == 0.0);
}

TEST_CASE("z squared winds twice and has four nodal domains per coordinate") {
  const Immersion im = manual(TrigSeries::sine(2, 1.0), TrigSeries::cosine(2, 1.0));
  const auto rep = embedding_diagnostics(im, {16, 64, 1024, 128});
  CHECK(rep.winding == 2);
  CHECK(rep.nodal_counts[0] == 4);
  CHECK(rep.nodal_counts[1] == 4);
  CHECK(verify_conformality(im, {8, 32, 64, 16}) < 1e-12);
}

TEST_CASE("winding of sampled circles") {
  for (int k : {-3, -1, 1, 2, 5}) {
    std::vector<std::array<double, 2>> c;
    for (int j = 0; j < 400; ++j) {
      const double t = 2 * pi * j / 400.0;
      c.push_back({2 + std::cos(k * t) * 3, std::sin(k * t) * 3});
    }
    CHECK(winding_number(c) == k);
  }
  std::vector<std::array<double, 2>> off;
  for (int j = 0; j < 100; ++j) off.push_back({5 + std::cos(0.0628 * j), std::sin(0.0628 * j)});
  CHECK(winding_number(off) == 0);
}

TEST_CASE("nodal domain counting on a polar grid") {
  const std::size_t nr = 64, nt = 128;
  for (int k : {1, 2, 3}) {
    std::vector<std::vector<double>> v(nr, std::vector<double>(nt));
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nt; ++j) v[i][j] = std::pow((i + 1.0) / nr, k) * std::cos(k * 2 * pi * (j + 0.5) / nt);
    CHECK(count_nodal_domains(v, 0.0) == 2 * k);
  }
  // radial sign change: positive disk inside a negative annulus
  std::vector<std::vector<double>> v(nr, std::vector<double>(nt));
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nt; ++j) v[i][j] = 0.5 - (i + 1.0) / nr;
  CHECK(count_nodal_domains(v, 0.5) == 2);
}

TEST_CASE("post hoc perturbation of the flat weight is detected") {
  const Immersion im = flat_immersion();
  const auto w = BoundaryWeight::from_density(TrigSeries::constant(1.0) + TrigSeries::cosine(4, 0.1));
  CHECK(verify_critical_weight(im, w) >= 5e-2);
}

TEST_CASE("quartic perturbation is detected as non-critical") {
  TrigSeries d = TrigSeries::constant(1.0) + TrigSeries::cosine(4, 0.3);
  const auto w = BoundaryWeight::from_density(d);
  const auto spec = solve_spectrum(w, 64, 8);
  ImmersionOptions o;
  o.strict = false;
  const Immersion im = build_immersion(spec, o);
  CHECK(verify_critical_weight(im) >= 5e-2);
}

TEST_CASE("random non-critical weight violates the mass conditions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  TrigSeries d = TrigSeries::constant(1.0);
  for (std::size_t k = 1; k <= 4; ++k) d = d + TrigSeries::cosine(2 * k, u(rng));
  const auto spec = solve_spectrum(BoundaryWeight::from_density(d), 96, 8);
  ImmersionOptions o;
  o.strict = false;
  const Immersion im = build_immersion(spec, o);
  const auto [r0, r12] = mass_residuals(im, FunctionalParams(1.0, 2.0));
  CHECK(std::max(r0, r12) >= 1e-2);
  CHECK(verify_critical_weight(im) > 1e-3);
}

TEST_CASE("immersion requires an even weight spectrum") {
  TrigSeries d = TrigSeries::constant(1.0) + TrigSeries::cosine(1, 0.2);
  const auto spec = solve_spectrum(BoundaryWeight::from_density(d), 32, 6, {.use_blocks = false});
  CHECK_THROWS_AS(build_immersion(spec), Error);
}

TEST_CASE("surface export") {
  const Immersion im = flat_immersion();
  const std::string obj = "test_immersion_export.obj", csv = "test_immersion_export.csv";
  export_surface(im, 4, obj, csv, "hdr");
  std::ifstream f(obj);
  std::string line;
  int verts = 0, faces = 0;
  while (std::getline(f, line)) {
    if (line.rfind("v ", 0) == 0) ++verts;
    if (line.rfind("f ", 0) == 0) ++faces;
  }
  CHECK(verts == 1 + 4 * 16);
  CHECK(faces == 16 + 2 * 3 * 16);
  std::remove(obj.c_str());
  std::remove(csv.c_str());
  try {
    export_surface(im, 4, "/nonexistent_dir/x.obj", "/nonexistent_dir/x.csv");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}
