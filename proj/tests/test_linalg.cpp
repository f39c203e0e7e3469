#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "steklov/errors.hpp"
#include "steklov/linalg.hpp"

using namespace steklov;

namespace {

Matrix random_spd(std::mt19937_64& rng, std::size_t n, double shift) {
  std::normal_distribution<double> g;
  Matrix M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = g(rng);
  Matrix S(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < n; ++k) s += M(i, k) * M(j, k);
      S(i, j) = s + (i == j ? shift : 0.0);
    }
  return S;
}

Matrix random_sym(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  Matrix S(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) S(i, j) = S(j, i) = g(rng);
  return S;
}

}  // namespace

TEST_CASE("cholesky reproduces the matrix and rejects indefinite input") {
  std::mt19937_64 rng(1);
  auto B = random_spd(rng, 6, 0.5);
  auto L = cholesky(B);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 6; ++k) s += L(i, k) * L(j, k);
      CHECK(std::abs(s - B(i, j)) < 1e-12);
    }
  Matrix bad = Matrix::identity(3);
  bad(2, 2) = -1.0;
  try {
    cholesky(bad);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resolution);
  }
}

TEST_CASE("tridiagonal QL: known spectrum of the discrete Laplacian") {
  const std::size_t n = 50;
  Vector d(n, 2.0), e(n - 1, -1.0);
  auto ev = tridiagonal_eigenvalues(d, e);
  for (std::size_t k = 0; k < n; ++k) {
    const double ex = 2.0 - 2.0 * std::cos(oracle::pi * (k + 1) / (n + 1));
    CHECK(std::abs(ev[k] - ex) < 1e-13);
  }
}

TEST_CASE("symmetric eigen: residuals, orthonormality, degenerate spectra") {
  std::mt19937_64 rng(2);
  for (std::size_t n : {1u, 2u, 5u, 40u, 120u}) {
    auto C = random_sym(rng, n);
    auto sys = symmetric_eigen(C, n);
    for (std::size_t j = 0; j < n; ++j) {
      auto v = sys.vectors.column(j);
      auto Cv = C * v;
      double r = 0;
      for (std::size_t i = 0; i < n; ++i) r += std::pow(Cv[i] - sys.values[j] * v[i], 2);
      CHECK(std::sqrt(r) < 1e-11 * (1 + n));
      for (std::size_t k = 0; k < j; ++k) CHECK(std::abs(dot(v, sys.vectors.column(k))) < 1e-10);
      CHECK(norm2(v) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  // identity and block-repeated spectra
  auto I = Matrix::identity(7);
  auto si = symmetric_eigen(I, 7);
  for (std::size_t j = 0; j < 7; ++j) {
    CHECK(si.values[j] == doctest::Approx(1.0));
    for (std::size_t k = 0; k < j; ++k) CHECK(std::abs(dot(si.vectors.column(j), si.vectors.column(k))) < 1e-12);
  }
  Matrix D(6, 6);
  for (std::size_t i = 0; i < 6; ++i) D(i, i) = static_cast<double>(i / 2);
  auto sd = symmetric_eigen(D, 6);
  for (std::size_t j = 0; j < 6; ++j) {
    auto v = sd.vectors.column(j);
    auto Dv = D * v;
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(Dv[i] - sd.values[j] * v[i]) < 1e-12);
    for (std::size_t k = 0; k < j; ++k) CHECK(std::abs(dot(v, sd.vectors.column(k))) < 1e-12);
  }
}

TEST_CASE("generalized eigen matches the brute-force characteristic-polynomial oracle") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(2, 8);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = static_cast<std::size_t>(size(rng));
    auto A = random_sym(rng, n);
    auto B = random_spd(rng, n, 1.0);
    auto sys = generalized_eigen(A, B, n);
    auto ref = oracle::brute_generalized(A, B);
    REQUIRE(ref.values.size() == n);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(sys.values[j] - ref.values[j]) < 1e-10 * (1 + std::abs(ref.values[j])));
      auto u = sys.vectors.column(j);
      double c = dot(u, ref.vectors[j]) > 0 ? 1.0 : -1.0;
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(u[i] - c * ref.vectors[j][i]) < 1e-8);
    }
  }
}

TEST_CASE("generalized eigen with diagonal A agrees with the general path") {
  std::mt19937_64 rng(4);
  const std::size_t n = 30;
  auto B = random_spd(rng, n, 2.0);
  Vector a(n);
  Matrix A(n, n);
  for (std::size_t i = 0; i < n; ++i) A(i, i) = a[i] = static_cast<double>(i);
  auto s1 = generalized_eigen(A, B, 5);
  auto s2 = generalized_eigen_diag(a, B, 5);
  for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(s1.values[j] - s2.values[j]) < 1e-10 * (1 + s1.values[j]));
  for (std::size_t j = 0; j < 5; ++j) {
    auto u = s2.vectors.column(j);
    CHECK(dot(u, B * u) == doctest::Approx(1.0).epsilon(1e-10));
  }
}
