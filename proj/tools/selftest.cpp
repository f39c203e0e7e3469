#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli_config.hpp"
#include "commands.hpp"
#include "steklov/ellipse.hpp"
#include "steklov/functional.hpp"
#include "steklov/io_util.hpp"
#include "steklov/linalg.hpp"
#include "steklov/optimizer.hpp"
#include "steklov/steklov_solver.hpp"
#include "steklov/test_metrics.hpp"
#include "steklov/trig_series.hpp"

namespace steklov::cli {

namespace {

constexpr double kPi = std::numbers::pi;

// Returns an empty string on success, otherwise the failure description.
using CheckFn = std::function<std::string()>;

std::string exceeds(const std::string& what, double err, double tol) {
  if (err <= tol) return {};
  return what + " error " + format_double(err) + " > " + format_double(tol);
}

BoundaryWeight density(std::vector<double> cos_coeffs) {
  return BoundaryWeight::from_density(TrigSeries(std::move(cos_coeffs), {}));
}

std::vector<std::pair<std::string, CheckFn>> checks(std::size_t forced_N) {
  auto pick = [forced_N](std::size_t n) { return forced_N ? forced_N : n; };
  std::vector<std::pair<std::string, CheckFn>> c;

  c.emplace_back("flat_disk_spectrum", [=] {
    const auto s = solve_spectrum(density({1.0}), pick(64), 8);
    double err = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
      err = std::max(err, std::abs(s.sigmas[k] - static_cast<double>((k + 1) / 2)));
    std::string f = exceeds("eigenvalue", err, 1e-10);
    if (f.empty())
      f = exceeds("normalized", std::max(std::abs(s.sigma_bar(1) - 2 * kPi), std::abs(s.sigma_bar(2) - 2 * kPi)), 1e-9);
    return f;
  });

  c.emplace_back("scale_invariance", [=] {
    const auto w = density({1.0, 0.0, 0.3, 0.0, 0.1});
    const auto a = solve_spectrum(w, pick(64), 8), b = solve_spectrum(w.scaled(3.7), pick(64), 8);
    double err = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) err = std::max(err, std::abs(a.normalized[k] - b.normalized[k]));
    return exceeds("normalized eigenvalue", err, 1e-10);
  });

  c.emplace_back("spectral_inequalities", [=] {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> a(9, 0.0);
      a[0] = 1.0;
      for (std::size_t k = 2; k <= 8; k += 2) a[k] = u(rng);
      const auto v = spectrum_invariant_violations(solve_spectrum(density(a), pick(64), 8));
      if (!v.empty()) return v.front();
    }
    return std::string{};
  });

  c.emplace_back("eigensolver_closed_form", [] {
    Matrix A(2, 2), B(2, 2);
    A(0, 0) = 2; A(0, 1) = A(1, 0) = 1; A(1, 1) = 3;
    B(0, 0) = 2; B(0, 1) = B(1, 0) = 0.5; B(1, 1) = 1;
    // det(A - x B) = qa x^2 + qb x + qc
    const double qa = B(0, 0) * B(1, 1) - B(0, 1) * B(0, 1);
    const double qb = -(A(0, 0) * B(1, 1) + A(1, 1) * B(0, 0) - 2 * A(0, 1) * B(0, 1));
    const double qc = A(0, 0) * A(1, 1) - A(0, 1) * A(0, 1);
    const double disc = std::sqrt(qb * qb - 4 * qa * qc);
    const double lo = (-qb - disc) / (2 * qa), hi = (-qb + disc) / (2 * qa);
    const auto es = generalized_eigen(A, B, 2);
    return exceeds("eigenvalue", std::max(std::abs(es.values[0] - lo), std::abs(es.values[1] - hi)), 1e-12);
  });

  c.emplace_back("parity_blocks_match_full_basis", [=] {
    const auto w = density({1.0, 0.0, 0.3});
    SolveOptions full;
    full.use_blocks = false;
    const auto a = solve_spectrum(w, pick(48), 8), b = solve_spectrum(w, pick(48), 8, full);
    double err = 0.0;
    for (std::size_t k = 0; k <= 8; ++k) err = std::max(err, std::abs(a.sigmas[k] - b.sigmas[k]));
    return exceeds("eigenvalue", err, 1e-9);
  });

  c.emplace_back("subgradient_finite_difference", [=] {
    const FunctionalParams p(1, 2);
    const auto w = density({1.0, 0.0, 0.3});
    const std::size_t N = pick(64);
    const auto s = solve_spectrum(w, N, 8);
    if (s.multiplet(1).size() != 1 || s.multiplet(2).size() != 1) return std::string("eigenvalues not simple");
    const auto g = subgradient(w, s, p);
    const TrigSeries dv = TrigSeries::cosine(2, 0.7) + TrigSeries::cosine(6, -0.4);
    const double h = 1e-5;
    auto shifted = [&](double sgn) {
      const std::size_t n = 1024;
      std::vector<double> vals(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double t = 2 * kPi * static_cast<double>(j) / static_cast<double>(n);
        vals[j] = w.density(t) * std::exp(sgn * h * dv(t));
      }
      return BoundaryWeight::from_density(project_samples(vals, 2 * N));
    };
    const double fd = (evaluate_E(shifted(1), p, N).value - evaluate_E(shifted(-1), p, N).value) / (2 * h);
    const double an = directional_derivative(g, w, dv);
    return exceeds("relative derivative", std::abs(an - fd) / std::abs(fd), 1e-4);
  });

  c.emplace_back("ellipse_closed_forms", [=] {
    const auto r = compute_indices(0.5, forced_N, 8);
    std::string f = exceeds("low eigenvalue", std::abs(r.sigma_bar_low / r.expected_low - 1), 1e-4);
    if (f.empty()) f = exceeds("high eigenvalue", std::abs(r.sigma_bar_high / r.expected_high - 1), 1e-4);
    if (f.empty()) f = exceeds("product", std::abs(r.sigma_bar_low * r.sigma_bar_high / (4 * kPi * kPi) - 1), 1e-6);
    return f;
  });

  c.emplace_back("test_family_length", [=] {
    const double eps = 0.03;
    const auto pt = omega_eps_weight(eps, pick(omega_eps_min_N(eps)));
    return exceeds("length", std::abs(pt.weight.length() - 4 * kPi), 1e-9);
  });

  c.emplace_back("optimizer_flat_regime", [=] {
    OptimizerConfig cfg;
    cfg.n_modes = 4;
    cfg.solver_N = forced_N;
    cfg.validate();
    const auto r = minimize(FunctionalParams(1, 1), cfg, density({1.0}));
    std::string f = exceeds("E", std::abs(r.E - 1 / kPi), 1e-8);
    double norm = 0.0;
    for (double x : r.coeffs) norm += x * x;
    if (f.empty()) f = exceeds("coefficient norm", std::sqrt(norm), 1e-6);
    return f;
  });

  c.emplace_back("sweep_rejects_nonmonotone_grid", [] {
    OptimizerConfig cfg;
    cfg.n_modes = 2;
    try {
      sweep_t(1.0, {8.0, 5.0}, cfg, density({1.0}));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config) return std::string{};
      return std::string("wrong error kind ") + std::string(to_string(e.kind()));
    }
    return std::string("grid accepted");
  });

  c.emplace_back("exit_code_mapping", [] {
    const bool ok = exit_code(ErrorKind::config) == 2 && exit_code(ErrorKind::resolution) == 3 &&
                    exit_code(ErrorKind::invariant) == 4 && exit_code(ErrorKind::io) == 5;
    return ok ? std::string{} : std::string("unexpected exit code");
  });

  c.emplace_back("float_round_trip", [] {
    for (double x : {0.1, 2 * kPi, 1e-300, -123456.789e10, 1.0 / 3.0})
      if (std::stod(format_double(x)) != x) return "value " + format_double(x) + " does not round-trip";
    return std::string{};
  });

  c.emplace_back("config_hash_canonical", [] {
    const auto a = nlohmann::json::parse(R"({"b":1,"a":[0.5,2]})");
    const auto b = nlohmann::json::parse(R"({"a":[0.5,2],"b":1})");
    if (config_hash(a) != config_hash(b)) return std::string("key order changes the hash");
    if (config_hash(a) == config_hash(nlohmann::json::parse(R"({"b":2,"a":[0.5,2]})")))
      return std::string("hash ignores a value change");
    return std::string{};
  });

  return c;
}

}  // namespace

int selftest(const RunOptions& opts) {
  const auto& cfg = opts.config;
  check_object(cfg, "config", {"solver_N"});
  const std::size_t forced_N = get_size(cfg, "solver_N", 0, "config");
  const std::string hash = config_hash(nlohmann::json{{"command", "selftest"}, {"config", cfg}});

  std::ostringstream report;
  report << provenance_line(hash) << "\n";
  int failures = 0;
  std::optional<ErrorKind> first_kind;
  for (const auto& [name, fn] : checks(forced_N)) {
    std::string failure;
    try {
      failure = fn();
    } catch (const Error& e) {
      failure = std::string(to_string(e.kind())) + ": " + e.what();
      if (!first_kind) first_kind = e.kind();
    } catch (const std::exception& e) {
      failure = e.what();
    }
    if (failure.empty()) {
      report << "PASS " << name << "\n";
    } else {
      report << "FAIL " << name << ": " << failure << "\n";
      ++failures;
    }
  }
  report << (failures ? "FAILED " : "ALL PASSED ") << failures << " failure(s)\n";

  std::cout << report.str();
  if (opts.out_given) {
    std::filesystem::create_directories(opts.out_dir);
    const std::string path = (std::filesystem::path(opts.out_dir) / "selftest.txt").string();
    std::ofstream f(path, std::ios::binary);
    if (!(f << report.str())) fail(ErrorKind::io, "cannot write " + path);
  }
  if (!failures) return 0;
  return first_kind ? exit_code(*first_kind) : exit_code(ErrorKind::invariant);
}

}  // namespace steklov::cli
