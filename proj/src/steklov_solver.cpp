#include "steklov/steklov_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "steklov/errors.hpp"

namespace steklov {

namespace {
constexpr double kPi = std::numbers::pi;
}

BoundaryWeight BoundaryWeight::from_density(TrigSeries density) {
  if (!(grid_minimum(density) > 0.0))
    fail(ErrorKind::positivity, "weight density is not strictly positive");
  BoundaryWeight w;
  w.symmetry_class = density.parity();
  w.density = std::move(density);
  return w;
}

BoundaryWeight BoundaryWeight::from_log(const TrigSeries& v, std::size_t degree) {
  const std::size_t n = grid_size_for(std::max(degree, v.n_modes()));
  auto vals = evaluate_grid(v, n);
  for (auto& x : vals) x = std::exp(x);
  TrigSeries d = project_samples(vals, degree);
  if (v.parity() == Parity::even_both) {
    // keep the symmetry exact
    std::vector<double> a = d.cos_coeffs();
    for (std::size_t k = 1; k < a.size(); k += 2) a[k] = 0.0;
    d = TrigSeries(std::move(a), {});
  }
  BoundaryWeight w = from_density(std::move(d));
  w.log_coeffs = v;
  return w;
}

BoundaryWeight BoundaryWeight::scaled(double c) const {
  BoundaryWeight w = *this;
  w.density *= c;
  if (w.log_coeffs) w.log_coeffs->set_a(0, w.log_coeffs->a(0) + std::log(c));
  return w;
}

BoundaryWeight BoundaryWeight::rotated(double alpha) const {
  BoundaryWeight w;
  w.density = density.rotated(alpha);
  if (log_coeffs) w.log_coeffs = log_coeffs->rotated(alpha);
  w.symmetry_class = w.density.parity();
  return w;
}

const char* to_string(Block b) {
  switch (b) {
    case Block::full: return "full";
    case Block::cos_even: return "cos_even";
    case Block::cos_odd: return "cos_odd";
    case Block::sin_odd: return "sin_odd";
    case Block::sin_even: return "sin_even";
  }
  return "full";
}

Parity block_parity(Block b) {
  switch (b) {
    case Block::cos_even: return Parity::even_both;
    case Block::cos_odd: return Parity::odd_x_even_y;
    case Block::sin_odd: return Parity::even_x_odd_y;
    case Block::sin_even: return Parity::odd_both;
    default: return Parity::none;
  }
}

std::vector<std::size_t> SteklovSpectrum::multiplet(std::size_t k, double rel) const {
  std::vector<std::size_t> out;
  const double s = sigmas.at(k);
  for (std::size_t j = 0; j < sigmas.size(); ++j)
    if (std::abs(sigmas[j] - s) <= rel * (1.0 + std::abs(s))) out.push_back(j);
  return out;
}

namespace {

BlockProblem make_problem(const BoundaryWeight& weight, Block block, std::vector<BasisMode> modes) {
  BlockProblem p;
  p.block = block;
  p.a.resize(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) p.a[i] = kPi * static_cast<double>(modes[i].k);
  p.B = mass_matrix(weight.density, modes);
  p.modes = std::move(modes);
  return p;
}

void check_truncation(std::size_t N, std::size_t k_max) {
  if (N < k_max + 4)
    fail(ErrorKind::resolution, "truncation N=" + std::to_string(N) +
                                    " is below k_max+4=" + std::to_string(k_max + 4));
}

TrigSeries trace_from(const std::vector<BasisMode>& modes, const Matrix& U, std::size_t col) {
  std::size_t kmax = 0;
  for (const auto& m : modes) kmax = std::max(kmax, m.k);
  std::vector<double> a(kmax + 1, 0.0), b(kmax + 1, 0.0);
  double big = 0.0;
  for (std::size_t i = 0; i < modes.size(); ++i) big = std::max(big, std::abs(U(i, col)));
  // sign: lowest-frequency significant coefficient positive
  double sign = 1.0;
  std::size_t best_k = kmax + 1;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (std::abs(U(i, col)) > 1e-6 * big && modes[i].k < best_k) {
      best_k = modes[i].k;
      sign = U(i, col) < 0 ? -1.0 : 1.0;
    }
  }
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double v = sign * U(i, col);
    if (modes[i].is_sin) b[modes[i].k] = v;
    else a[modes[i].k] = v;
  }
  return TrigSeries(std::move(a), std::move(b));
}

}  // namespace

std::array<BlockProblem, 4> parity_blocks(const BoundaryWeight& weight, std::size_t N) {
  if (weight.density.parity() != Parity::even_both)
    fail(ErrorKind::symmetry, "parity blocks require an even_both weight");
  std::vector<BasisMode> ce, co, so, se;
  for (std::size_t k = 0; k <= N; ++k) {
    if (k % 2 == 0) {
      ce.push_back({false, k});
      if (k > 0) se.push_back({true, k});
    } else {
      co.push_back({false, k});
      so.push_back({true, k});
    }
  }
  return {make_problem(weight, Block::cos_even, std::move(ce)),
          make_problem(weight, Block::cos_odd, std::move(co)),
          make_problem(weight, Block::sin_odd, std::move(so)),
          make_problem(weight, Block::sin_even, std::move(se))};
}

BlockProblem full_problem(const BoundaryWeight& weight, std::size_t N) {
  return make_problem(weight, Block::full, full_basis(N));
}

std::vector<Eigenpair> solve_block(const BlockProblem& p, std::size_t n_pairs) {
  const std::size_t n = p.modes.size();
  n_pairs = std::min(n_pairs, n);
  const EigenSystem sys = generalized_eigen_diag(p.a, p.B, n_pairs);
  std::vector<Eigenpair> out;
  Vector u(n);
  for (std::size_t c = 0; c < n_pairs; ++c) {
    for (std::size_t i = 0; i < n; ++i) u[i] = sys.vectors(i, c);
    const Vector Bu = p.B * u;
    const double uBu = dot(u, Bu);
    double uAu = 0.0;
    for (std::size_t i = 0; i < n; ++i) uAu += p.a[i] * u[i] * u[i];
    Matrix U(n, 1);
    const double scale = 1.0 / std::sqrt(uBu);
    for (std::size_t i = 0; i < n; ++i) U(i, 0) = u[i] * scale;
    Eigenpair e;
    e.sigma = uAu / uBu;
    e.trace = trace_from(p.modes, U, 0);
    e.block = p.block;
    e.index_in_block = c;
    out.push_back(std::move(e));
  }
  return out;
}

SteklovSpectrum solve_spectrum(const BoundaryWeight& weight, std::size_t N, std::size_t k_max,
                               const SolveOptions& opts) {
  check_truncation(N, k_max);
  SteklovSpectrum s;
  s.weight = weight;
  s.N = N;
  s.L = weight.length();
  std::vector<Eigenpair> pairs;
  const std::size_t per_block = opts.per_block ? opts.per_block : k_max + 1;
  if (opts.use_blocks && weight.density.parity() == Parity::even_both) {
    for (const auto& p : parity_blocks(weight, N)) {
      auto ep = solve_block(p, per_block);
      s.by_block.push_back(ep);
      pairs.insert(pairs.end(), ep.begin(), ep.end());
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Eigenpair& x, const Eigenpair& y) { return x.sigma < y.sigma; });
  } else {
    pairs = solve_block(full_problem(weight, N), k_max + 1);
  }
  pairs.resize(std::min(pairs.size(), k_max + 1));
  for (auto& e : pairs) {
    s.sigmas.push_back(e.sigma);
    s.eigen_traces.push_back(std::move(e.trace));
    s.blocks.push_back(e.block);
    s.block_index.push_back(e.index_in_block);
    s.normalized.push_back(e.sigma * s.L);
  }
  for (std::size_t k = 0; k + 1 < s.sigmas.size(); ++k)
    s.multiplicity_gaps.push_back(s.sigmas[k + 1] - s.sigmas[k]);
  return s;
}

SteklovSpectrum solve_spectrum_converged(const BoundaryWeight& weight, std::size_t N0,
                                         std::size_t k_max, double tol, std::size_t N_limit,
                                         const SolveOptions& opts) {
  std::size_t N = std::max(N0, k_max + 4);
  SteklovSpectrum coarse = solve_spectrum(weight, N, k_max, opts);
  while (2 * N <= N_limit) {
    SteklovSpectrum fine = solve_spectrum(weight, 2 * N, k_max, opts);
    bool ok = true;
    for (std::size_t k = 0; k <= k_max && k < fine.size(); ++k)
      if (std::abs(coarse.sigmas[k] - fine.sigmas[k]) > tol * (1.0 + std::abs(fine.sigmas[k])))
        ok = false;
    if (ok) return fine;
    coarse = std::move(fine);
    N *= 2;
  }
  fail(ErrorKind::resolution, "spectrum not converged up to N=" + std::to_string(N_limit));
}

double rayleigh_quotient(const TrigSeries& trial, const BoundaryWeight& weight) {
  const double denom = weighted_inner(trial, trial, weight.density);
  if (!(denom > 1e-300)) fail(ErrorKind::degenerate_trial, "trial has zero weighted boundary norm");
  return trial.dirichlet_energy() / denom;
}

double weighted_norm2(const PiecewiseTrial& trial, const BoundaryWeight& weight) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> pts = trial.breakpoints;
  pts.push_back(0.0);
  pts.push_back(2.0 * kPi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto f = [&](double t) {
    const double v = trial.boundary(t);
    return v * v * weight.density(t);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] <= pts[i]) continue;
    double err = 0.0;
    total += gauss_kronrod<double, 61>::integrate(f, pts[i], pts[i + 1], 8, 1e-12, &err);
  }
  return total;
}

double rayleigh_quotient(const PiecewiseTrial& trial, const BoundaryWeight& weight) {
  const double denom = weighted_norm2(trial, weight);
  if (!(denom > 1e-300)) fail(ErrorKind::degenerate_trial, "trial has zero weighted boundary norm");
  return trial.dirichlet_energy / denom;
}

double eigen_residual(const SteklovSpectrum& spec) {
  std::size_t deg = spec.N;
  const Matrix B = mass_matrix(spec.weight.density, full_basis(deg));
  const auto modes = full_basis(deg);
  double worst = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    Vector u(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i)
      u[i] = modes[i].is_sin ? spec.eigen_traces[k].b(modes[i].k) : spec.eigen_traces[k].a(modes[i].k);
    const Vector Bu = B * u;
    double r2 = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const double r = kPi * static_cast<double>(modes[i].k) * u[i] - spec.sigmas[k] * Bu[i];
      r2 += r * r;
    }
    worst = std::max(worst, std::sqrt(r2) / norm2(Bu));
  }
  return worst;
}

std::vector<std::string> spectrum_invariant_violations(const SteklovSpectrum& s) {
  std::vector<std::string> v;
  if (s.size() < 3) return v;
  const double s1 = s.normalized[1], s2 = s.normalized[2];
  if (std::abs(s.sigmas[0]) > 1e-9 * (1.0 + s.sigmas[1])) v.push_back("sigma_0 is not zero");
  if (!(s.sigmas[1] > 1e-9 * (1.0 + s.sigmas[1]))) v.push_back("sigma_0 is not simple");
  if (s1 > 2.0 * kPi * (1.0 + 1e-6)) v.push_back("normalized sigma_1 exceeds 2 pi");
  if (s2 > 4.0 * kPi * (1.0 + 1e-6)) v.push_back("normalized sigma_2 exceeds 4 pi");
  if (1.0 / s1 + 1.0 / s2 < 1.0 / kPi - 1e-8) v.push_back("1/sigma_1 + 1/sigma_2 below 1/pi");
  return v;
}

}  // namespace steklov
