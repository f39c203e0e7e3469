#include "steklov/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

constexpr double kPi = std::numbers::pi;

struct Branch {
  Block block = Block::full;
  std::size_t index = 0;
  double value = 0.0;  // renormalized eigenvalue
  Vector grad;         // d value / d c_k
};

struct Point {
  std::vector<double> c;
  BoundaryWeight weight;
  std::vector<Branch> branches;  // ascending, constant mode excluded
  double E = 0.0;
};

struct Piece {
  std::size_t b1 = 0, b2 = 0;  // indices into Point::branches
  double f = 0.0;
  Vector g;
};

std::size_t pow2_at_least(std::size_t n) {
  std::size_t p = 4;
  while (p < n) p <<= 1;
  return p;
}

Point evaluate_point(const std::vector<double>& c, const FunctionalParams& params, std::size_t N) {
  Point pt;
  pt.c = c;
  pt.weight = weight_from_coeffs(c, N);
  const SteklovSpectrum spec = solve_spectrum(pt.weight, N, 8, {.use_blocks = true, .per_block = 4});
  const std::size_t n = c.size();
  const std::size_t ng = pow2_at_least(4 * N + 2 * n + 8);
  const auto w = evaluate_grid(pt.weight.density, ng);
  const double L = spec.L;
  for (const auto& blk : spec.by_block)
    for (const auto& e : blk) {
      if (e.block == Block::cos_even && e.index_in_block == 0) continue;
      Branch b{e.block, e.index_in_block, e.sigma * L, Vector(n, 0.0)};
      const auto phi = evaluate_grid(e.trace, ng);
      std::vector<double> q(ng);
      for (std::size_t j = 0; j < ng; ++j) q[j] = (1.0 / L - phi[j] * phi[j]) * w[j];
      const TrigSeries qs = project_samples(q, 2 * n);
      for (std::size_t k = 0; k < n; ++k) b.grad[k] = b.value * kPi * qs.a(2 * (k + 1));
      pt.branches.push_back(std::move(b));
    }
  std::sort(pt.branches.begin(), pt.branches.end(),
            [](const Branch& a, const Branch& b) { return a.value < b.value; });
  pt.E = h_value(params, pt.branches[0].value, pt.branches[1].value);
  return pt;
}

struct HessianOfH {
  double xx, xy, yy;
};

HessianOfH h_hessian(const FunctionalParams& p, double x, double y) {
  const double s = p.s, t = p.t;
  const double u = std::pow(x, -s) + t * std::pow(y, -s);
  const double a = (1.0 - s) * std::pow(u, 1.0 / s - 2.0), b = (s + 1.0) * std::pow(u, 1.0 / s - 1.0);
  return {a * std::pow(x, -2 * s - 2) + b * std::pow(x, -s - 2),
          a * t * std::pow(x, -s - 1) * std::pow(y, -s - 1),
          a * t * t * std::pow(y, -2 * s - 2) + b * t * std::pow(y, -s - 2)};
}

std::vector<Piece> build_pieces(const Point& pt, const FunctionalParams& params, double window) {
  const auto& br = pt.branches;
  const double l1 = br[0].value, l2 = br[1].value;
  std::vector<Piece> out;
  for (std::size_t i = 0; i < br.size() && br[i].value <= l1 * (1 + window); ++i)
    for (std::size_t j = 0; j < br.size() && br[j].value <= l2 * (1 + window); ++j) {
      if (i == j || br[i].value > br[j].value + window * l2) continue;
      Piece p{i, j, h_value(params, br[i].value, br[j].value), {}};
      const auto [d1, d2] = h_partials(params, br[i].value, br[j].value);
      p.g.resize(br[i].grad.size());
      for (std::size_t k = 0; k < p.g.size(); ++k) p.g[k] = d1 * br[i].grad[k] + d2 * br[j].grad[k];
      out.push_back(std::move(p));
    }
  // keep the largest values when many branches crowd the windows
  std::sort(out.begin(), out.end(), [](const Piece& a, const Piece& b) { return a.f > b.f; });
  if (out.size() > 8) out.resize(8);
  return out;
}

// max_{lambda in simplex} f.lambda - lambda^T Q lambda / 2, by support enumeration.
Vector simplex_qp(const Vector& f, const Matrix& Q) {
  const std::size_t m = f.size();
  double qscale = 0.0;
  for (std::size_t i = 0; i < m; ++i) qscale = std::max(qscale, Q(i, i));
  const double reg = 1e-13 * (1.0 + qscale);
  Vector best(m, 0.0);
  double best_val = -std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<std::size_t> S;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) S.push_back(i);
    const std::size_t k = S.size();
    Matrix M(k + 1, k + 2, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) M(a, b) = Q(S[a], S[b]) + (a == b ? reg : 0.0);
      M(a, k) = 1.0;
      M(k, a) = 1.0;
      M(a, k + 1) = f[S[a]];
    }
    M(k, k + 1) = 1.0;
    bool singular = false;
    for (std::size_t col = 0; col <= k; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r <= k; ++r)
        if (std::abs(M(r, col)) > std::abs(M(piv, col))) piv = r;
      if (std::abs(M(piv, col)) < 1e-300) {
        singular = true;
        break;
      }
      for (std::size_t q = 0; q < k + 2; ++q) std::swap(M(piv, q), M(col, q));
      for (std::size_t r = 0; r <= k; ++r) {
        if (r == col) continue;
        const double fac = M(r, col) / M(col, col);
        for (std::size_t q = col; q < k + 2; ++q) M(r, q) -= fac * M(col, q);
      }
    }
    if (singular) continue;
    Vector lam(m, 0.0);
    bool ok = true;
    for (std::size_t a = 0; a < k; ++a) {
      lam[S[a]] = M(a, k + 1) / M(a, a);
      if (lam[S[a]] < -1e-12) ok = false;
      lam[S[a]] = std::max(0.0, lam[S[a]]);
    }
    if (!ok) continue;
    double val = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      val += f[i] * lam[i];
      for (std::size_t j = 0; j < m; ++j) val -= 0.5 * lam[i] * Q(i, j) * lam[j];
    }
    if (val > best_val) {
      best_val = val;
      best = lam;
    }
  }
  return best;
}

struct Stationarity {
  double norm = 0.0;
  double gap = 0.0;
};

// Min-norm element of the hull of gradients of pieces within rel of the maximum.
Stationarity stationarity(const std::vector<Piece>& pieces, double E, double rel = 1e-6) {
  std::vector<const Piece*> act;
  double lo = E;
  for (const auto& p : pieces)
    if (p.f >= E - rel * std::abs(E)) {
      act.push_back(&p);
      lo = std::min(lo, p.f);
    }
  if (act.empty()) return {std::numeric_limits<double>::infinity(), 0.0};
  const std::size_t m = act.size();
  Matrix Q(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) Q(i, j) = dot(act[i]->g, act[j]->g);
  const Vector lam = simplex_qp(Vector(m, 0.0), Q);
  Vector g(act[0]->g.size(), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += lam[i] * act[i]->g[k];
  return {norm2(g), E - lo};
}

// Finite-difference Hessians of the branches used by the pieces.
std::map<std::size_t, Matrix> branch_hessians(const Point& pt, const std::vector<Piece>& pieces,
                                              const FunctionalParams& params, std::size_t N) {
  std::map<std::size_t, Matrix> H;
  for (const auto& p : pieces) {
    H.emplace(p.b1, Matrix(pt.c.size(), pt.c.size()));
    H.emplace(p.b2, Matrix(pt.c.size(), pt.c.size()));
  }
  const std::size_t n = pt.c.size();
  const double step = 1e-5;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> c = pt.c;
    c[j] += step;
    const Point q = evaluate_point(c, params, N);
    for (auto& [bi, M] : H) {
      const Branch& b = pt.branches[bi];
      const auto it = std::find_if(q.branches.begin(), q.branches.end(), [&](const Branch& x) {
        return x.block == b.block && x.index == b.index;
      });
      if (it == q.branches.end()) fail(ErrorKind::resolution, "branch lost during differencing");
      for (std::size_t k = 0; k < n; ++k) M(k, j) = (it->grad[k] - b.grad[k]) / step;
    }
  }
  for (auto& [bi, M] : H)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) M(i, j) = M(j, i) = 0.5 * (M(i, j) + M(j, i));
  return H;
}

Matrix piece_hessian(const Piece& p, const Point& pt, const std::map<std::size_t, Matrix>& Hb,
                     const FunctionalParams& params) {
  const Branch& x = pt.branches[p.b1];
  const Branch& y = pt.branches[p.b2];
  const auto [d1, d2] = h_partials(params, x.value, y.value);
  const auto hh = h_hessian(params, x.value, y.value);
  const std::size_t n = pt.c.size();
  Matrix M(n, n);
  const Matrix& H1 = Hb.at(p.b1);
  const Matrix& H2 = Hb.at(p.b2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      M(i, j) = d1 * H1(i, j) + d2 * H2(i, j) + hh.xx * x.grad[i] * x.grad[j] +
                hh.xy * (x.grad[i] * y.grad[j] + y.grad[i] * x.grad[j]) + hh.yy * y.grad[i] * y.grad[j];
  return M;
}

// Inverse of |H| (eigenvalues floored) plus the proximal term 1/tau.
Matrix regularized_inverse(const Matrix& H, double tau) {
  const std::size_t n = H.rows();
  const EigenSystem es = symmetric_eigen(H, n);
  double big = 0.0;
  for (double v : es.values) big = std::max(big, std::abs(v));
  const double floor = 1e-8 * std::max(1.0, big);
  Matrix inv(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = 1.0 / (std::max(std::abs(es.values[k]), floor) + 1.0 / tau);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) inv(i, j) += d * es.vectors(i, k) * es.vectors(j, k);
  }
  return inv;
}

struct Step {
  Vector d;
  Vector lambda;
  double predicted = 0.0;
};

Step model_step(const std::vector<Piece>& pieces, const Matrix& Hinv, double E) {
  const std::size_t m = pieces.size(), n = Hinv.rows();
  std::vector<Vector> HG(m);
  for (std::size_t i = 0; i < m; ++i) HG[i] = Hinv * pieces[i].g;
  Matrix Q(m, m);
  Vector f(m);
  for (std::size_t i = 0; i < m; ++i) {
    f[i] = pieces[i].f - E;
    for (std::size_t j = 0; j < m; ++j) Q(i, j) = dot(pieces[i].g, HG[j]);
  }
  Step st;
  st.lambda = simplex_qp(f, Q);
  st.d.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < n; ++k) st.d[k] -= st.lambda[i] * HG[i][k];
  double model = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) model = std::max(model, f[i] + dot(pieces[i].g, st.d));
  st.predicted = -model;
  return st;
}

struct RunState {
  Point pt;
  std::vector<double> objective;
  std::vector<TraceRow> trace;
  std::size_t iterations = 0;
  bool converged = false;
  std::string status;
  std::string message;
  double subgrad = 0.0, gap = 0.0;
};

void descend(RunState& rs, const FunctionalParams& params, const OptimizerConfig& cfg, std::size_t N) {
  double tau = cfg.step_init;
  double window = 1e-3;
  const std::size_t n = rs.pt.c.size();
  if (rs.objective.empty()) rs.objective.push_back(rs.pt.E);
  for (;;) {
    const auto pieces = build_pieces(rs.pt, params, window);
    const auto stat = stationarity(pieces, rs.pt.E);
    rs.subgrad = stat.norm;
    rs.gap = stat.gap;
    if (stat.norm <= cfg.grad_tol) {
      rs.converged = true;
      rs.status = "converged";
      return;
    }
    if (rs.iterations >= cfg.max_iters) {
      rs.status = "max_iters";
      return;
    }
    Matrix Hinv(n, n);
    if (cfg.newton) {
      const auto Hb = branch_hessians(rs.pt, pieces, params, N);
      std::vector<Matrix> Hp;
      for (const auto& p : pieces) Hp.push_back(piece_hessian(p, rs.pt, Hb, params));
      // multipliers from a proximal model, then the Lagrangian curvature
      Matrix prox(n, n);
      for (std::size_t i = 0; i < n; ++i) prox(i, i) = tau;
      Vector lam = model_step(pieces, prox, rs.pt.E).lambda;
      for (int pass = 0; pass < 2; ++pass) {
        Matrix H(n, n);
        for (std::size_t i = 0; i < pieces.size(); ++i)
          for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) H(a, b) += lam[i] * Hp[i](a, b);
        Hinv = regularized_inverse(H, tau);
        if (pass == 0) lam = model_step(pieces, Hinv, rs.pt.E).lambda;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) Hinv(i, i) = tau;
    }
    const Step st = model_step(pieces, Hinv, rs.pt.E);
    if (!(st.predicted > 1e-15 * std::abs(rs.pt.E))) {
      if (window > 1e-9) {
        window *= 0.1;
        continue;
      }
      rs.status = "stalled";
      rs.message = "no predicted decrease at minimal window";
      return;
    }
    double alpha = 1.0;
    bool accepted = false;
    Point trial;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      std::vector<double> c = rs.pt.c;
      for (std::size_t k = 0; k < n; ++k) c[k] += alpha * st.d[k];
      try {
        trial = evaluate_point(c, params, N);
      } catch (const Error&) {
        continue;
      }
      if (trial.E <= rs.pt.E - cfg.armijo_factor * alpha * st.predicted) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      tau *= 0.1;
      window *= 0.1;
      if (window < 1e-12) {
        rs.status = "stalled";
        rs.message = "line search failed at minimal step (possible multiplet kink)";
        return;
      }
      continue;
    }
    ++rs.iterations;
    rs.trace.push_back({rs.iterations, trial.E, stat.norm, stat.gap, alpha, trial.branches[0].value,
                        trial.branches[1].value});
    rs.pt = std::move(trial);
    rs.objective.push_back(rs.pt.E);
    tau = alpha == 1.0 ? std::min(tau * 4.0, 1e8) : std::max(tau * alpha, 1e-8);
    window = std::min(window * 10.0, 1e-3);
  }
}

bool degenerate_first(const Point& pt) {
  return pt.branches[1].value - pt.branches[0].value <= 1e-7 * (1.0 + pt.branches[0].value);
}

}  // namespace

std::size_t OptimizerConfig::effective_N() const {
  return solver_N ? solver_N : std::max<std::size_t>(4 * n_modes, 64);
}

void OptimizerConfig::validate() const {
  if (n_modes < 1) fail(ErrorKind::config, "n_modes must be at least 1");
  if (solver_N && solver_N < 4 * n_modes) fail(ErrorKind::config, "solver_N must be at least 4 n_modes");
  if (!(step_init > 0.0)) fail(ErrorKind::config, "step_init must be positive");
  if (!(armijo_factor > 0.0 && armijo_factor < 1.0)) fail(ErrorKind::config, "armijo_factor must lie in (0, 1)");
  if (!(grad_tol > 0.0)) fail(ErrorKind::config, "grad_tol must be positive");
  if (!(mass_tol > 0.0)) fail(ErrorKind::config, "mass_tol must be positive");
}

BoundaryWeight weight_from_coeffs(const std::vector<double>& c, std::size_t N) {
  std::vector<double> a(2 * c.size() + 1, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) a[2 * (k + 1)] = c[k];
  const BoundaryWeight w = BoundaryWeight::from_log(TrigSeries(std::move(a), {}), 2 * N);
  return w.scaled(2.0 * kPi / w.length());
}

std::vector<double> coeffs_from_weight(const BoundaryWeight& w, std::size_t n) {
  std::vector<double> c(n, 0.0);
  TrigSeries v;
  if (w.log_coeffs) {
    v = *w.log_coeffs;
  } else {
    const std::size_t ng = pow2_at_least(std::max<std::size_t>(8 * n + 8, 4 * w.density.n_modes() + 4));
    auto vals = evaluate_grid(w.density, ng);
    for (auto& x : vals) x = std::log(x);
    v = project_samples(vals, 2 * n);
  }
  for (std::size_t k = 0; k < n; ++k) c[k] = 2 * (k + 1) <= v.n_modes() ? v.a(2 * (k + 1)) : 0.0;
  return c;
}

OptimizationResult minimize(const FunctionalParams& params, const OptimizerConfig& cfg,
                            const BoundaryWeight& initial) {
  cfg.validate();
  if (initial.symmetry_class != Parity::even_both && initial.density.parity() != Parity::even_both)
    fail(ErrorKind::symmetry, "initial weight must be even in both axes");
  const std::size_t N = cfg.effective_N();
  OptimizationResult res;
  RunState rs;
  rs.pt = evaluate_point(coeffs_from_weight(initial, cfg.n_modes), params, N);
  try {
    descend(rs, params, cfg, N);
    if (degenerate_first(rs.pt)) {
      // the max model does not describe a degenerate first eigenvalue; retry
      // from a seeded perturbation and keep the lower objective
      std::mt19937_64 rng(cfg.seed);
      std::normal_distribution<double> nd(0.0, 1e-3);
      std::vector<double> c = rs.pt.c;
      for (auto& x : c) x += nd(rng);
      RunState alt;
      alt.pt = evaluate_point(c, params, N);
      descend(alt, params, cfg, N);
      if (alt.pt.E < rs.pt.E - 1e-12 * std::abs(rs.pt.E)) {
        alt.iterations += rs.iterations;
        alt.objective.insert(alt.objective.begin(), rs.objective.begin(), rs.objective.end());
        rs = std::move(alt);
      }
    }
  } catch (const Error& e) {
    rs.status = "solver_failure";
    rs.message = e.what();
  }
  res.coeffs = rs.pt.c;
  res.objective_trace = rs.objective;
  res.trace = rs.trace;
  res.iterations = rs.iterations;
  res.converged = rs.converged;
  res.status = rs.status;
  res.message = rs.message;
  res.subgrad_norm = rs.subgrad;
  res.kink_gap = rs.gap;
  res.weight = rs.pt.weight;
  res.spectrum = solve_spectrum(res.weight, N, 8);
  res.E = h_value(params, res.spectrum.normalized[1], res.spectrum.normalized[2]);
  res.L = res.spectrum.normalized[2];
  res.p = res.spectrum.normalized[1] / res.L;
  try {
    res.immersion = build_immersion(res.spectrum);
    res.mass_residuals = mass_residuals(*res.immersion, params);
    res.planarity_flag = res.immersion->planar();
  } catch (const Error& e) {
    res.mass_residuals = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    res.planarity_flag = false;
    if (res.message.empty()) res.message = std::string("immersion unavailable: ") + e.what();
  }
  return res;
}

std::pair<double, double> criticality_residuals(const OptimizationResult& r, const FunctionalParams& params) {
  if (!r.immersion) fail(ErrorKind::dependency, "criticality residuals need an immersion");
  return mass_residuals(*r.immersion, params);
}

SweepResult sweep_t(double s, const std::vector<double>& grid, const OptimizerConfig& cfg,
                    const BoundaryWeight& initial) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) fail(ErrorKind::config, "t grid must be strictly increasing");
  SweepResult out;
  BoundaryWeight start = initial;
  for (double t : grid) {
    const FunctionalParams params(s, t);
    OptimizationResult r = minimize(params, cfg, start);
    SweepRow row;
    row.t = t;
    row.sigma_bar1 = r.spectrum.normalized[1];
    row.sigma_bar2 = r.L;
    row.p = r.p;
    row.L = r.L;
    row.E = r.E;
    row.subgrad_norm = r.subgrad_norm;
    row.energy_ratio = row.sigma_bar1 * std::log(t) / (2.0 * kPi);
    row.gap_to_4pi = 4.0 * kPi - r.L;
    row.converged = r.converged;
    row.planar = r.planarity_flag;
    row.status = r.status;
    if (!out.rows.empty()) {
      const auto& prev = out.rows.back();
      row.monotone = row.sigma_bar1 <= prev.sigma_bar1 + 1e-6 && row.L >= prev.L - 1e-6;
    }
    out.all_monotone = out.all_monotone && row.monotone;
    start = r.weight;
    out.rows.push_back(row);
    out.results.push_back(std::move(r));
  }
  return out;
}

}  // namespace steklov
