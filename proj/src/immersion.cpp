#include "steklov/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

constexpr double kPi = std::numbers::pi;

const Eigenpair& block_pair(const SteklovSpectrum& s, Block b, std::size_t idx) {
  for (const auto& bl : s.by_block)
    if (!bl.empty() && bl.front().block == b) {
      if (idx >= bl.size()) break;
      return bl[idx];
    }
  fail(ErrorKind::structure, std::string("parity block ") + to_string(b) + " lacks the requested eigenpair");
}

// Lowest-frequency significant coefficient made positive.
TrigSeries canonical_sign(const TrigSeries& f) {
  double big = 0.0;
  for (std::size_t k = 0; k <= f.n_modes(); ++k) big = std::max({big, std::abs(f.a(k)), std::abs(f.b(k))});
  for (std::size_t k = 0; k <= f.n_modes(); ++k) {
    const double c = std::abs(f.a(k)) > 1e-6 * big ? f.a(k) : (std::abs(f.b(k)) > 1e-6 * big ? f.b(k) : 0.0);
    if (c != 0.0) return c < 0 ? f * -1.0 : f;
  }
  return f;
}

std::size_t pow2_at_least(std::size_t n) {
  std::size_t p = 4;
  while (p < n) p <<= 1;
  return p;
}

// Least squares of G x = 1 over x >= 0 by support enumeration (m <= 3).
std::vector<double> nnls_small(const std::vector<std::vector<double>>& cols) {
  const std::size_t m = cols.size(), n = cols[0].size();
  std::vector<double> best(m, 0.0);
  double best_res = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<std::size_t> S;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) S.push_back(i);
    const std::size_t k = S.size();
    std::vector<std::vector<double>> M(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b)
        for (std::size_t j = 0; j < n; ++j) M[a][b] += cols[S[a]][j] * cols[S[b]][j];
      for (std::size_t j = 0; j < n; ++j) M[a][k] += cols[S[a]][j];
    }
    // Gaussian elimination with partial pivoting
    bool singular = false;
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t p = c;
      for (std::size_t r = c + 1; r < k; ++r)
        if (std::abs(M[r][c]) > std::abs(M[p][c])) p = r;
      std::swap(M[p], M[c]);
      if (std::abs(M[c][c]) < 1e-300) {
        singular = true;
        break;
      }
      for (std::size_t r = 0; r < k; ++r) {
        if (r == c) continue;
        const double f = M[r][c] / M[c][c];
        for (std::size_t q = c; q <= k; ++q) M[r][q] -= f * M[c][q];
      }
    }
    if (singular) continue;
    std::vector<double> x(m, 0.0);
    bool feasible = true;
    for (std::size_t a = 0; a < k; ++a) {
      x[S[a]] = M[a][k] / M[a][a];
      if (x[S[a]] < 0.0) feasible = false;
    }
    if (!feasible) continue;
    double res = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double g = -1.0;
      for (std::size_t i = 0; i < m; ++i) g += cols[i][j] * x[i];
      res += g * g;
    }
    if (res < best_res) {
      best_res = res;
      best = x;
    }
  }
  return best;
}

struct FieldSample {
  double value, dx, dy;
};

FieldSample field(const TrigSeries& f, double r, double t) {
  const auto h = harmonic_extension(f, r, t);
  return {h.value, h.dx, h.dy};
}

// Values of the harmonic extension on the ring of radius r at n uniform angles.
std::vector<double> ring_values(const TrigSeries& f, double r, std::size_t n) {
  std::vector<double> a(f.cos_coeffs()), b(f.sin_coeffs());
  double rk = 1.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    rk *= r;
    a[k] *= rk;
    b[k] *= rk;
  }
  return evaluate_grid(TrigSeries(std::move(a), std::move(b)), n);
}

}  // namespace

bool Immersion::planar() const {
  if (!has_phi2) return true;
  const double n2 = alpha[2] * alpha[2];  // phi_2 is w-normalized
  return std::sqrt(n2) < 1e-6 * L;
}

Immersion build_immersion(const SteklovSpectrum& spec, const ImmersionOptions& opts) {
  if (spec.by_block.empty())
    fail(ErrorKind::structure, "immersion requires a parity-block spectrum of an even_both weight");
  if (spec.size() < 3) fail(ErrorKind::structure, "spectrum too short for an immersion");
  const Block b1 = spec.blocks[1];
  if (b1 != Block::cos_odd && b1 != Block::sin_odd)
    fail(ErrorKind::structure, std::string("first eigenfunction lies in block ") + to_string(b1));
  const Block other = b1 == Block::cos_odd ? Block::sin_odd : Block::cos_odd;
  const Eigenpair& e0 = block_pair(spec, b1, 0);
  const Eigenpair& e1 = block_pair(spec, other, 0);
  const Eigenpair& e2 = block_pair(spec, Block::cos_even, 1);
  const double s2 = spec.sigmas[2];
  const double tol = opts.multiplet_tol * (1.0 + s2);

  Immersion im;
  im.L = spec.L;
  im.quarter_rotated = b1 == Block::cos_odd;
  im.sigma = {e0.sigma, e1.sigma, e2.sigma};
  if (opts.strict) {
    if (std::abs(e1.sigma - s2) > tol)
      fail(ErrorKind::structure, "second eigenspace lacks the odd-in-x class (weight not critical)");
    im.has_phi2 = std::abs(e2.sigma - s2) <= tol;
  } else {
    im.has_phi2 = true;
  }
  const double rot = im.quarter_rotated ? 0.5 * kPi : 0.0;
  im.phi[0] = canonical_sign(e0.trace.rotated(rot));
  im.phi[1] = canonical_sign(e1.trace.rotated(rot));
  im.phi[2] = im.has_phi2 ? canonical_sign(e2.trace.rotated(rot)) : TrigSeries(0);
  im.weight = im.quarter_rotated ? spec.weight.rotated(rot) : spec.weight;
  if (!im.has_phi2) im.sigma[2] = s2;

  const std::size_t m = im.has_phi2 ? 3 : 2;
  std::size_t deg = 0;
  for (std::size_t i = 0; i < m; ++i) deg = std::max(deg, im.phi[i].n_modes());
  const std::size_t n = opts.fit_points ? opts.fit_points : pow2_at_least(std::max<std::size_t>(4 * deg + 4, 1024));
  std::vector<std::vector<double>> cols(m);
  for (std::size_t i = 0; i < m; ++i) {
    cols[i] = evaluate_grid(im.phi[i], n);
    for (auto& v : cols[i]) v = im.sigma[i] * v * v;
  }
  const auto x = nnls_small(cols);
  if (!(x[0] > 0.0) || !(x[1] > 0.0))
    fail(ErrorKind::infeasible, "no nonnegative scaling places the boundary on an ellipsoid");
  for (std::size_t i = 0; i < m; ++i) im.alpha[i] = std::sqrt(x[i]);
  im.ellipsoid_p = spec.sigmas[1] / s2;
  im.constraint_residual = verify_ellipsoid(im);
  return im;
}

std::pair<double, double> mass_residuals(const Immersion& im, const FunctionalParams& params) {
  const double sb1 = im.sigma[0] * im.L, sb2 = im.sigma[1] * im.L;
  const auto [T0, T12] = mass_fraction_targets(params, sb1, sb2);
  const double mu0 = im.sigma[0] * im.alpha[0] * im.alpha[0] / im.L;
  const double mu12 = (im.sigma[1] * im.alpha[1] * im.alpha[1] +
                       (im.has_phi2 ? im.sigma[2] * im.alpha[2] * im.alpha[2] : 0.0)) / im.L;
  return {std::abs(mu0 - T0) / T0, std::abs(mu12 - T12) / T12};
}

double verify_ellipsoid(const Immersion& im, std::size_t samples) {
  std::vector<double> acc(samples, -1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    if (i == 2 && !im.has_phi2) continue;
    const auto v = evaluate_grid(im.phi[i], samples);
    const double c = im.sigma[i] * im.alpha[i] * im.alpha[i];
    for (std::size_t j = 0; j < samples; ++j) acc[j] += c * v[j] * v[j];
  }
  double r = 0.0;
  for (double a : acc) r = std::max(r, std::abs(a));
  return r;
}

double verify_no_boundary_branch(const Immersion& im, std::size_t samples) {
  std::vector<double> sp(samples, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto v = evaluate_grid(im.component(i).derivative(), samples);
    for (std::size_t j = 0; j < samples; ++j) sp[j] += v[j] * v[j];
  }
  return std::sqrt(*std::min_element(sp.begin(), sp.end()));
}

double verify_conformality(const Immersion& im, const DiagnosticGrid& g) {
  const std::array<TrigSeries, 3> c{im.component(0), im.component(1), im.component(2)};
  double worst = 0.0;
  for (std::size_t i = 1; i <= g.radial; ++i) {
    const double r = static_cast<double>(i) / static_cast<double>(g.radial);
    for (std::size_t j = 0; j < g.angular; ++j) {
      const double t = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(g.angular);
      double E = 0, G = 0, F = 0;
      for (const auto& f : c) {
        const auto h = harmonic_extension(f, r, t);
        E += h.dx * h.dx;
        G += h.dy * h.dy;
        F += h.dx * h.dy;
      }
      if (E + G < 1e-300) continue;
      worst = std::max(worst, (std::abs(E - G) + 2.0 * std::abs(F)) / (E + G));
    }
  }
  return worst;
}

double verify_critical_weight(const Immersion& im, const BoundaryWeight& weight, std::size_t n) {
  std::vector<double> speed2(n, 0.0), den2(n, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    if (i == 2 && !im.has_phi2) continue;
    const TrigSeries c = im.component(i);
    const auto v = evaluate_grid(c, n);
    const auto d = evaluate_grid(c.derivative(), n);
    for (std::size_t j = 0; j < n; ++j) {
      speed2[j] += d[j] * d[j];
      den2[j] += im.sigma[i] * im.sigma[i] * v[j] * v[j];
    }
  }
  const auto w = evaluate_grid(weight.density, n);
  std::vector<double> rhs(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(den2[j] > 1e-300)) return std::numeric_limits<double>::infinity();
    rhs[j] = std::sqrt(speed2[j] / den2[j]);
  }
  const double mw = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(n);
  const double mr = std::accumulate(rhs.begin(), rhs.end(), 0.0) / static_cast<double>(n);
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = w[j] / mw, b = rhs[j] / mr;
    worst = std::max(worst, std::abs(a - b) / a);
  }
  return worst;
}

double verify_critical_weight(const Immersion& im, std::size_t n) {
  return verify_critical_weight(im, im.weight, n);
}

int winding_number(const std::vector<std::array<double, 2>>& curve) {
  double total = 0.0;
  const std::size_t n = curve.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& a = curve[j];
    const auto& b = curve[(j + 1) % n];
    double d = std::atan2(b[1], b[0]) - std::atan2(a[1], a[0]);
    while (d > kPi) d -= 2.0 * kPi;
    while (d < -kPi) d += 2.0 * kPi;
    total += d;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

int count_nodal_domains(const std::vector<std::vector<double>>& values, double center, double thr) {
  const std::size_t nr = values.size();
  if (nr == 0) return 0;
  const std::size_t nt = values[0].size();
  auto sgn = [thr](double v) { return v > thr ? 1 : (v < -thr ? -1 : 0); };
  std::vector<int> label(nr * nt, -1);
  int count = 0;
  std::vector<std::size_t> stack;
  const int cs = sgn(center);
  bool center_done = cs == 0;
  auto flood = [&](std::size_t start, int s, int id) {
    stack.push_back(start);
    label[start] = id;
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      const std::size_t i = c / nt, j = c % nt;
      std::size_t nb[4];
      int k = 0;
      nb[k++] = i * nt + (j + 1) % nt;
      nb[k++] = i * nt + (j + nt - 1) % nt;
      if (i + 1 < nr) nb[k++] = (i + 1) * nt + j;
      if (i > 0) nb[k++] = (i - 1) * nt + j;
      for (int q = 0; q < k; ++q) {
        const std::size_t m = nb[q];
        if (label[m] == -1 && sgn(values[m / nt][m % nt]) == s) {
          label[m] = id;
          stack.push_back(m);
        }
      }
      if (i == 0 && !center_done && s == cs) {
        // the center joins every same-sign cell of the innermost ring
        center_done = true;
        for (std::size_t jj = 0; jj < nt; ++jj)
          if (label[jj] == -1 && sgn(values[0][jj]) == s) {
            label[jj] = id;
            stack.push_back(jj);
          }
      }
    }
  };
  for (std::size_t c = 0; c < nr * nt; ++c) {
    const int s = sgn(values[c / nt][c % nt]);
    if (s == 0 || label[c] != -1) continue;
    flood(c, s, count++);
  }
  if (!center_done) ++count;  // isolated center component
  return count;
}

EmbeddingReport embedding_diagnostics(const Immersion& im, const DiagnosticGrid& g) {
  EmbeddingReport rep;
  const bool planar = im.planar();
  const TrigSeries e1 = planar ? im.component(0) : im.component(1);
  const TrigSeries e2 = planar ? im.component(1) : im.component(2);
  std::vector<std::array<double, 2>> curve;
  const std::size_t nb = g.boundary_samples;
  if (planar) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double t = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(nb);
      curve.push_back({e1(t), e2(t)});
    }
  } else {
    const std::size_t half = nb / 2;
    for (std::size_t j = 0; j < half; ++j) {
      const double t = kPi * static_cast<double>(j) / static_cast<double>(half);
      curve.push_back({e1(t), e2(t)});
    }
    for (std::size_t j = 0; j < half; ++j) {
      const double x = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(half);
      const double r = std::abs(x), t = x < 0 ? kPi : 0.0;
      curve.push_back({harmonic_extension(e1, r, t).value, harmonic_extension(e2, r, t).value});
    }
  }
  double big = 0.0, small = std::numeric_limits<double>::infinity();
  for (const auto& p : curve) {
    const double m = std::hypot(p[0], p[1]);
    big = std::max(big, m);
    small = std::min(small, m);
  }
  if (small <= 1e-10 * big) rep.step1_violation = "eta vanishes on the boundary of the half disk";
  const int raw = winding_number(curve);
  rep.winding = std::abs(raw);
  const double orient = raw < 0 ? -1.0 : 1.0;

  double jmin = std::numeric_limits<double>::infinity();
  const double span = planar ? 2.0 * kPi : kPi;
  const double rmax = 1.0 - 1.0 / static_cast<double>(g.radial);
  for (std::size_t i = 0; i <= g.radial; ++i) {
    const double r = i == g.radial ? 1.0 : rmax * (static_cast<double>(i) + 0.5) / static_cast<double>(g.radial);
    for (std::size_t j = 0; j < g.angular; ++j) {
      const double t = span * (static_cast<double>(j) + 0.5) / static_cast<double>(g.angular);
      const auto a = field(e1, r, t), b = field(e2, r, t);
      jmin = std::min(jmin, orient * (a.dx * b.dy - a.dy * b.dx));
    }
  }
  rep.jacobian_min = jmin;

  const std::size_t nr = g.nodal_resolution, nt = g.nodal_resolution;
  for (std::size_t c = 0; c < 3; ++c) {
    if (c == 2 && planar) {
      rep.nodal_counts[c] = 0;
      continue;
    }
    const TrigSeries f = im.component(c);
    std::vector<std::vector<double>> vals(nr);
    for (std::size_t i = 0; i < nr; ++i)
      vals[i] = ring_values(f, static_cast<double>(i + 1) / static_cast<double>(nr), nt);
    rep.nodal_counts[c] = count_nodal_domains(vals, f.a(0));
  }
  if (!planar) {
    const TrigSeries f = im.component(2);
    double m = std::min(std::abs(f(0.5 * kPi)), std::abs(f(1.5 * kPi)));
    for (std::size_t j = 0; j <= 512; ++j) {
      const double x = -1.0 + 2.0 * static_cast<double>(j) / 512.0;
      m = std::min(m, std::abs(harmonic_extension(f, std::abs(x), x < 0 ? kPi : 0.0).value));
    }
    rep.phi2_axis_min = m;
  }
  return rep;
}

double immersion_area(const Immersion& im) {
  double e = 0.0;
  for (std::size_t i = 0; i < 3; ++i) e += im.component(i).dirichlet_energy();
  return 0.5 * e;
}

double verify_area_identity(const Immersion& im) {
  return std::abs(im.L - 2.0 * immersion_area(im)) / im.L;
}

Diagnostics diagnose(const Immersion& im, const DiagnosticGrid& g) {
  Diagnostics d;
  d.ellipsoid_residual = verify_ellipsoid(im, g.boundary_samples);
  d.conformality_residual = verify_conformality(im, g);
  d.min_boundary_speed = verify_no_boundary_branch(im, g.boundary_samples);
  const auto e = embedding_diagnostics(im, g);
  d.jacobian_min = e.jacobian_min;
  d.winding = e.winding;
  d.nodal_counts = e.nodal_counts;
  d.phi2_axis_min = e.phi2_axis_min;
  d.step1_violation = e.step1_violation;
  d.area = immersion_area(im);
  d.area_identity = verify_area_identity(im);
  d.critical_weight_mismatch = verify_critical_weight(im, g.boundary_samples);
  return d;
}

void export_surface(const Immersion& im, std::size_t resolution, const std::string& obj_path,
                    const std::string& csv_path, const std::string& header) {
  if (resolution < 1) fail(ErrorKind::input_domain, "export resolution must be positive");
  std::ofstream obj(obj_path);
  if (!obj) fail(ErrorKind::io, "cannot open " + obj_path + " for writing");
  obj.precision(17);
  if (!header.empty()) obj << "# " << header << "\n";
  const double scale = std::sqrt(im.sigma[1]);
  const std::array<TrigSeries, 3> c{im.component(0), im.component(1), im.component(2)};
  const std::size_t nt = 4 * resolution;
  auto vertex = [&](double r, double t) {
    obj << "v";
    for (const auto& f : c) obj << " " << scale * harmonic_extension(f, r, t).value;
    obj << "\n";
  };
  vertex(0.0, 0.0);
  for (std::size_t i = 1; i <= resolution; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      vertex(static_cast<double>(i) / static_cast<double>(resolution),
             2.0 * kPi * static_cast<double>(j) / static_cast<double>(nt));
  auto id = [nt](std::size_t ring, std::size_t j) { return 2 + (ring - 1) * nt + (j % nt); };
  for (std::size_t j = 0; j < nt; ++j) obj << "f 1 " << id(1, j) << " " << id(1, j + 1) << "\n";
  for (std::size_t i = 1; i < resolution; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      obj << "f " << id(i, j) << " " << id(i + 1, j) << " " << id(i + 1, j + 1) << "\n";
      obj << "f " << id(i, j) << " " << id(i + 1, j + 1) << " " << id(i, j + 1) << "\n";
    }
  if (!obj) fail(ErrorKind::io, "write failed for " + obj_path);

  std::ofstream csv(csv_path);
  if (!csv) fail(ErrorKind::io, "cannot open " + csv_path + " for writing");
  csv.precision(17);
  if (!header.empty()) csv << "# " << header << "\n";
  csv << "theta,x0,x1,x2\n";
  for (std::size_t j = 0; j < nt; ++j) {
    const double t = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(nt);
    csv << t;
    for (const auto& f : c) csv << "," << scale * f(t);
    csv << "\n";
  }
  if (!csv) fail(ErrorKind::io, "write failed for " + csv_path);
}

}  // namespace steklov
