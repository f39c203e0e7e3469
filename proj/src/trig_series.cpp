#include "steklov/trig_series.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place radix-2 FFT, forward sign exp(-i...).
void fft(std::vector<std::complex<double>>& x, bool inverse) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::size_t half = len / 2;
    std::vector<std::complex<double>> tw(half);
    for (std::size_t k = 0; k < half; ++k)
      tw[k] = {std::cos(ang * static_cast<double>(k)), std::sin(ang * static_cast<double>(k))};
    for (std::size_t i = 0; i < n; i += len)
      for (std::size_t k = 0; k < half; ++k) {
        const auto u = x[i + k];
        const auto v = x[i + k + half] * tw[k];
        x[i + k] = u + v;
        x[i + k + half] = u - v;
      }
  }
}

}  // namespace

const char* to_string(Parity p) {
  switch (p) {
    case Parity::none: return "none";
    case Parity::even_x: return "even_x";
    case Parity::even_y: return "even_y";
    case Parity::even_both: return "even_both";
    case Parity::odd_x_even_y: return "odd_x_even_y";
    case Parity::even_x_odd_y: return "even_x_odd_y";
    case Parity::odd_both: return "odd_both";
  }
  return "none";
}

TrigSeries::TrigSeries(std::size_t n_modes) : a_(n_modes + 1, 0.0), b_(n_modes + 1, 0.0) {
  detect_parity();
}

TrigSeries::TrigSeries(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : a_(std::move(cos_coeffs)), b_(std::move(sin_coeffs)) {
  if (a_.empty()) a_.push_back(0.0);
  const std::size_t n = std::max(a_.size(), b_.size());
  a_.resize(n, 0.0);
  b_.resize(n, 0.0);
  b_[0] = 0.0;
  detect_parity();
}

TrigSeries TrigSeries::constant(double c) {
  TrigSeries s(0);
  s.a_[0] = c;
  s.detect_parity();
  return s;
}

TrigSeries TrigSeries::cosine(std::size_t k, double amp) {
  TrigSeries s(k);
  s.a_[k] = amp;
  s.detect_parity();
  return s;
}

TrigSeries TrigSeries::sine(std::size_t k, double amp) {
  TrigSeries s(k);
  if (k > 0) s.b_[k] = amp;
  s.detect_parity();
  return s;
}

void TrigSeries::set_a(std::size_t k, double v) {
  if (k >= a_.size()) {
    a_.resize(k + 1, 0.0);
    b_.resize(k + 1, 0.0);
  }
  a_[k] = v;
  detect_parity();
}

void TrigSeries::set_b(std::size_t k, double v) {
  if (k == 0) return;
  if (k >= a_.size()) {
    a_.resize(k + 1, 0.0);
    b_.resize(k + 1, 0.0);
  }
  b_[k] = v;
  detect_parity();
}

void TrigSeries::detect_parity(double tol) {
  double scale = 1.0;
  for (std::size_t k = 0; k < a_.size(); ++k)
    scale = std::max({scale, std::abs(a_[k]), std::abs(b_[k])});
  const double thr = tol * scale;
  bool a_even = false, a_odd = false, b_even = false, b_odd = false;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    if (std::abs(a_[k]) > thr) (k % 2 == 0 ? a_even : a_odd) = true;
    if (k > 0 && std::abs(b_[k]) > thr) (k % 2 == 0 ? b_even : b_odd) = true;
  }
  const bool any_b = b_even || b_odd;
  const bool any_a = a_even || a_odd;
  if (!any_b && !a_odd) parity_ = Parity::even_both;
  else if (!any_b && !a_even) parity_ = Parity::odd_x_even_y;
  else if (!any_a && !b_even) parity_ = Parity::even_x_odd_y;
  else if (!any_a && !b_odd) parity_ = Parity::odd_both;
  else if (!any_b) parity_ = Parity::even_y;
  else if (!a_odd && !b_even) parity_ = Parity::even_x;
  else parity_ = Parity::none;
}

double TrigSeries::operator()(double theta) const {
  const double c1 = std::cos(theta), s1 = std::sin(theta);
  double c = 1.0, s = 0.0, v = a_[0];
  for (std::size_t k = 1; k < a_.size(); ++k) {
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
    v += a_[k] * c + b_[k] * s;
  }
  return v;
}

double TrigSeries::derivative(double theta) const {
  const double c1 = std::cos(theta), s1 = std::sin(theta);
  double c = 1.0, s = 0.0, v = 0.0;
  for (std::size_t k = 1; k < a_.size(); ++k) {
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
    v += static_cast<double>(k) * (b_[k] * c - a_[k] * s);
  }
  return v;
}

TrigSeries TrigSeries::derivative() const {
  std::vector<double> a(a_.size(), 0.0), b(b_.size(), 0.0);
  for (std::size_t k = 1; k < a_.size(); ++k) {
    a[k] = static_cast<double>(k) * b_[k];
    b[k] = -static_cast<double>(k) * a_[k];
  }
  return TrigSeries(std::move(a), std::move(b));
}

TrigSeries TrigSeries::rotated(double alpha) const {
  std::vector<double> a(a_.size()), b(b_.size());
  a[0] = a_[0];
  b[0] = 0.0;
  for (std::size_t k = 1; k < a_.size(); ++k) {
    const double ck = std::cos(static_cast<double>(k) * alpha);
    const double sk = std::sin(static_cast<double>(k) * alpha);
    a[k] = a_[k] * ck + b_[k] * sk;
    b[k] = b_[k] * ck - a_[k] * sk;
  }
  return TrigSeries(std::move(a), std::move(b));
}

TrigSeries TrigSeries::truncated(std::size_t n) const {
  return resized(std::min(n, n_modes()));
}

TrigSeries TrigSeries::resized(std::size_t n) const {
  std::vector<double> a = a_, b = b_;
  a.resize(n + 1, 0.0);
  b.resize(n + 1, 0.0);
  return TrigSeries(std::move(a), std::move(b));
}

double TrigSeries::integral() const { return 2.0 * kPi * a_[0]; }

double TrigSeries::dirichlet_energy() const {
  double e = 0.0;
  for (std::size_t k = 1; k < a_.size(); ++k)
    e += static_cast<double>(k) * (a_[k] * a_[k] + b_[k] * b_[k]);
  return kPi * e;
}

TrigSeries& TrigSeries::operator+=(const TrigSeries& o) {
  if (o.a_.size() > a_.size()) {
    a_.resize(o.a_.size(), 0.0);
    b_.resize(o.b_.size(), 0.0);
  }
  for (std::size_t k = 0; k < o.a_.size(); ++k) {
    a_[k] += o.a_[k];
    b_[k] += o.b_[k];
  }
  detect_parity();
  return *this;
}

TrigSeries& TrigSeries::operator-=(const TrigSeries& o) {
  if (o.a_.size() > a_.size()) {
    a_.resize(o.a_.size(), 0.0);
    b_.resize(o.b_.size(), 0.0);
  }
  for (std::size_t k = 0; k < o.a_.size(); ++k) {
    a_[k] -= o.a_[k];
    b_[k] -= o.b_[k];
  }
  detect_parity();
  return *this;
}

TrigSeries& TrigSeries::operator*=(double c) {
  for (auto& x : a_) x *= c;
  for (auto& x : b_) x *= c;
  detect_parity();
  return *this;
}

std::size_t grid_size_for(std::size_t N) {
  std::size_t n = 4;
  while (n < 4 * N + 4) n <<= 1;
  return n;
}

QuadratureGrid::QuadratureGrid(std::size_t N) {
  n_points = grid_size_for(N);
  weight = 2.0 * kPi / static_cast<double>(n_points);
}

QuadratureGrid QuadratureGrid::with_points(std::size_t n) {
  QuadratureGrid g(0);
  g.n_points = n;
  g.weight = 2.0 * kPi / static_cast<double>(n);
  return g;
}

double QuadratureGrid::angle(std::size_t j) const {
  return 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_points);
}

std::vector<double> QuadratureGrid::angles() const {
  std::vector<double> t(n_points);
  for (std::size_t j = 0; j < n_points; ++j) t[j] = angle(j);
  return t;
}

TrigSeries project_samples(const std::vector<double>& f, std::size_t N) {
  const std::size_t n = f.size();
  if (n < 2 * N + 1)
    fail(ErrorKind::input_domain, "too few samples for projection of degree " + std::to_string(N));
  for (double v : f)
    if (!std::isfinite(v)) fail(ErrorKind::input_domain, "non-finite sample value in projection");
  std::vector<double> a(N + 1, 0.0), b(N + 1, 0.0);
  const double inv = 1.0 / static_cast<double>(n);
  if (is_power_of_two(n)) {
    std::vector<std::complex<double>> x(f.begin(), f.end());
    fft(x, false);
    a[0] = x[0].real() * inv;
    for (std::size_t k = 1; k <= N; ++k) {
      a[k] = 2.0 * x[k].real() * inv;
      b[k] = -2.0 * x[k].imag() * inv;
    }
  } else {
    std::vector<double> ct(n), st(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = 2.0 * kPi * static_cast<double>(j) * inv;
      ct[j] = std::cos(t);
      st[j] = std::sin(t);
    }
    for (std::size_t k = 0; k <= N; ++k) {
      double sa = 0.0, sb = 0.0;
      std::size_t idx = 0;
      for (std::size_t j = 0; j < n; ++j) {
        sa += f[j] * ct[idx];
        sb += f[j] * st[idx];
        idx += k;
        if (idx >= n) idx -= n;
      }
      a[k] = (k == 0 ? 1.0 : 2.0) * sa * inv;
      b[k] = k == 0 ? 0.0 : 2.0 * sb * inv;
    }
  }
  return TrigSeries(std::move(a), std::move(b));
}

TrigSeries project(const std::function<double(double)>& sample_fn, std::size_t N) {
  const QuadratureGrid g(N);
  std::vector<double> f(g.n_points);
  for (std::size_t j = 0; j < g.n_points; ++j) f[j] = sample_fn(g.angle(j));
  return project_samples(f, N);
}

double evaluate(const TrigSeries& s, double theta) { return s(theta); }

std::vector<double> evaluate_grid(const TrigSeries& s, std::size_t n) {
  const std::size_t N = s.n_modes();
  std::vector<double> out(n);
  if (is_power_of_two(n) && n > 2 * N) {
    std::vector<std::complex<double>> x(n, {0.0, 0.0});
    x[0] = s.a(0);
    for (std::size_t k = 1; k <= N; ++k) {
      x[k] = {0.5 * s.a(k), -0.5 * s.b(k)};
      x[n - k] = {0.5 * s.a(k), 0.5 * s.b(k)};
    }
    fft(x, true);
    for (std::size_t j = 0; j < n; ++j) out[j] = x[j].real();
  } else {
    for (std::size_t j = 0; j < n; ++j)
      out[j] = s(2.0 * kPi * static_cast<double>(j) / static_cast<double>(n));
  }
  return out;
}

HarmonicValue harmonic_extension(const TrigSeries& f, double r, double theta) {
  if (!(r >= 0.0 && r <= 1.0))
    fail(ErrorKind::input_domain, "harmonic_extension radius outside [0,1]");
  const double c1 = std::cos(theta), s1 = std::sin(theta);
  double c = 1.0, s = 0.0;
  double rk1 = 1.0;  // r^(k-1)
  HarmonicValue h{f.a(0), 0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 1; k <= f.n_modes(); ++k) {
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
    const double ak = f.a(k), bk = f.b(k);
    const double kk = static_cast<double>(k);
    h.value += rk1 * r * (ak * c + bk * s);
    h.dr += kk * rk1 * (ak * c + bk * s);
    h.dtheta_over_r += kk * rk1 * (bk * c - ak * s);
    rk1 *= r;
  }
  h.dx = h.dr * c1 - h.dtheta_over_r * s1;
  h.dy = h.dr * s1 + h.dtheta_over_r * c1;
  return h;
}

std::size_t basis_size(std::size_t N) { return 2 * N + 1; }

std::vector<BasisMode> full_basis(std::size_t N) {
  std::vector<BasisMode> m;
  m.push_back({false, 0});
  for (std::size_t k = 1; k <= N; ++k) {
    m.push_back({false, k});
    m.push_back({true, k});
  }
  return m;
}

double grid_minimum(const TrigSeries& s, std::size_t min_points) {
  std::size_t n = std::max(grid_size_for(s.n_modes()), min_points);
  std::size_t p = 4;
  while (p < n) p <<= 1;
  const auto v = evaluate_grid(s, p);
  return *std::min_element(v.begin(), v.end());
}

Matrix mass_matrix(const TrigSeries& w, const std::vector<BasisMode>& modes) {
  std::size_t kmax = 0;
  for (const auto& m : modes) kmax = std::max(kmax, m.k);
  if (!(grid_minimum(w, grid_size_for(kmax)) > 0.0))
    fail(ErrorKind::positivity, "weight is not strictly positive on the quadrature grid");
  // int cos(j t) w and int sin(j t) w
  auto C = [&](long j) { j = std::labs(j); return j == 0 ? 2.0 * kPi * w.a(0) : kPi * w.a(static_cast<std::size_t>(j)); };
  auto S = [&](long j) {
    if (j == 0) return 0.0;
    const double v = kPi * w.b(static_cast<std::size_t>(std::labs(j)));
    return j > 0 ? v : -v;
  };
  const std::size_t n = modes.size();
  Matrix B(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const long m = static_cast<long>(modes[i].k), q = static_cast<long>(modes[j].k);
      double v;
      if (!modes[i].is_sin && !modes[j].is_sin) v = 0.5 * (C(m - q) + C(m + q));
      else if (modes[i].is_sin && modes[j].is_sin) v = 0.5 * (C(m - q) - C(m + q));
      else if (modes[j].is_sin) v = 0.5 * (S(q + m) + S(q - m));
      else v = 0.5 * (S(m + q) + S(m - q));
      B(i, j) = v;
      B(j, i) = v;
    }
  return B;
}

Matrix mass_matrix(const TrigSeries& w, std::size_t N) { return mass_matrix(w, full_basis(N)); }

double weighted_inner(const TrigSeries& f, const TrigSeries& g, const TrigSeries& w) {
  const std::size_t deg = f.n_modes() + g.n_modes() + w.n_modes();
  std::size_t n = 4;
  while (n <= deg + 1) n <<= 1;
  const auto fv = evaluate_grid(f, n), gv = evaluate_grid(g, n), wv = evaluate_grid(w, n);
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += fv[j] * gv[j] * wv[j];
  return s * 2.0 * kPi / static_cast<double>(n);
}

}  // namespace steklov
