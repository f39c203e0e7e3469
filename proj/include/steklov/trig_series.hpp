#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "steklov/linalg.hpp"

namespace steklov {

// Symmetry under y -> -y (theta -> -theta) and x -> -x (theta -> pi - theta).
enum class Parity {
  none,
  even_x,        // f(-x,y) = f(x,y)
  even_y,        // f(x,-y) = f(x,y): cosines only
  even_both,     // cos 2k
  odd_x_even_y,  // cos (2k+1)
  even_x_odd_y,  // sin (2k+1)
  odd_both       // sin 2k
};

const char* to_string(Parity p);

// Truncated real Fourier series a_0 + sum_k a_k cos k t + b_k sin k t.
// sin_coeffs()[0] is kept at zero so both arrays are indexed by frequency.
class TrigSeries {
 public:
  TrigSeries() : TrigSeries(0) {}
  explicit TrigSeries(std::size_t n_modes);
  TrigSeries(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

  static TrigSeries constant(double c);
  static TrigSeries cosine(std::size_t k, double amp = 1.0);
  static TrigSeries sine(std::size_t k, double amp = 1.0);

  std::size_t n_modes() const { return a_.size() - 1; }
  const std::vector<double>& cos_coeffs() const { return a_; }
  const std::vector<double>& sin_coeffs() const { return b_; }
  double a(std::size_t k) const { return k < a_.size() ? a_[k] : 0.0; }
  double b(std::size_t k) const { return k < b_.size() && k > 0 ? b_[k] : 0.0; }
  void set_a(std::size_t k, double v);
  void set_b(std::size_t k, double v);
  Parity parity() const { return parity_; }

  // Re-detect the parity from the sparsity pattern.
  void detect_parity(double tol = 1e-12);

  double operator()(double theta) const;
  double derivative(double theta) const;
  TrigSeries derivative() const;
  // f(theta + alpha)
  TrigSeries rotated(double alpha) const;
  TrigSeries truncated(std::size_t n) const;
  TrigSeries resized(std::size_t n) const;

  double mean() const { return a_[0]; }
  double integral() const;
  // Dirichlet energy of the harmonic extension: pi * sum k (a_k^2 + b_k^2).
  double dirichlet_energy() const;

  TrigSeries& operator+=(const TrigSeries& o);
  TrigSeries& operator-=(const TrigSeries& o);
  TrigSeries& operator*=(double c);
  friend TrigSeries operator+(TrigSeries l, const TrigSeries& r) { return l += r; }
  friend TrigSeries operator-(TrigSeries l, const TrigSeries& r) { return l -= r; }
  friend TrigSeries operator*(TrigSeries l, double c) { return l *= c; }
  friend TrigSeries operator*(double c, TrigSeries l) { return l *= c; }

 private:
  std::vector<double> a_;
  std::vector<double> b_;
  Parity parity_ = Parity::none;
};

struct QuadratureGrid {
  explicit QuadratureGrid(std::size_t N);
  static QuadratureGrid with_points(std::size_t n_points);
  std::size_t n_points = 0;
  double weight = 0.0;
  double angle(std::size_t j) const;
  std::vector<double> angles() const;
};

// Sample count used for a degree-N projection.
std::size_t grid_size_for(std::size_t N);

TrigSeries project(const std::function<double(double)>& sample_fn, std::size_t N);
// Projection from precomputed uniform samples (n >= 2N+1).
TrigSeries project_samples(const std::vector<double>& samples, std::size_t N);

double evaluate(const TrigSeries& s, double theta);
// Values on the uniform grid of n points.
std::vector<double> evaluate_grid(const TrigSeries& s, std::size_t n);

struct HarmonicValue {
  double value;
  double dr;
  double dtheta_over_r;
  double dx;
  double dy;
};

HarmonicValue harmonic_extension(const TrigSeries& boundary, double r, double theta);

// Real basis ordering: 1, cos t, sin t, cos 2t, sin 2t, ...
std::size_t basis_size(std::size_t N);

// Weighted L2 inner product on the circle of two series against a weight,
// exact for the given truncations.
double weighted_inner(const TrigSeries& f, const TrigSeries& g, const TrigSeries& w);

// One real basis function cos(k t) or sin(k t).
struct BasisMode {
  bool is_sin;
  std::size_t k;
};

std::vector<BasisMode> full_basis(std::size_t N);

// B_mn = int e_m e_n w dtheta over the given modes; exact for the weight's
// truncation. Throws a positivity error if w <= 0 on the check grid.
Matrix mass_matrix(const TrigSeries& weight, const std::vector<BasisMode>& modes);
Matrix mass_matrix(const TrigSeries& weight, std::size_t N);

// Minimum of the series on a uniform grid fine enough for its degree.
double grid_minimum(const TrigSeries& s, std::size_t min_points = 0);

}  // namespace steklov
