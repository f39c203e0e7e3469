#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "steklov/linalg.hpp"
#include "steklov/trig_series.hpp"

namespace steklov {

struct BoundaryWeight {
  TrigSeries density;
  std::optional<TrigSeries> log_coeffs;
  Parity symmetry_class = Parity::none;

  // Validates positivity and records the detected symmetry.
  static BoundaryWeight from_density(TrigSeries density);
  // density = exp(v) projected to the given degree.
  static BoundaryWeight from_log(const TrigSeries& v, std::size_t degree);

  double length() const { return density.integral(); }
  BoundaryWeight scaled(double c) const;
  BoundaryWeight rotated(double alpha) const;
};

// Parity classes of an even_both weight: {cos 2k}, {cos 2k+1}, {sin 2k+1}, {sin 2k}.
enum class Block { full, cos_even, cos_odd, sin_odd, sin_even };

const char* to_string(Block b);
Parity block_parity(Block b);

struct BlockProblem {
  Block block = Block::full;
  std::vector<BasisMode> modes;
  Vector a;  // Dirichlet-to-Neumann diagonal
  Matrix B;
};

struct Eigenpair {
  double sigma = 0.0;
  TrigSeries trace;  // w-normalized boundary trace
  Block block = Block::full;
  std::size_t index_in_block = 0;
};

struct SteklovSpectrum {
  BoundaryWeight weight;
  std::size_t N = 0;
  std::vector<double> sigmas;
  std::vector<TrigSeries> eigen_traces;
  std::vector<Block> blocks;
  std::vector<std::size_t> block_index;
  double L = 0.0;
  std::vector<double> normalized;
  std::vector<double> multiplicity_gaps;
  // Lowest pairs of each parity block (block solves only; nonzero modes first
  // in the cos_even block are preceded by the constant).
  std::vector<std::vector<Eigenpair>> by_block;

  double sigma_bar(std::size_t k) const { return normalized.at(k); }
  std::size_t size() const { return sigmas.size(); }
  // Indices of eigenvalues within the multiplet of k (threshold 1e-7 (1+sigma)).
  std::vector<std::size_t> multiplet(std::size_t k, double rel = 1e-7) const;
};

struct SolveOptions {
  bool use_blocks = true;          // when the weight is even_both
  std::size_t per_block = 0;       // pairs kept per block, default k_max + 1
};

std::array<BlockProblem, 4> parity_blocks(const BoundaryWeight& weight, std::size_t N);
BlockProblem full_problem(const BoundaryWeight& weight, std::size_t N);
std::vector<Eigenpair> solve_block(const BlockProblem& problem, std::size_t n_pairs);

SteklovSpectrum solve_spectrum(const BoundaryWeight& weight, std::size_t N,
                               std::size_t k_max = 8, const SolveOptions& opts = {});

// Doubles N from N0 until |sigma_k(N) - sigma_k(2N)| <= tol (1 + sigma_k) for
// k <= k_max; returns the finer spectrum. Resolution error past N_limit.
SteklovSpectrum solve_spectrum_converged(const BoundaryWeight& weight, std::size_t N0,
                                         std::size_t k_max, double tol, std::size_t N_limit,
                                         const SolveOptions& opts = {});

// Boundary trial given by a closed-form harmonic-extension energy and
// pointwise values, integrated adaptively between the breakpoints.
struct PiecewiseTrial {
  double dirichlet_energy = 0.0;
  std::function<double(double)> boundary;
  std::vector<double> breakpoints;  // in [0, 2 pi]
};

double rayleigh_quotient(const TrigSeries& trial, const BoundaryWeight& weight);
double rayleigh_quotient(const PiecewiseTrial& trial, const BoundaryWeight& weight);
double weighted_norm2(const PiecewiseTrial& trial, const BoundaryWeight& weight);

// Residual max_k ||A u - sigma B u|| / ||B u|| of the returned pairs.
double eigen_residual(const SteklovSpectrum& spec);

// Messages for violated spectral inequalities (empty if all hold).
std::vector<std::string> spectrum_invariant_violations(const SteklovSpectrum& spec);

}  // namespace steklov
