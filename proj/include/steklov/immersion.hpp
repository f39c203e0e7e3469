#pragma once

#include <array>
#include <string>

#include "steklov/functional.hpp"
#include "steklov/steklov_solver.hpp"

namespace steklov {

// Phi_i = alpha_i phi_i. Gauge: phi_0 odd in y (sin odd), phi_1 odd in x
// (cos odd), phi_2 even in both (cos even).
struct Immersion {
  std::array<TrigSeries, 3> phi;
  std::array<double, 3> alpha{0.0, 0.0, 0.0};
  std::array<double, 3> sigma{0.0, 0.0, 0.0};
  bool has_phi2 = false;
  bool quarter_rotated = false;
  double ellipsoid_p = 1.0;  // normalized sigma_1 / sigma_2
  double constraint_residual = 0.0;
  double L = 0.0;
  BoundaryWeight weight;  // in the immersion gauge

  TrigSeries component(std::size_t i) const { return phi[i] * alpha[i]; }
  bool planar() const;
};

struct ImmersionOptions {
  double multiplet_tol = 1e-6;  // relative, for membership in the sigma_2 eigenspace
  bool strict = true;           // false: always use phi_1 and phi_2 with their own eigenvalues
  std::size_t fit_points = 0;   // boundary samples for the scaling fit (0: automatic)
};

Immersion build_immersion(const SteklovSpectrum& spectrum, const ImmersionOptions& opts = {});

// Relative deviations of the two boundary mass fractions from their targets.
std::pair<double, double> mass_residuals(const Immersion& im, const FunctionalParams& params);

struct Diagnostics {
  double ellipsoid_residual = 0.0;
  double conformality_residual = 0.0;
  double min_boundary_speed = 0.0;
  double jacobian_min = 0.0;
  int winding = 0;
  std::array<int, 3> nodal_counts{0, 0, 0};
  double area = 0.0;
  double area_identity = 0.0;
  double critical_weight_mismatch = 0.0;
  double phi2_axis_min = 0.0;  // min |Phi_2| on the x-axis segment and at (0, +-1)
  std::string step1_violation;
};

struct DiagnosticGrid {
  std::size_t radial = 64;
  std::size_t angular = 256;
  std::size_t boundary_samples = 4096;
  std::size_t nodal_resolution = 512;
};

double verify_ellipsoid(const Immersion& im, std::size_t samples = 4096);
double verify_no_boundary_branch(const Immersion& im, std::size_t samples = 4096);
double verify_conformality(const Immersion& im, const DiagnosticGrid& grid = {});
double verify_critical_weight(const Immersion& im, const BoundaryWeight& weight,
                              std::size_t samples = 4096);
double verify_critical_weight(const Immersion& im, std::size_t samples = 4096);

struct EmbeddingReport {
  int winding = 0;
  double jacobian_min = 0.0;
  std::array<int, 3> nodal_counts{0, 0, 0};
  double phi2_axis_min = 0.0;
  std::string step1_violation;
};

EmbeddingReport embedding_diagnostics(const Immersion& im, const DiagnosticGrid& grid = {});

// |L - 2A| / L with A half the Dirichlet energy of Phi.
double verify_area_identity(const Immersion& im);
double immersion_area(const Immersion& im);

Diagnostics diagnose(const Immersion& im, const DiagnosticGrid& grid = {});

// Degree of a closed sampled planar curve around the origin (signed).
int winding_number(const std::vector<std::array<double, 2>>& curve);
// Connected components of {f > thr} and {f < -thr} on a polar grid with a
// center node; values[i][j] at radius (i+1)/n_r and angle 2 pi j / n_t.
int count_nodal_domains(const std::vector<std::vector<double>>& values, double center_value,
                        double thr = 1e-9);

// OBJ mesh of the scaled immersion sqrt(sigma_2) Phi over an (r, theta) grid
// plus a CSV of boundary samples. header is written as a comment line.
void export_surface(const Immersion& im, std::size_t resolution, const std::string& obj_path,
                    const std::string& csv_path, const std::string& header = "");

}  // namespace steklov
