#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bubbletower/model.hpp"

namespace bubbletower {

enum class SpacingPolicy { Uniform, Graded, Refined };

// Nodes 0 = r_0 < r_1 < ... < r_N = R_max. N counts cells, so there are N+1
// nodes. Graded grids shrink the spacing by `ratio` per cell toward the origin.
class RadialGrid {
 public:
  static RadialGrid uniform(std::size_t cells, double r_max);
  static RadialGrid graded(std::size_t cells, double r_max, double ratio);
  // Arbitrary strictly increasing nodes starting at 0 (used after regridding).
  static RadialGrid from_nodes(std::vector<double> nodes);

  const std::vector<double>& nodes() const { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t cells() const { return nodes_.size() - 1; }
  double r_max() const { return nodes_.back(); }
  double h_min() const { return h_min_; }
  SpacingPolicy policy() const { return policy_; }
  double ratio() const { return ratio_; }

  // Index i of the cell [r_i, r_{i+1}] containing r (clamped to the last cell).
  std::size_t locate(double r) const;

 private:
  std::vector<double> nodes_;
  SpacingPolicy policy_ = SpacingPolicy::Uniform;
  double ratio_ = 1.0;
  double h_min_ = 0.0;
  void finish();
};

struct FieldState {
  RadialGrid grid;
  std::vector<double> psi;
  std::vector<double> psit;
  double t = 0.0;
  ModelPtr model;
  double boundary_value_origin = 0.0;
  double boundary_value_infinity = 0.0;

  // Boundary values are snapped to the nearest vacuum of the model.
  static FieldState from_profile(ModelPtr model, RadialGrid grid,
                                 const std::function<double(double)>& psi0,
                                 const std::function<double(double)>& psi1, double t = 0.0);
  static FieldState vacuum(ModelPtr model, RadialGrid grid, double value);

  std::size_t size() const { return psi.size(); }
  // Cubic Lagrange interpolation of psi / psit at r in [0, R_max].
  double psi_at(double r) const;
  double psit_at(double r) const;

  // Throws NumericalFailure on NaN/Inf, InvalidArgument on size mismatch.
  void validate() const;
};

// Second-order nodal derivative on a nonuniform grid (one-sided at the ends).
std::vector<double> radial_derivative(const RadialGrid& grid, const std::vector<double>& v);
double radial_derivative_at_origin(const RadialGrid& grid, const std::vector<double>& v);

// int_{r1}^{r2} v(r) r dr for the piecewise-linear interpolant of nodal values.
double integrate_r(const RadialGrid& grid, const std::vector<double>& v, double r1, double r2);
// int_{r1}^{r2} v(r) dr for the same interpolant.
double integrate_plain(const RadialGrid& grid, const std::vector<double>& v, double r1, double r2);

struct EnergyReport {
  double total = 0.0;
  double kinetic = 0.0;
  double gradient = 0.0;
  double potential = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
};

// Wave maps: int (psi_t^2 + psi_r^2 + g(psi)^2 / r^2) r dr, no 1/2 factors.
// Semilinear6D: the native energy pi^3 int (u_t^2/2 + |grad u|^2/2 - |u|^3/3) r^5 dr
// of u = psi / r^2.
EnergyReport energy(const FieldState& state, double r1, double r2);
EnergyReport energy(const FieldState& state);

// Energy density in the psi view,  psi_t^2 + psi_r^2 + potential(psi) / r^2, at nodes.
// The origin node uses the limit (g'(l) psi_r(0))^2 for the potential term.
std::vector<double> energy_density(const FieldState& state);

// int ((psi - vacuum)_r^2 + (psi - vacuum)^2 / r^2 + psi_t^2) r dr over the window.
// Infinite when the window reaches r = 0 and psi(0) differs from `vacuum`.
double h_norm(const FieldState& state, double r1, double r2, double vacuum);

// |G(psi(r1)) - G(psi(r2))|.
double g_modulus_gap(const FieldState& state, double r1, double r2);

FieldState resample(const FieldState& state, const RadialGrid& grid2);

// Snapshot file: '# key=value' header lines then 'r,psi,psit' rows at 17 digits.
void write_snapshot(const std::string& path, const FieldState& state);
FieldState read_snapshot(const std::string& path);

// Cubic Lagrange interpolation of nodal data at r. When the four stencil
// values are monotone the result is clamped to the bracketing pair.
double interpolate_cubic(const RadialGrid& grid, const std::vector<double>& v, double r);

std::string format_double(double v);

}  // namespace bubbletower
