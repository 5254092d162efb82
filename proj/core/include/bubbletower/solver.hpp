#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bubbletower/grid.hpp"
#include "bubbletower/trajectory.hpp"

namespace bubbletower {

struct SolveConfig {
  double cfl = 0.5;
  double t_end = 1.0;
  // Time between snapshots; 0 means every 64 steps. Blow-up monitoring and
  // refinement run every 64 steps either way.
  double snapshot_cadence = 0.0;
  // Refine when the concentration scale spans fewer than this many cells.
  double refine_threshold = 64.0;
  int max_refine_levels = 12;
  // Stop once sup |psi_r| exceeds this; 0 means 1e6 / R_max.
  double blowup_gradient_cap = 0.0;
  double dt_min = 1e-12;
  std::size_t max_nodes = std::size_t{1} << 22;

  void validate() const;
};

enum class StopReason { None, GradientCap, DtFloor };

struct BlowupReport {
  bool detected = false;
  double T_est = 0.0;
  std::vector<std::pair<double, double>> scale_series;  // (t, lambda(t))
  StopReason reason = StopReason::None;
  int refine_levels = 0;
  std::size_t steps = 0;
};

std::string to_string(StopReason r);

// Discrete right-hand side: mass-lumped linear elements with r dr weights,
//   a_i = [r_{i+1/2} D+ psi - r_{i-1/2} D- psi] / w_i - f(psi_i) / r_i^2,
// with both end nodes pinned.
class Stepper {
 public:
  Stepper(const RadialGrid& grid, ModelPtr model);

  void acceleration(const double* psi, double* out) const;
  std::size_t size() const { return left_.size(); }

 private:
  ModelPtr model_;
  std::vector<double> left_, right_, inv_r2_;
};

// One kick-drift-kick leapfrog step (2nd order in dt and dr).
FieldState step(const FieldState& state, double dt);

struct EvolveResult {
  Trajectory trajectory;
  BlowupReport report;
};

using Monitor = std::function<void(const FieldState&)>;

// Advances to cfg.t_end or a blow-up stop. Records the series "energy",
// "energy_discrete", "sup_psi_r", "lambda" and "h_min" at every snapshot.
EvolveResult evolve(const FieldState& state, const SolveConfig& cfg,
                    const std::vector<Monitor>& monitors = {});

// Halves the spacing on [0, r_pivot] (nodes strictly inside the pivot cell
// range get midpoints by cubic interpolation; existing nodes are kept).
// r_pivot <= 0 uses 8 x concentration_scale.
FieldState regrid(const FieldState& state, int level, double r_pivot = 0.0, int max_levels = 12,
                  std::size_t max_nodes = std::size_t{1} << 22);

struct ConcentrationScale {
  double scale = 0.0;
  bool found = false;
};

// Smallest r with |psi(r) - psi(0)| reaching half the height of the innermost
// soliton compatible with psi(0). R_max with found = false if none.
ConcentrationScale concentration_scale(const FieldState& state);
double innermost_half_height(const Model& model, double origin_value);

// The quantity the semi-discrete scheme conserves exactly:
//   sum_i w_i psit_i^2 + sum_cells r_{i+1/2} (psi_{i+1} - psi_i)^2 / h_i + sum_i w_i potential(psi_i) / r_i^2
// over interior nodes. Leapfrog keeps it to O(dt^2) without secular drift.
double discrete_energy(const FieldState& state);

// sup over interior nodes of |r^2 a_i| for the static part (psi_t ignored),
// restricted to r <= r_limit.
double discrete_ode_residual(const FieldState& state, double r_limit);

}  // namespace bubbletower
