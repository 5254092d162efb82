#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bubbletower/grid.hpp"
#include "bubbletower/model.hpp"

namespace bubbletower {

// delta = 1/4 of the smallest vacuum gap; delta_j = (delta/2)(1 - 2^-j), j >= 1.
// Models with a single vacuum (the 6-d equation) use 1/4 of the ground-state
// peak instead.
struct DeltaSchedule {
  double delta = 0.0;
  std::vector<double> deltas;

  // j counts from 1; levels past the end reuse the last entry.
  double at(std::size_t j) const;
};

DeltaSchedule make_delta_schedule(double delta, std::size_t levels = 8);
DeltaSchedule make_delta_schedule(const Model& model, std::size_t levels = 8);

// Largest r with |v(r) - target| >= delta, located inside its cell by linear
// interpolation. Empty when no node qualifies.
std::optional<double> outer_scale(const RadialGrid& grid, const std::vector<double>& v, double target, double delta);
std::optional<double> outer_scale(const FieldState& state, double target, double delta);

struct FitOptions {
  double reject_ratio = 0.3;
  double rel_tol = 1e-8;
  int scan_per_decade = 24;
};

struct BubbleFit {
  bool found = false;
  std::optional<Soliton> soliton;
  // H-norm (not squared) of v - Q(./lambda) over the window, and of v - Q(inf)
  // before the fit.
  double residual = 0.0;
  double prefit_norm = 0.0;
  double r_a = 0.0, r_b = 0.0;
  std::string reason;
};

// Minimises the windowed H-norm of v - Q(./lambda) over lambda in [h_min, R_max]
// and over the candidate branches. Ties within 1e-9 relative go to the smaller
// lambda. Rejected when the residual exceeds reject_ratio * prefit_norm.
BubbleFit fit_bubble(const ModelPtr& model, const RadialGrid& grid, const std::vector<double>& v, double r_a,
                     double r_b, const std::vector<SolitonBranch>& candidates, const FitOptions& opt = {});
BubbleFit fit_bubble(const FieldState& state, double r_a, double r_b, const std::vector<SolitonBranch>& candidates,
                     const FitOptions& opt = {});

struct DecomposeOptions {
  std::size_t max_bubbles = 8;
  double separation_cap = 0.125;
  // The fit window is [lambda0 / w, lambda0 * w] around the scale implied by
  // the outer radius.
  double window_factor = 8.0;
  double budget_tol = 0.05;
  FitOptions fit;
};

struct BubbleRecord {
  Soliton soliton;
  double outer_radius = 0.0;
  double delta = 0.0;
  double fit_residual = 0.0;
  double prefit_norm = 0.0;
  double energy = 0.0;  // grid energy of the lone soliton
};

struct ResidualNorms {
  double sup_b0 = 0.0;
  double l2_b1 = 0.0;
  double h_b0 = 0.0;
  double h_cross_l2 = 0.0;
  // H-norm of b0 on [lambda_j / beta_j, beta_j lambda_j], beta_j = (lambda_{j-1}/lambda_j)^(1/4),
  // lambda_0 = R_max.
  std::vector<double> dyadic;
  std::vector<std::pair<double, double>> dyadic_windows;
  double energy_norm = 0.0;      // sqrt E(psi)
  double bubble_norm_sum = 0.0;  // sum sqrt E(Q_j)
  double relative = 0.0;         // h_cross_l2 / bubble_norm_sum, or / energy_norm when J = 0
};

struct EnergyBudget {
  double total = 0.0;
  double bubbles = 0.0;
  double residual = 0.0;  // quadratic energy of the residual
  double mismatch = 0.0;  // |total - bubbles - residual| / |total|
  // E(h_j) after each extraction, and C = max_j E(h_j) / E(psi).
  std::vector<double> extraction_energy;
  double C = 0.0;
  double tol = 0.05;
  bool within = true;
};

struct BubbleDecomposition {
  ModelPtr model;
  double exterior = 0.0;  // psi(inf)
  double interior = 0.0;  // Q_J(0), or psi(inf) when J = 0
  std::vector<BubbleRecord> bubbles;
  FieldState residual;  // b0, b1 with zero boundary values
  std::vector<double> scales_ratio;
  ResidualNorms norms;
  EnergyBudget budget;
  DeltaSchedule schedule;
  bool chain_closed = true;  // Q_J(0) equals psi(0)
  std::vector<std::string> events;

  std::size_t J() const { return bubbles.size(); }
  std::vector<double> scales() const;
};

// b = psi - sum (Q_j(./lambda_j) - Q_j(inf)) - psi(inf), b1 = psi_t.
FieldState bubble_residual(const FieldState& state, const std::vector<Soliton>& bubbles);

// The residual shifted back onto the innermost vacuum, as a state of the same model.
FieldState anchored_residual(const BubbleDecomposition& dec);

BubbleDecomposition decompose(const FieldState& state, const DeltaSchedule& schedule,
                              const DecomposeOptions& opt = {});
BubbleDecomposition decompose(const FieldState& state, const DecomposeOptions& opt = {});

ResidualNorms residual_norms(const BubbleDecomposition& dec);

enum class RegionKind { Exterior, Annulus, Gap, Core };

const char* region_name(RegionKind kind);

struct VirialRegion {
  RegionKind kind = RegionKind::Exterior;
  std::size_t index = 0;  // bubble number for annuli, upper bubble for gaps
  double r_lo = 0.0, r_hi = 0.0;
  double fprime_term = 0.0;  // int f'(psi) psi_r^2 r dr
  double f2_term = 0.0;      // int f(psi)^2 / r^2 r dr
  double soliton_fprime = 0.0;
  double soliton_f2 = 0.0;
};

struct VirialSplit {
  std::vector<VirialRegion> regions;
  double total = 0.0;
  double soliton_total = 0.0;  // sum over bubbles of the full-range soliton terms
  double residual_h2 = 0.0;    // squared H-norm of b0
  // (total - soliton_total) / residual_h2; NaN when the residual vanishes.
  double coercivity = 0.0;
};

// Regions: exterior [lambda_1 b_1, R_max], annuli [lambda_j / b_{j+1}, lambda_j b_j] with
// b_j = (lambda_{j-1}/lambda_j)^(1/4) (b_{J+1} = b_J), the gaps between them and the
// core [0, lambda_J / b_{J+1}].
VirialSplit annulus_virial_split(const FieldState& state, const BubbleDecomposition& dec);

struct ConcentrationFloor {
  double annulus_energy = 0.0;  // int (psi_r^2 + g^2 / r^2) r dr on [r0/gamma, gamma r0]
  double gradient_part = 0.0;
  double potential_part = 0.0;
  double delta = 0.0;  // distance of psi(r0) to the vacua
  // delta^2 / (4 C), C = 2 log gamma: psi moves by more than delta/2 on the annulus.
  double hoelder_bound = 0.0;
  // 2 log gamma * min g^2 over [psi(r0) - delta/2, psi(r0) + delta/2]: it does not.
  double potential_bound = 0.0;
  double floor = 0.0;
  bool holds = true;
  double hoelder_margin = 0.0;  // gradient_part / hoelder_bound
};

// Wave-map models only.
ConcentrationFloor energy_concentration_floor(const FieldState& state, double r0, double gamma);

}  // namespace bubbletower
