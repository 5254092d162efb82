#pragma once

#include <string>
#include <vector>

#include "bubbletower/trajectory.hpp"

namespace bubbletower {

// Pointwise densities of the psi equation with F = potential / 2
// (F = 2 psi^2 - |psi|^3 / 3 for the 6-d equation, g^2 / 2 for wave maps):
//   e = psi_r^2/2 + psi_t^2/2 + F/r^2,  m = psi_t psi_r,
//   L = -psi_t^2/2 + psi_r^2/2 + F/r^2 - 2 f psi_r / r,
//   A2 = r e + r m,  B2 = r e - r m.
// The origin node holds the r -> 0 limits (L, A2, B2 and the ratio are 0 there).
struct NullFields {
  std::vector<double> r, e, m, L, A2, B2;
  // L^2 r^2 / (A2 B2) where A2 B2 > 0, else 0.
  std::vector<double> ratio;

  // sup of `ratio` over nodes with |psi - vacuum| <= small (the region where
  // the bound is claimed); 0 if there is none.
  double sup_ratio_small(const FieldState& s, double small = 0.1) const;
};

NullFields null_fields(const FieldState& state);

// Radius of the diagnostic region at time t: T_ref - t for blow-up
// trajectories, scale * t for global ones.
struct ConeGeometry {
  bool blowup = true;
  double T_ref = 1.0;
  double scale = 1.0;

  static ConeGeometry of(const Trajectory& traj);
  double radius(double t) const { return blowup ? T_ref - t : scale * t; }
  double radius_rate() const { return blowup ? -1.0 : scale; }
};

// int_0^{R(t)} r e dr (psi view, the density whose flux the cone identity tracks).
double cone_energy(const FieldState& state, double R);

// Fl(t0; t1) = int_{t0}^{t1} R (e - m)(R(l), l) dl along R = T_ref - l,
// trapezoid in time over the snapshots in [t0, t1].
double flux(const Trajectory& traj, double t0, double t1);
double flux(const Trajectory& traj, const ConeGeometry& cone, double t0, double t1);

struct ResidualSeries {
  std::vector<double> t;
  std::vector<double> residual;
  std::vector<double> lhs;
  std::vector<double> rhs;

  double sup() const;
};

// | int_0^{R(t0)} re - int_0^{R(tk)} re - Fl(t0; tk) | for every snapshot tk.
ResidualSeries flux_identity_residual(const Trajectory& traj, const ConeGeometry& cone);

struct WindowSeries {
  std::vector<double> t;
  std::vector<double> value;
  // Same series with T_ref moved by -1% and +1% (blow-up mode only).
  std::vector<double> value_T_minus;
  std::vector<double> value_T_plus;
  bool truncated = false;
};

// Energy in lambda R(t) <= r <= R(t): (psi_t^2/2 + psi_r^2/2 + psi^2/r^2) r dr for the
// 6-d equation, (psi_t^2 + psi_r^2 + g^2/r^2) r dr for wave maps. In global mode
// the window is lambda t <= r <= t - A. The series stops (truncated = true) once
// the window spans fewer than two cells.
WindowSeries exterior_selfsimilar_energy(const Trajectory& traj, double lambda, double A = 0.0);

enum class VirialMode { Blowup, Global };

struct VirialSeries {
  std::vector<double> t;
  std::vector<double> g;  // kinetic:  int psi_t^2 chi r dr  (6-d: pi^3 int u_t^2 chi r^5 dr)
  std::vector<double> h;  // wave maps: int (f'(psi) psi_r^2 + f^2/r^2) chi r dr
                          // 6-d:       pi^3 int (|grad u|^2 - |u|^3) chi r^5 dr
};

// chi(r / R) is 1 on [0, 0.9] and falls to 0 on [0.9, 1] (C^2 quintic).
// R = T_ref - t (blow-up) or R = t / 2 (global).
VirialSeries virial_series(const Trajectory& traj, VirialMode mode);

// Single-snapshot values of the two virial integrands over [0, R].
double windowed_kinetic(const FieldState& s, double R);
double windowed_h(const FieldState& s, double R);

enum class VirialIdentity { Mult2u, Mult3u, WaveMap };

// d/dt P - RHS at interior snapshots (centred differences in t), where
//   WaveMap: P = int psi_t f(psi) eta r dr,
//            RHS = int psi_t^2 f' eta r dr - int (f' psi_r^2 + f^2/r^2) eta r dr + boundary,
//   Mult2u / Mult3u (6-d): P = int u_t (x.grad u + c u) phi dx,
//            RHS = -int u_t^2 phi  (c = 2)  or  int (|u|^3 - |grad u|^2) phi  (c = 3), plus boundary,
// with eta = phi = eta(r / R(t)), eta = 1 on [0, 1/2], 0 past 3/4. The boundary
// terms (all supported where eta' != 0) are evaluated explicitly, so the
// residual is a pure discretisation error.
ResidualSeries virial_identity_residual(const Trajectory& traj, VirialIdentity which);
ResidualSeries virial_identity_residual(const Trajectory& traj, VirialIdentity which, const ConeGeometry& cone);

// Multiplier functional and exact right-hand side at one snapshot.
struct VirialTerms {
  double P = 0.0;
  double rhs = 0.0;
};
VirialTerms virial_terms(const FieldState& s, VirialIdentity which, double R, double R_rate);

// Per snapshot: sup |psi| (= sup r^2 |u|) over lambda0 R(t) <= r <= R(t) in
// blow-up mode, over r >= lambda0 t in global mode.
WindowSeries pointwise_cone_bound(const Trajectory& traj, double lambda0);

// (1/tau) int_t^{t+tau} k(s) ds with k(s) = int_0^{R(s)} psi_t^2 r dr
// (6-d: pi^3 int u_t^2 r^5 dr), trapezoid over the snapshot times.
double kinetic_time_average(const Trajectory& traj, double t, double tau);
// The same average over an already sampled series (piecewise linear in t).
double time_average(const std::vector<double>& times, const std::vector<double>& values, double t, double tau);

// Smooth cutoffs.
double cutoff_eta(double rho);        // 1 on [0, 1/2], 0 on [3/4, inf)
double cutoff_eta_prime(double rho);
double cutoff_chi(double rho);        // 1 on [0, 0.9], 0 on [1, inf)

// Series files: <dir>/series/<name>.csv with header "t,<name>".
void write_series(const std::string& dir, const std::string& name, const std::vector<double>& t,
                  const std::vector<double>& values);
std::pair<std::vector<double>, std::vector<double>> read_series(const std::string& path);

}  // namespace bubbletower
