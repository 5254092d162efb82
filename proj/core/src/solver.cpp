#include "bubbletower/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bubbletower/error.hpp"

namespace bubbletower {

namespace {

constexpr int kStepsPerSnapshot = 64;

double sup_abs_derivative(const FieldState& s) {
  const auto d = radial_derivative(s.grid, s.psi);
  double m = 0.0;
  for (double v : d) m = std::max(m, std::abs(v));
  return m;
}

// Least-squares line through (t, y); returns the zero crossing, or NaN if the
// fitted line is not decreasing.
double extrapolate_zero(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mt += t[i], my += y[i];
  mt /= n;
  my /= n;
  double stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
  }
  if (stt <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double slope = sty / stt;
  if (!(slope < 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return mt - my / slope;
}

}  // namespace

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "none";
    case StopReason::GradientCap: return "gradient-cap";
    case StopReason::DtFloor: return "dt-floor";
  }
  return "none";
}

void SolveConfig::validate() const {
  require(cfl > 0.0 && cfl <= 0.9, "cfl must lie in (0, 0.9]");
  require(std::isfinite(t_end) && t_end > 0.0, "t_end must be positive");
  require(snapshot_cadence >= 0.0, "snapshot cadence must be non-negative");
  require(refine_threshold > 0.0, "refine threshold must be positive");
  require(max_refine_levels >= 0 && max_refine_levels <= 12, "max_refine_levels must lie in [0, 12]");
  require(blowup_gradient_cap >= 0.0, "gradient cap must be non-negative");
  require(dt_min > 0.0, "dt_min must be positive");
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const RadialGrid& grid, ModelPtr model) : model_(std::move(model)) {
  const std::size_t n = grid.size();
  left_.assign(n, 0.0);
  right_.assign(n, 0.0);
  inv_r2_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = grid[i - 1], r = grid[i], b = grid[i + 1];
    const double hl = r - a, hr = b - r;
    // Lumped weight  int hat_i r dr  and edge radii r_{i -+ 1/2}.
    const double w = hl * (a + 2.0 * r) / 6.0 + hr * (2.0 * r + b) / 6.0;
    left_[i] = 0.5 * (a + r) / (hl * w);
    right_[i] = 0.5 * (r + b) / (hr * w);
    inv_r2_[i] = 1.0 / (r * r);
  }
}

void Stepper::acceleration(const double* psi, double* out) const {
  const std::size_t n = left_.size();
  const double* L = left_.data();
  const double* R = right_.data();
  const double* ir2 = inv_r2_.data();
  auto kernel = [&](auto f) {
    for (std::size_t i = 1; i + 1 < n; ++i)
      out[i] = R[i] * (psi[i + 1] - psi[i]) - L[i] * (psi[i] - psi[i - 1]) - f(psi[i]) * ir2[i];
  };
  const Model& m = *model_;
  switch (m.kind()) {
    case ModelKind::SphereEquivariant: {
      const double c = 0.5 * m.k() * m.k();
      constexpr double pi = std::numbers::pi;
      kernel([c](double x) { return c * std::sin(2.0 * (x - pi * std::round(x / pi))); });
      break;
    }
    case ModelKind::YangMills:
      kernel([](double x) { return -2.0 * x * (1.0 - x * x); });
      break;
    case ModelKind::Semilinear6D:
      kernel([](double x) { return 4.0 * x - std::abs(x) * x; });
      break;
    case ModelKind::Custom:
      kernel([&m](double x) { return m.f(x); });
      break;
  }
  out[0] = 0.0;
  out[n - 1] = 0.0;
}

FieldState step(const FieldState& state, double dt) {
  require(dt > 0.0 && std::isfinite(dt), "time step must be positive");
  state.validate();
  const Stepper st(state.grid, state.model);
  const std::size_t n = state.size();
  FieldState out = state;
  std::vector<double> a(n);
  st.acceleration(out.psi.data(), a.data());
  for (std::size_t i = 1; i + 1 < n; ++i) out.psit[i] += 0.5 * dt * a[i];
  for (std::size_t i = 1; i + 1 < n; ++i) out.psi[i] += dt * out.psit[i];
  st.acceleration(out.psi.data(), a.data());
  for (std::size_t i = 1; i + 1 < n; ++i) out.psit[i] += 0.5 * dt * a[i];
  out.t += dt;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(out.psi[i]) || !std::isfinite(out.psit[i]))
      fail(ErrorCode::NumericalFailure, "scheme produced a non-finite value at t=" + format_double(out.t));
  return out;
}

// ---------------------------------------------------------------------------

double innermost_half_height(const Model& model, double origin_value) {
  switch (model.kind()) {
    case ModelKind::SphereEquivariant: return 0.5 * std::numbers::pi;
    case ModelKind::YangMills: return 1.0;
    case ModelKind::Semilinear6D: return 3.0;
    case ModelKind::Custom: {
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& v : model.vacua())
        if (std::abs(v.value - origin_value) > 1e-9) gap = std::min(gap, std::abs(v.value - origin_value));
      return 0.5 * gap;
    }
  }
  return std::numeric_limits<double>::infinity();
}

ConcentrationScale concentration_scale(const FieldState& s) {
  const double base = s.psi[0];
  const double height = innermost_half_height(*s.model, base);
  const std::size_t n = s.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(s.psi[i] - base) < height) continue;
    double a = s.grid[i - 1], b = s.grid[i];
    for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
      const double c = 0.5 * (a + b);
      if (std::abs(interpolate_cubic(s.grid, s.psi, c) - base) >= height) b = c;
      else a = c;
    }
    return {b, true};
  }
  return {s.grid.r_max(), false};
}

FieldState regrid(const FieldState& s, int level, double r_pivot, int max_levels, std::size_t max_nodes) {
  if (level > max_levels)
    fail(ErrorCode::CapacityExceeded, "refinement level " + std::to_string(level) + " exceeds the cap " +
                                          std::to_string(max_levels));
  if (r_pivot <= 0.0) {
    const auto cs = concentration_scale(s);
    r_pivot = cs.found ? 8.0 * cs.scale : s.grid.r_max();
  }
  r_pivot = std::min(r_pivot, s.grid.r_max());
  const auto& old = s.grid.nodes();
  std::size_t refined_cells = 0;
  while (refined_cells + 1 < old.size() && old[refined_cells + 1] <= r_pivot) ++refined_cells;
  refined_cells = std::max<std::size_t>(refined_cells, 1);
  if (old.size() + refined_cells > max_nodes)
    fail(ErrorCode::CapacityExceeded, "regrid would exceed the node cap");

  std::vector<double> nodes, psi, psit;
  nodes.reserve(old.size() + refined_cells);
  psi.reserve(nodes.capacity());
  psit.reserve(nodes.capacity());
  for (std::size_t i = 0; i < old.size(); ++i) {
    nodes.push_back(old[i]);
    psi.push_back(s.psi[i]);
    psit.push_back(s.psit[i]);
    if (i < refined_cells) {
      const double mid = 0.5 * (old[i] + old[i + 1]);
      nodes.push_back(mid);
      psi.push_back(interpolate_cubic(s.grid, s.psi, mid));
      psit.push_back(interpolate_cubic(s.grid, s.psit, mid));
    }
  }
  FieldState out;
  out.model = s.model;
  out.t = s.t;
  out.boundary_value_origin = s.boundary_value_origin;
  out.boundary_value_infinity = s.boundary_value_infinity;
  out.grid = RadialGrid::from_nodes(std::move(nodes));
  out.psi = std::move(psi);
  out.psit = std::move(psit);
  return out;
}

double discrete_energy(const FieldState& s) {
  const auto& r = s.grid.nodes();
  const Model& m = *s.model;
  const std::size_t n = s.size();
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = r[i + 1] - r[i], d = s.psi[i + 1] - s.psi[i];
    e += 0.5 * (r[i] + r[i + 1]) * d * d / h;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = r[i] - r[i - 1], hr = r[i + 1] - r[i];
    const double w = hl * (r[i - 1] + 2.0 * r[i]) / 6.0 + hr * (2.0 * r[i] + r[i + 1]) / 6.0;
    e += w * (s.psit[i] * s.psit[i] + m.potential(s.psi[i]) / (r[i] * r[i]));
  }
  return e;
}

double discrete_ode_residual(const FieldState& s, double r_limit) {
  const Stepper st(s.grid, s.model);
  std::vector<double> a(s.size());
  st.acceleration(s.psi.data(), a.data());
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < s.size() && s.grid[i] <= r_limit; ++i) {
    const double r = s.grid[i];
    worst = std::max(worst, std::abs(r * r * a[i]));
  }
  return worst;
}

// ---------------------------------------------------------------------------

EvolveResult evolve(const FieldState& initial, const SolveConfig& cfg, const std::vector<Monitor>& monitors) {
  cfg.validate();
  initial.validate();
  EvolveResult res;
  Trajectory& traj = res.trajectory;
  BlowupReport& rep = res.report;

  FieldState s = initial;
  const double cap = cfg.blowup_gradient_cap > 0.0 ? cfg.blowup_gradient_cap : 1e6 / s.grid.r_max();
  auto stepper = std::make_unique<Stepper>(s.grid, s.model);
  std::vector<double> acc(s.size());
  stepper->acceleration(s.psi.data(), acc.data());
  double dt = cfg.cfl * s.grid.h_min();
  int level = 0;
  double next_snapshot = s.t + cfg.snapshot_cadence;
  std::vector<double> sup_t, sup_inv;

  struct Probe {
    double sup = 0.0;
    ConcentrationScale cs;
  };
  // Blow-up monitoring runs every kStepsPerSnapshot steps whatever the snapshot cadence.
  auto probe = [&]() {
    s.validate();
    Probe p{sup_abs_derivative(s), concentration_scale(s)};
    rep.scale_series.emplace_back(s.t, p.cs.scale);
    if (p.sup > 0.0) {
      sup_t.push_back(s.t);
      sup_inv.push_back(1.0 / p.sup);
    }
    return p;
  };
  auto save = [&](const Probe& p) {
    traj.add(s);
    traj.record("energy", energy(s).total);
    traj.record("energy_discrete", discrete_energy(s));
    traj.record("sup_psi_r", p.sup);
    traj.record("lambda", p.cs.scale);
    traj.record("h_min", s.grid.h_min());
    for (const auto& m : monitors) m(s);
  };
  auto record = [&]() {
    const Probe p = probe();
    save(p);
    return p;
  };

  auto stop = [&](StopReason why) {
    rep.detected = true;
    rep.reason = why;
    const std::size_t k = std::min<std::size_t>(20, sup_t.size());
    const std::vector<double> tt(sup_t.end() - k, sup_t.end()), yy(sup_inv.end() - k, sup_inv.end());
    const double T = extrapolate_zero(tt, yy);
    rep.T_est = std::isfinite(T) && T >= s.t ? T : s.t;
  };

  record();
  while (s.t < cfg.t_end) {
    const bool last = s.t + dt >= cfg.t_end;
    const double h = last ? cfg.t_end - s.t : dt;
    const std::size_t n = s.size();
    double* psi = s.psi.data();
    double* v = s.psit.data();
    double* a = acc.data();
    for (std::size_t i = 1; i + 1 < n; ++i) v[i] += 0.5 * h * a[i];
    for (std::size_t i = 1; i + 1 < n; ++i) psi[i] += h * v[i];
    stepper->acceleration(psi, a);
    for (std::size_t i = 1; i + 1 < n; ++i) v[i] += 0.5 * h * a[i];
    s.t = last ? cfg.t_end : s.t + h;
    ++rep.steps;

    bool due = last;
    if (cfg.snapshot_cadence > 0.0) {
      if (s.t >= next_snapshot) {
        due = true;
        while (next_snapshot <= s.t) next_snapshot += cfg.snapshot_cadence;
      }
    } else if (rep.steps % kStepsPerSnapshot == 0) {
      due = true;
    }
    if (!due && rep.steps % kStepsPerSnapshot != 0) continue;

    const Probe p = probe();
    const auto& cs = p.cs;
    if (p.sup > cap) {
      save(p);
      stop(StopReason::GradientCap);
      break;
    }
    if (due) save(p);
    if (cs.found) {
      const std::size_t cell = s.grid.locate(cs.scale);
      const double h_local = s.grid[cell + 1] - s.grid[cell];
      if (cs.scale < cfg.refine_threshold * h_local && !last) {
        if (level >= cfg.max_refine_levels) {
          if (!due) save(p);
          stop(StopReason::DtFloor);
          break;
        }
        s = regrid(s, ++level, 8.0 * cs.scale, cfg.max_refine_levels, cfg.max_nodes);
        rep.refine_levels = level;
        stepper = std::make_unique<Stepper>(s.grid, s.model);
        acc.assign(s.size(), 0.0);
        stepper->acceleration(s.psi.data(), acc.data());
        dt = cfg.cfl * s.grid.h_min();
        if (dt < cfg.dt_min) {
          if (!due) save(p);
          stop(StopReason::DtFloor);
          break;
        }
      }
    }
  }
  traj.blowup_mode = rep.detected;
  traj.T_ref = rep.detected ? rep.T_est : s.t;
  return res;
}

}  // namespace bubbletower
