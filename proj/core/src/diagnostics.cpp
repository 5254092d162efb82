#include "bubbletower/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "bubbletower/error.hpp"

namespace bubbletower {

namespace {

constexpr double kPi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// 1 - S((x - lo) / (hi - lo)) with the quintic smoothstep S; exact 1 and 0 outside [lo, hi].
double transition(double x, double lo, double hi) {
  if (x <= lo) return 1.0;
  if (x >= hi) return 0.0;
  const double y = (x - lo) / (hi - lo);
  return 1.0 - y * y * y * (y * (6.0 * y - 15.0) + 10.0);
}

double transition_prime(double x, double lo, double hi) {
  if (x <= lo || x >= hi) return 0.0;
  const double y = (x - lo) / (hi - lo);
  return -30.0 * y * y * (y - 1.0) * (y - 1.0) / (hi - lo);
}

double lerp(const RadialGrid& grid, const std::vector<double>& v, double r) {
  const std::size_t i = grid.locate(r);
  const double w = (r - grid[i]) / (grid[i + 1] - grid[i]);
  return v[i] + w * (v[i + 1] - v[i]);
}

bool is_native(const FieldState& s) { return s.model->kind() == ModelKind::Semilinear6D; }

void require_inside(const FieldState& s, double R, const char* what) {
  if (R > s.grid.r_max() * (1.0 + 1e-12))
    fail(ErrorCode::OutOfRange, std::string(what) + ": region radius " + format_double(R) + " exits the grid (R_max " +
                                    format_double(s.grid.r_max()) + ") at t=" + format_double(s.t));
}

// Integral of a piecewise-linear function of t over [a, b].
double integrate_in_time(const std::vector<double>& t, const std::vector<double>& v, double a, double b) {
  const std::size_t n = t.size();
  const double slack = 1e-12 * std::max(1.0, std::abs(t.back()));
  if (n < 2 || a < t.front() - slack || b > t.back() + slack || !(a <= b))
    fail(ErrorCode::OutOfRange, "time range [" + format_double(a) + ", " + format_double(b) + "] outside the series");
  a = std::max(a, t.front());
  b = std::min(b, t.back());
  auto value = [&](std::size_t i, double x) {
    const double w = (x - t[i]) / (t[i + 1] - t[i]);
    return v[i] + w * (v[i + 1] - v[i]);
  };
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double lo = std::max(a, t[i]), hi = std::min(b, t[i + 1]);
    if (hi <= lo) continue;
    sum += 0.5 * (hi - lo) * (value(i, lo) + value(i, hi));
  }
  return sum;
}

// Three-point derivative on a nonuniform time grid at interior index k.
double time_derivative(const std::vector<double>& t, const std::vector<double>& v, std::size_t k) {
  const double hm = t[k] - t[k - 1], hp = t[k + 1] - t[k];
  return (hm * hm * (v[k + 1] - v[k]) + hp * hp * (v[k] - v[k - 1])) / (hm * hp * (hm + hp));
}

// Per-node q = psi_r - 2 psi / r = r^2 u_r with the origin limit -psi_r(0).
std::vector<double> native_q(const FieldState& s, const std::vector<double>& pr) {
  std::vector<double> q(s.size());
  q[0] = -pr[0];
  for (std::size_t i = 1; i < s.size(); ++i) q[i] = pr[i] - 2.0 * s.psi[i] / s.grid[i];
  return q;
}

}  // namespace

double cutoff_eta(double rho) { return transition(rho, 0.5, 0.75); }
double cutoff_eta_prime(double rho) { return transition_prime(rho, 0.5, 0.75); }
double cutoff_chi(double rho) { return transition(rho, 0.9, 1.0); }

// ---------------------------------------------------------------------------

double NullFields::sup_ratio_small(const FieldState& s, double small) const {
  const double l = s.model->nearest_vacuum(s.psi[0]).value;
  double m = 0.0;
  for (std::size_t i = 1; i < ratio.size(); ++i)
    if (std::abs(s.psi[i] - l) <= small) m = std::max(m, ratio[i]);
  return m;
}

NullFields null_fields(const FieldState& s) {
  const Model& model = *s.model;
  const auto pr = radial_derivative(s.grid, s.psi);
  const auto dens = energy_density(s);
  const std::size_t n = s.size();
  NullFields out;
  out.r = s.grid.nodes();
  out.e.resize(n);
  out.m.resize(n);
  out.L.assign(n, 0.0);
  out.A2.assign(n, 0.0);
  out.B2.assign(n, 0.0);
  out.ratio.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = s.grid[i], pt = s.psit[i], ps = pr[i];
    out.e[i] = 0.5 * dens[i];
    out.m[i] = pt * ps;
    if (i == 0) continue;
    const double F = 0.5 * model.potential(s.psi[i]);
    out.L[i] = -0.5 * pt * pt + 0.5 * ps * ps + F / (r * r) - 2.0 * model.f(s.psi[i]) * ps / r;
    out.A2[i] = r * (out.e[i] + out.m[i]);
    out.B2[i] = r * (out.e[i] - out.m[i]);
    const double ab = out.A2[i] * out.B2[i];
    if (ab > 0.0) out.ratio[i] = out.L[i] * out.L[i] * r * r / ab;
  }
  return out;
}

// ---------------------------------------------------------------------------

ConeGeometry ConeGeometry::of(const Trajectory& traj) {
  ConeGeometry c;
  c.blowup = traj.blowup_mode;
  c.T_ref = traj.T_ref;
  return c;
}

double cone_energy(const FieldState& s, double R) {
  require_inside(s, R, "cone energy");
  if (R <= 0.0) return 0.0;
  return 0.5 * integrate_r(s.grid, energy_density(s), 0.0, std::min(R, s.grid.r_max()));
}

namespace {

// Outflow rate -R (R' e + m) at r = R(t); R (e - m) on the cone R = T - t.
// Boundary values are the linear interpolants that integrate_r integrates, so
// d/dt cone_energy matches this density exactly between nodes.
double flux_density(const FieldState& s, const ConeGeometry& cone) {
  const double R = cone.radius(s.t);
  require_inside(s, R, "flux");
  if (R <= 0.0) return 0.0;
  const auto pr = radial_derivative(s.grid, s.psi);
  auto dens = energy_density(s);
  std::vector<double> mom(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) mom[i] = s.psit[i] * pr[i];
  const double e = 0.5 * lerp(s.grid, dens, R), m = lerp(s.grid, mom, R);
  return -R * (cone.radius_rate() * e + m);
}

}  // namespace

double flux(const Trajectory& traj, const ConeGeometry& cone, double t0, double t1) {
  require(t0 <= t1, "flux needs t0 <= t1");
  std::vector<double> t, v;
  for (const auto& s : traj.snapshots) {
    t.push_back(s.t);
    v.push_back(flux_density(s, cone));
  }
  return integrate_in_time(t, v, t0, t1);
}

double flux(const Trajectory& traj, double t0, double t1) { return flux(traj, ConeGeometry::of(traj), t0, t1); }

double ResidualSeries::sup() const {
  double m = 0.0;
  for (double v : residual) m = std::max(m, v);
  return m;
}

ResidualSeries flux_identity_residual(const Trajectory& traj, const ConeGeometry& cone) {
  require(traj.size() >= 2, "flux identity needs at least two snapshots");
  std::vector<double> t, dens, inside;
  for (const auto& s : traj.snapshots) {
    t.push_back(s.t);
    dens.push_back(flux_density(s, cone));
    inside.push_back(cone_energy(s, cone.radius(s.t)));
  }
  ResidualSeries out;
  double fl = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    fl += 0.5 * (t[k] - t[k - 1]) * (dens[k] + dens[k - 1]);
    out.t.push_back(t[k]);
    out.lhs.push_back(inside[0] - inside[k]);
    out.rhs.push_back(fl);
    out.residual.push_back(std::abs(inside[0] - inside[k] - fl));
  }
  return out;
}

// ---------------------------------------------------------------------------

WindowSeries exterior_selfsimilar_energy(const Trajectory& traj, double lambda, double A) {
  require(lambda > 0.0 && lambda < 1.0, "lambda must lie in (0, 1)");
  WindowSeries out;
  auto window_energy = [](const FieldState& s, double a, double b) {
    const double rmax = s.grid.r_max();
    a = std::clamp(a, 0.0, rmax);
    b = std::clamp(b, 0.0, rmax);
    if (b <= a) return 0.0;
    if (!is_native(s)) return integrate_r(s.grid, energy_density(s), a, b);
    const auto pr = radial_derivative(s.grid, s.psi);
    std::vector<double> d(s.size());
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double r = s.grid[i];
      d[i] = 0.5 * s.psit[i] * s.psit[i] + 0.5 * pr[i] * pr[i] + s.psi[i] * s.psi[i] / (r * r);
    }
    d[0] = 0.5 * s.psit[0] * s.psit[0] + 0.5 * pr[0] * pr[0] + 0.5 * pr[0] * pr[0];
    return integrate_r(s.grid, d, a, b);
  };
  for (const auto& s : traj.snapshots) {
    if (traj.blowup_mode) {
      const double R = traj.T_ref - s.t;
      const double a = lambda * R;
      bool degenerate = R <= 0.0;
      if (!degenerate && a < s.grid.r_max()) {
        const std::size_t c = s.grid.locate(a);
        degenerate = (1.0 - lambda) * R < 2.0 * (s.grid[c + 1] - s.grid[c]);
      }
      if (degenerate) {
        out.truncated = true;
        break;
      }
      out.t.push_back(s.t);
      out.value.push_back(window_energy(s, a, R));
      const double Rm = 0.99 * traj.T_ref - s.t, Rp = 1.01 * traj.T_ref - s.t;
      out.value_T_minus.push_back(Rm > 0.0 ? window_energy(s, lambda * Rm, Rm) : kNaN);
      out.value_T_plus.push_back(window_energy(s, lambda * Rp, Rp));
    } else {
      out.t.push_back(s.t);
      out.value.push_back(window_energy(s, lambda * s.t, s.t - A));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double windowed_kinetic(const FieldState& s, double R) {
  require_inside(s, R, "virial window");
  if (R <= 0.0) return 0.0;
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = s.psit[i] * s.psit[i] * cutoff_chi(s.grid[i] / R);
  const double k = integrate_r(s.grid, v, 0.0, R);
  return is_native(s) ? kPi3 * k : k;
}

double windowed_h(const FieldState& s, double R) {
  require_inside(s, R, "virial window");
  if (R <= 0.0) return 0.0;
  const Model& m = *s.model;
  const auto pr = radial_derivative(s.grid, s.psi);
  std::vector<double> v(s.size());
  if (is_native(s)) {
    const auto q = native_q(s, pr);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r = s.grid[i];
      const double cubic = i == 0 ? 0.0 : std::pow(std::abs(s.psi[i]), 3) / (r * r);
      v[i] = (q[i] * q[i] - cubic) * cutoff_chi(r / R);
    }
    return kPi3 * integrate_r(s.grid, v, 0.0, R);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = s.grid[i], x = s.psi[i], fp = m.f_prime(x);
    const double pot = i == 0 ? (fp * pr[0]) * (fp * pr[0]) : m.f(x) * m.f(x) / (r * r);
    v[i] = (fp * pr[i] * pr[i] + pot) * cutoff_chi(r / R);
  }
  return integrate_r(s.grid, v, 0.0, R);
}

VirialSeries virial_series(const Trajectory& traj, VirialMode mode) {
  VirialSeries out;
  for (const auto& s : traj.snapshots) {
    const double R = mode == VirialMode::Blowup ? traj.T_ref - s.t : 0.5 * s.t;
    if (R <= 0.0) continue;
    out.t.push_back(s.t);
    out.g.push_back(windowed_kinetic(s, R));
    out.h.push_back(windowed_h(s, R));
  }
  return out;
}

// ---------------------------------------------------------------------------

VirialTerms virial_terms(const FieldState& s, VirialIdentity which, double R, double Rdot) {
  require(R > 0.0, "virial identity needs a positive cone radius");
  require_inside(s, 0.75 * R, "virial identity");
  const Model& m = *s.model;
  const auto pr = radial_derivative(s.grid, s.psi);
  const std::size_t n = s.size();
  const double top = std::min(0.75 * R, s.grid.r_max());
  std::vector<double> vp(n), vr(n);
  if (which == VirialIdentity::WaveMap) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = s.grid[i], rho = r / R;
      const double eta = cutoff_eta(rho), phr = cutoff_eta_prime(rho) / R;
      const double pht = -cutoff_eta_prime(rho) * r * Rdot / (R * R);
      const double x = s.psi[i], pt = s.psit[i], ps = pr[i];
      const double f = m.f(x), fp = m.f_prime(x);
      const double pot = i == 0 ? (fp * ps) * (fp * ps) : f * f / (r * r);
      vp[i] = pt * f * eta;
      vr[i] = pt * pt * fp * eta - (fp * ps * ps + pot) * eta - ps * f * phr + pt * f * pht;
    }
    return {integrate_r(s.grid, vp, 0.0, top), integrate_r(s.grid, vr, 0.0, top)};
  }
  require(is_native(s), "Mult2u / Mult3u identities need the semilinear6d model");
  const double c = which == VirialIdentity::Mult2u ? 2.0 : 3.0;
  const auto q = native_q(s, pr);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = s.grid[i], rho = r / R;
    const double phi = cutoff_eta(rho), phr = cutoff_eta_prime(rho) / R;
    const double pht = -cutoff_eta_prime(rho) * r * Rdot / (R * R);
    const double x = s.psi[i], pt = s.psit[i], qi = q[i];
    const double cubic = i == 0 ? 0.0 : std::pow(std::abs(x), 3) / (r * r);
    const double mult = pt * qi * r + c * pt * x;  // u_t (x.grad u + c u) r^4
    vp[i] = mult * phi;
    // Bulk: (c - 3) u_t^2 + (2 - c) |grad u|^2 + (c - 2) |u|^3.
    double v = ((c - 3.0) * pt * pt + (2.0 - c) * qi * qi + (c - 2.0) * cubic) * phi;
    // Cutoff terms: -1/2 u_t^2 x.grad phi - 1/2 |grad u|^2 x.grad phi - c u grad u.grad phi
    //               - 1/3 |u|^3 x.grad phi + u_t (x.grad u + c u) phi_t.
    v += -0.5 * pt * pt * r * phr - 0.5 * qi * qi * r * phr - c * x * qi * phr - cubic * r * phr / 3.0 + mult * pht;
    vr[i] = v;
  }
  return {kPi3 * integrate_r(s.grid, vp, 0.0, top), kPi3 * integrate_r(s.grid, vr, 0.0, top)};
}

ResidualSeries virial_identity_residual(const Trajectory& traj, VirialIdentity which, const ConeGeometry& cone) {
  std::vector<double> t, P, rhs;
  for (const auto& s : traj.snapshots) {
    if (cone.radius(s.t) <= 0.0) continue;
    const auto terms = virial_terms(s, which, cone.radius(s.t), cone.radius_rate());
    t.push_back(s.t);
    P.push_back(terms.P);
    rhs.push_back(terms.rhs);
  }
  if (t.size() < 3) fail(ErrorCode::InvalidArgument, "virial identity needs three snapshots with a positive cone radius");
  ResidualSeries out;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double d = time_derivative(t, P, k);
    out.t.push_back(t[k]);
    out.lhs.push_back(d);
    out.rhs.push_back(rhs[k]);
    out.residual.push_back(std::abs(d - rhs[k]));
  }
  return out;
}

ResidualSeries virial_identity_residual(const Trajectory& traj, VirialIdentity which) {
  return virial_identity_residual(traj, which, ConeGeometry::of(traj));
}

// ---------------------------------------------------------------------------

WindowSeries pointwise_cone_bound(const Trajectory& traj, double lambda0) {
  require(lambda0 > 0.0 && lambda0 < 1.0, "lambda0 must lie in (0, 1)");
  WindowSeries out;
  for (const auto& s : traj.snapshots) {
    require(is_native(s), "the pointwise cone bound is defined for semilinear6d");
    double a, b;
    if (traj.blowup_mode) {
      b = traj.T_ref - s.t;
      a = lambda0 * b;
      if (b <= 0.0) {
        out.truncated = true;
        break;
      }
    } else {
      a = lambda0 * s.t;
      b = s.grid.r_max();
    }
    b = std::min(b, s.grid.r_max());
    double m = 0.0;
    if (a <= b) {
      m = std::max(std::abs(s.psi_at(a)), std::abs(s.psi_at(b)));
      for (std::size_t i = 0; i < s.size(); ++i)
        if (s.grid[i] >= a && s.grid[i] <= b) m = std::max(m, std::abs(s.psi[i]));
    }
    out.t.push_back(s.t);
    out.value.push_back(m);
  }
  return out;
}

double time_average(const std::vector<double>& times, const std::vector<double>& values, double t, double tau) {
  require(tau > 0.0, "averaging window must be positive");
  require(times.size() == values.size(), "series length mismatch");
  return integrate_in_time(times, values, t, t + tau) / tau;
}

double kinetic_time_average(const Trajectory& traj, double t, double tau) {
  const ConeGeometry cone = ConeGeometry::of(traj);
  std::vector<double> times, k;
  for (const auto& s : traj.snapshots) {
    const double R = cone.radius(s.t);
    require_inside(s, R, "kinetic average");
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = s.psit[i] * s.psit[i];
    const double kin = R > 0.0 ? integrate_r(s.grid, v, 0.0, R) : 0.0;
    times.push_back(s.t);
    k.push_back(is_native(s) ? kPi3 * kin : kin);
  }
  return time_average(times, k, t, tau);
}

// ---------------------------------------------------------------------------

void write_series(const std::string& dir, const std::string& name, const std::vector<double>& t,
                  const std::vector<double>& values) {
  require(t.size() == values.size(), "series '" + name + "' length mismatch");
  const std::filesystem::path folder = std::filesystem::path(dir) / "series";
  std::filesystem::create_directories(folder);
  const auto path = folder / (name + ".csv");
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << "t," << name << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) out << format_double(t[i]) << ',' << format_double(values[i]) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

std::pair<std::vector<double>, std::vector<double>> read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("t,"))
    fail(ErrorCode::InvalidArgument, path + ": missing 't,<name>' header");
  std::vector<double> t, v;
  auto parse = [&](std::string_view s) {
    double x = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || p != s.data() + s.size())
      fail(ErrorCode::InvalidArgument, path + ": bad number '" + std::string(s) + "'");
    return x;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::InvalidArgument, path + ": expected two columns");
    t.push_back(parse(std::string_view(line).substr(0, comma)));
    v.push_back(parse(std::string_view(line).substr(comma + 1)));
  }
  return {std::move(t), std::move(v)};
}

}  // namespace bubbletower
