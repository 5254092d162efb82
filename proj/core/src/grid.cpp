#include "bubbletower/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "bubbletower/error.hpp"

namespace bubbletower {

namespace {

constexpr double kPi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;

// int_a^b (va + (vb - va)(r - a)/(b - a)) r dr
double cell_r_integral(double a, double b, double va, double vb) {
  return (b - a) * (va * (2.0 * a + b) + vb * (a + 2.0 * b)) / 6.0;
}

double lerp_at(const RadialGrid& grid, const std::vector<double>& v, std::size_t i, double r) {
  const double a = grid[i], b = grid[i + 1];
  const double w = (r - a) / (b - a);
  return v[i] + w * (v[i + 1] - v[i]);
}

void check_window(const RadialGrid& grid, double r1, double r2) {
  if (!(r1 >= 0.0 && r1 <= r2 && r2 <= grid.r_max() * (1.0 + 1e-14)))
    fail(ErrorCode::OutOfRange, "window [" + format_double(r1) + ", " + format_double(r2) +
                                    "] outside grid [0, " + format_double(grid.r_max()) + "]");
}

template <class CellIntegral>
double integrate_window(const RadialGrid& grid, const std::vector<double>& v, double r1, double r2,
                        CellIntegral cell) {
  check_window(grid, r1, r2);
  r2 = std::min(r2, grid.r_max());
  if (r1 >= r2) return 0.0;
  const std::size_t i1 = grid.locate(r1), i2 = grid.locate(r2);
  if (i1 == i2) return cell(r1, r2, lerp_at(grid, v, i1, r1), lerp_at(grid, v, i1, r2));
  double sum = cell(r1, grid[i1 + 1], lerp_at(grid, v, i1, r1), v[i1 + 1]);
  for (std::size_t i = i1 + 1; i < i2; ++i) sum += cell(grid[i], grid[i + 1], v[i], v[i + 1]);
  sum += cell(grid[i2], r2, v[i2], lerp_at(grid, v, i2, r2));
  return sum;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------

RadialGrid RadialGrid::uniform(std::size_t cells, double r_max) {
  require(cells >= 2, "grid needs at least 2 cells");
  require(std::isfinite(r_max) && r_max > 0, "R_max must be positive and finite");
  RadialGrid g;
  g.nodes_.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) g.nodes_[i] = r_max * static_cast<double>(i) / cells;
  g.nodes_.back() = r_max;
  g.policy_ = SpacingPolicy::Uniform;
  g.finish();
  return g;
}

RadialGrid RadialGrid::graded(std::size_t cells, double r_max, double ratio) {
  require(cells >= 2, "grid needs at least 2 cells");
  require(std::isfinite(r_max) && r_max > 0, "R_max must be positive and finite");
  require(ratio > 0.9 && ratio < 1.0, "graded ratio must lie in (0.9, 1)");
  // Spacing h_i = h_0 q^i with q = 1/ratio, summing to r_max.
  const double q = 1.0 / ratio;
  const double total = std::expm1(cells * std::log(q)) / (q - 1.0);
  RadialGrid g;
  g.nodes_.resize(cells + 1);
  double h = r_max / total, r = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    g.nodes_[i] = r;
    r += h;
    h *= q;
  }
  g.nodes_.back() = r_max;
  g.policy_ = SpacingPolicy::Graded;
  g.ratio_ = ratio;
  g.finish();
  return g;
}

RadialGrid RadialGrid::from_nodes(std::vector<double> nodes) {
  require(nodes.size() >= 3, "grid needs at least 2 cells");
  require(nodes.front() == 0.0, "grid must start at r = 0");
  RadialGrid g;
  g.nodes_ = std::move(nodes);
  g.policy_ = SpacingPolicy::Refined;
  g.finish();
  return g;
}

void RadialGrid::finish() {
  h_min_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const double h = nodes_[i] - nodes_[i - 1];
    if (!(h > 0.0) || !std::isfinite(nodes_[i]))
      fail(ErrorCode::InvalidArgument, "grid nodes must be finite and strictly increasing");
    h_min_ = std::min(h_min_, h);
  }
}

std::size_t RadialGrid::locate(double r) const {
  if (r <= 0.0) return 0;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
  i = i == 0 ? 0 : i - 1;
  return std::min(i, cells() - 1);
}

// ---------------------------------------------------------------------------

FieldState FieldState::from_profile(ModelPtr model, RadialGrid grid,
                                    const std::function<double(double)>& psi0,
                                    const std::function<double(double)>& psi1, double t) {
  require(model != nullptr, "field state needs a model");
  FieldState s;
  s.model = std::move(model);
  s.t = t;
  s.grid = std::move(grid);
  const std::size_t n = s.grid.size();
  s.psi.resize(n);
  s.psit.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.psi[i] = psi0(s.grid[i]);
    s.psit[i] = psi1 ? psi1(s.grid[i]) : 0.0;
  }
  s.boundary_value_origin = s.model->nearest_vacuum(s.psi.front()).value;
  s.boundary_value_infinity = s.model->nearest_vacuum(s.psi.back()).value;
  s.psi.front() = s.boundary_value_origin;
  s.psit.front() = 0.0;
  s.psit.back() = 0.0;
  s.validate();
  return s;
}

FieldState FieldState::vacuum(ModelPtr model, RadialGrid grid, double value) {
  return from_profile(std::move(model), std::move(grid), [value](double) { return value; }, nullptr);
}

double FieldState::psi_at(double r) const { return interpolate_cubic(grid, psi, r); }
double FieldState::psit_at(double r) const { return interpolate_cubic(grid, psit, r); }

void FieldState::validate() const {
  if (psi.size() != grid.size() || psit.size() != grid.size())
    fail(ErrorCode::InvalidArgument, "field arrays do not match the grid");
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (!std::isfinite(psi[i]) || !std::isfinite(psit[i]))
      fail(ErrorCode::NumericalFailure, "non-finite field value at r=" + format_double(grid[i]));
}

// ---------------------------------------------------------------------------

std::vector<double> radial_derivative(const RadialGrid& grid, const std::vector<double>& v) {
  const std::size_t n = grid.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = grid[i] - grid[i - 1], hp = grid[i + 1] - grid[i];
    d[i] = (hm * hm * (v[i + 1] - v[i]) + hp * hp * (v[i] - v[i - 1])) / (hm * hp * (hm + hp));
  }
  auto one_sided = [&](std::size_t a, std::size_t b, std::size_t c) {
    // Quadratic through (a, b, c), derivative at a.
    const double x0 = grid[a], x1 = grid[b], x2 = grid[c];
    const double h1 = x1 - x0, h2 = x2 - x0;
    return (v[b] * h2 * h2 - v[c] * h1 * h1 - v[a] * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h2 - h1));
  };
  d[0] = one_sided(0, 1, 2);
  d[n - 1] = one_sided(n - 1, n - 2, n - 3);
  return d;
}

double radial_derivative_at_origin(const RadialGrid& grid, const std::vector<double>& v) {
  const double h1 = grid[1], h2 = grid[2];
  return (v[1] * h2 * h2 - v[2] * h1 * h1 - v[0] * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h2 - h1));
}

double integrate_r(const RadialGrid& grid, const std::vector<double>& v, double r1, double r2) {
  return integrate_window(grid, v, r1, r2, cell_r_integral);
}

double integrate_plain(const RadialGrid& grid, const std::vector<double>& v, double r1, double r2) {
  return integrate_window(grid, v, r1, r2,
                          [](double a, double b, double va, double vb) { return 0.5 * (b - a) * (va + vb); });
}

// ---------------------------------------------------------------------------

std::vector<double> energy_density(const FieldState& s) {
  const auto pr = radial_derivative(s.grid, s.psi);
  const Model& m = *s.model;
  const std::size_t n = s.size();
  std::vector<double> e(n);
  for (std::size_t i = 1; i < n; ++i) {
    const double r = s.grid[i];
    e[i] = s.psit[i] * s.psit[i] + pr[i] * pr[i] + m.potential(s.psi[i]) / (r * r);
  }
  const double slope = m.nearest_vacuum(s.psi[0]).slope * pr[0];
  e[0] = s.psit[0] * s.psit[0] + pr[0] * pr[0] + slope * slope;
  return e;
}

EnergyReport energy(const FieldState& s, double r1, double r2) {
  check_window(s.grid, r1, r2);
  const auto pr = radial_derivative(s.grid, s.psi);
  const Model& m = *s.model;
  const std::size_t n = s.size();
  std::vector<double> kin(n), grad(n), pot(n);
  const bool native = m.kind() == ModelKind::Semilinear6D;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = s.grid[i];
    kin[i] = s.psit[i] * s.psit[i];
    if (native) {
      // (u_r r^2)^2 r^5 / r^4 -> (psi_r - 2 psi / r)^2 r;  |u|^3 r^5 -> |psi|^3 / r.
      const double q = i == 0 ? -pr[0] : pr[i] - 2.0 * s.psi[i] / r;
      grad[i] = q * q;
      pot[i] = i == 0 ? 0.0 : -std::pow(std::abs(s.psi[i]), 3) / (3.0 * r * r);
    } else {
      grad[i] = pr[i] * pr[i];
      if (i == 0) {
        const double slope = m.nearest_vacuum(s.psi[0]).slope * pr[0];
        pot[i] = slope * slope;
      } else {
        pot[i] = m.potential(s.psi[i]) / (r * r);
      }
    }
  }
  EnergyReport rep;
  rep.r1 = r1;
  rep.r2 = r2;
  rep.kinetic = integrate_r(s.grid, kin, r1, r2);
  rep.gradient = integrate_r(s.grid, grad, r1, r2);
  rep.potential = integrate_r(s.grid, pot, r1, r2);
  if (native) {
    rep.kinetic *= 0.5 * kPi3;
    rep.gradient *= 0.5 * kPi3;
    rep.potential *= kPi3;
  }
  rep.total = rep.kinetic + rep.gradient + rep.potential;
  return rep;
}

EnergyReport energy(const FieldState& s) { return energy(s, 0.0, s.grid.r_max()); }

double h_norm(const FieldState& s, double r1, double r2, double vacuum) {
  check_window(s.grid, r1, r2);
  const std::size_t n = s.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = s.psi[i] - vacuum;
  const auto dr = radial_derivative(s.grid, d);
  std::vector<double> dens(n);
  for (std::size_t i = 1; i < n; ++i) {
    const double r = s.grid[i];
    dens[i] = dr[i] * dr[i] + d[i] * d[i] / (r * r) + s.psit[i] * s.psit[i];
  }
  if (r1 <= 0.0 && d[0] != 0.0) return std::numeric_limits<double>::infinity();
  dens[0] = 2.0 * dr[0] * dr[0] + s.psit[0] * s.psit[0];
  return integrate_r(s.grid, dens, r1, r2);
}

double g_modulus_gap(const FieldState& s, double r1, double r2) {
  require(r1 < r2, "g_modulus_gap needs r1 < r2");
  check_window(s.grid, r1, r2);
  return std::abs(s.model->G(s.psi_at(r1)) - s.model->G(s.psi_at(r2)));
}

// ---------------------------------------------------------------------------

double interpolate_cubic(const RadialGrid& grid, const std::vector<double>& v, double r) {
  if (r < 0.0 || r > grid.r_max() * (1.0 + 1e-14))
    fail(ErrorCode::OutOfRange, "interpolation point " + format_double(r) + " outside grid");
  const std::size_t i = grid.locate(r);
  if (r == grid[i]) return v[i];
  if (r == grid[i + 1]) return v[i + 1];
  const std::size_t n = grid.size();
  std::size_t s0 = i == 0 ? 0 : i - 1;
  if (s0 + 3 >= n) s0 = n - 4;
  double x[4], y[4];
  for (int j = 0; j < 4; ++j) {
    x[j] = grid[s0 + j];
    y[j] = v[s0 + j];
  }
  double out = 0.0;
  for (int j = 0; j < 4; ++j) {
    double w = 1.0;
    for (int k = 0; k < 4; ++k)
      if (k != j) w *= (r - x[k]) / (x[j] - x[k]);
    out += w * y[j];
  }
  const bool up = y[0] <= y[1] && y[1] <= y[2] && y[2] <= y[3];
  const bool down = y[0] >= y[1] && y[1] >= y[2] && y[2] >= y[3];
  if (up || down) {
    const double lo = std::min(v[i], v[i + 1]), hi = std::max(v[i], v[i + 1]);
    out = std::clamp(out, lo, hi);
  }
  return out;
}

FieldState resample(const FieldState& s, const RadialGrid& grid2) {
  if (grid2.r_max() > s.grid.r_max() * (1.0 + 1e-14))
    fail(ErrorCode::OutOfRange, "resample target extends beyond R_max");
  FieldState out;
  out.model = s.model;
  out.t = s.t;
  out.boundary_value_origin = s.boundary_value_origin;
  out.boundary_value_infinity = s.boundary_value_infinity;
  out.grid = grid2;
  out.psi.resize(grid2.size());
  out.psit.resize(grid2.size());
  for (std::size_t i = 0; i < grid2.size(); ++i) {
    out.psi[i] = interpolate_cubic(s.grid, s.psi, grid2[i]);
    out.psit[i] = interpolate_cubic(s.grid, s.psit, grid2[i]);
  }
  out.psi.front() = out.boundary_value_origin;
  return out;
}

// ---------------------------------------------------------------------------

void write_snapshot(const std::string& path, const FieldState& s) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write snapshot '" + path + "'");
  out << "# model=" << s.model->name() << '\n'
      << "# t=" << format_double(s.t) << '\n'
      << "# k=" << s.model->k() << '\n'
      << "# vacuum0=" << format_double(s.boundary_value_origin) << '\n'
      << "# vacuumInf=" << format_double(s.boundary_value_infinity) << '\n'
      << "r,psi,psit\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << format_double(s.grid[i]) << ',' << format_double(s.psi[i]) << ','
        << format_double(s.psit[i]) << '\n';
  if (!out) fail(ErrorCode::Io, "error writing snapshot '" + path + "'");
}

FieldState read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open snapshot '" + path + "'");
  FieldState s;
  std::string line, model_name;
  std::vector<double> r;
  bool have_t = false, have_v0 = false, have_vi = false;
  auto parse = [&](std::string_view text) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      fail(ErrorCode::Io, "malformed number '" + std::string(text) + "' in '" + path + "'");
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string val = line.substr(eq + 1);
      if (key == "model") model_name = val;
      else if (key == "t") s.t = parse(val), have_t = true;
      else if (key == "vacuum0") s.boundary_value_origin = parse(val), have_v0 = true;
      else if (key == "vacuumInf") s.boundary_value_infinity = parse(val), have_vi = true;
      continue;
    }
    if (line.rfind("r,", 0) == 0) continue;
    std::string_view view(line);
    const auto c1 = view.find(','), c2 = view.find(',', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
      fail(ErrorCode::Io, "malformed row in '" + path + "'");
    r.push_back(parse(view.substr(0, c1)));
    s.psi.push_back(parse(view.substr(c1 + 1, c2 - c1 - 1)));
    s.psit.push_back(parse(view.substr(c2 + 1)));
  }
  if (model_name.empty() || !have_t || !have_v0 || !have_vi)
    fail(ErrorCode::Io, "snapshot '" + path + "' is missing header fields");
  s.model = std::make_shared<const Model>(parse_model(model_name));
  s.grid = RadialGrid::from_nodes(std::move(r));
  s.validate();
  return s;
}

}  // namespace bubbletower
